import numpy as np
import pytest

from biphasic.material import NeoHookeParams, PermeabilityParams
from biphasic.mesh import MeshSpec, generate_box


@pytest.fixture(scope="session")
def paper_material():
    return NeoHookeParams(lam=0.2, mu=0.5)


@pytest.fixture(scope="session")
def unit_box():
    return generate_box(MeshSpec(shape="box", lx=1, ly=1, lz=1, subdivisions=(1, 1, 1)))


@pytest.fixture(scope="session")
def small_box():
    return generate_box(MeshSpec(shape="box", lx=1, ly=1, lz=1, subdivisions=(2, 1, 1)))


def rand_deformation_gradient(rng, j_lo=0.7, j_hi=1.4):
    F = np.eye(3) + 0.25 * (rng.random((3, 3)) - 0.5)
    J = np.linalg.det(F)
    if J <= 0.05:
        F = np.eye(3) + 0.05 * (rng.random((3, 3)) - 0.5)
        J = np.linalg.det(F)
    target = rng.uniform(j_lo, j_hi)
    return F * (target / J) ** (1.0 / 3.0)
