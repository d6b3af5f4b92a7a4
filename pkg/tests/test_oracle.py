"""The verification oracles themselves: series solution, FD checks,
dense assembly reference."""

import numpy as np
import pytest

from biphasic import material as mat
from biphasic import oracle
from biphasic.errors import ConfigError, OracleSizeError
from biphasic.material import Kinematics, NeoHookeParams, PermeabilityParams
from biphasic.mesh import MeshSpec, generate_box
from biphasic.oracle import (
    TerzaghiParams,
    dense_assembly_oracle,
    fd_check_stress,
    fd_check_tangent,
    terzaghi_consolidation_time,
    terzaghi_pressure,
)
from biphasic.solver import DofMap, SolutionState

PRM = NeoHookeParams(lam=0.2, mu=0.5)
TERZ = TerzaghiParams(H=8.0, sigma0=0.01, M=1.2, k=1e-3, n_terms=200)


def test_terzaghi_params_validation():
    with pytest.raises(ConfigError):
        TerzaghiParams(H=8.0, sigma0=0.01, M=1.2, k=1e-3, n_terms=5)
    with pytest.raises(ConfigError):
        TerzaghiParams(H=-1.0, sigma0=0.01, M=1.2, k=1e-3)


def test_terzaghi_drained_face_zero():
    for t in (1.0, 100.0, 1e5):
        assert terzaghi_pressure(8.0, t, TERZ) == pytest.approx(0.0, abs=1e-12)


def test_terzaghi_long_time_decay():
    t_scale = TERZ.H**2 / TERZ.c_v
    z = np.linspace(0, 8, 30)
    assert np.abs(terzaghi_pressure(z, 10 * t_scale, TERZ)).max() < 1e-10 * TERZ.sigma0


def test_terzaghi_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        terzaghi_pressure(4.0, 0.0, TERZ)
    with pytest.raises(ValueError):
        terzaghi_pressure(4.0, -1.0, TERZ)


def test_terzaghi_truncation_self_consistency():
    # 50-term truncation agrees with the 200-term reference at mid-height
    # and 50% average consolidation
    t50 = terzaghi_consolidation_time(TERZ, 0.5)
    ref = terzaghi_pressure(4.0, t50, TERZ)
    short = terzaghi_pressure(
        4.0, t50, TerzaghiParams(H=8.0, sigma0=0.01, M=1.2, k=1e-3, n_terms=50)
    )
    assert abs(ref - short) < 1e-10


def test_terzaghi_initial_condition():
    # p -> sigma0 in the interior as t -> 0+ (500 terms, within 2%)
    prm = TerzaghiParams(H=8.0, sigma0=0.01, M=1.2, k=1e-3, n_terms=500)
    t = 1e-6 * prm.H**2 / prm.c_v
    z = np.linspace(0.5, 7.0, 10)
    p = terzaghi_pressure(z, t, prm)
    assert np.abs(p - prm.sigma0).max() < 0.02 * prm.sigma0


def test_terzaghi_profile_monotone_from_drained_face():
    t20 = terzaghi_consolidation_time(TERZ, 0.2)
    z = np.linspace(0.0, 8.0, 33)
    p = terzaghi_pressure(z, t20, TERZ)
    assert np.all(np.diff(p) <= 1e-12)  # decreasing toward the drained top


def test_consolidation_time_bracket():
    t20 = terzaghi_consolidation_time(TERZ, 0.2)
    t80 = terzaghi_consolidation_time(TERZ, 0.8)
    # classical time factors: Tv(20%) ~ 0.031, Tv(80%) ~ 0.567
    tv20 = t20 * TERZ.c_v / TERZ.H**2
    tv80 = t80 * TERZ.c_v / TERZ.H**2
    assert tv20 == pytest.approx(0.0314, abs=0.002)
    assert tv80 == pytest.approx(0.567, abs=0.005)


# ---------------------------------------------------------------------------
# FD checks


def test_fd_stress_passes_for_correct_model():
    assert fd_check_stress(PRM, trials=20) < 1e-5


def test_fd_tangent_passes_for_correct_model():
    assert fd_check_tangent(PRM, trials=20) < 1e-4


def test_fd_gradient_vanishes_at_identity():
    kin = Kinematics.from_F(np.eye(3))
    h = 1e-6
    worst = 0.0
    for i in range(3):
        for j in range(3):
            Fp = np.eye(3)
            Fm = np.eye(3)
            Fp[i, j] += h
            Fm[i, j] -= h
            worst = max(
                worst,
                abs(
                    mat.strain_energy(Kinematics.from_F(Fp), PRM)
                    - mat.strain_energy(Kinematics.from_F(Fm), PRM)
                )
                / (2 * h),
            )
    assert worst < 1e-9


def test_fd_step_sweep_is_v_shaped():
    errs = [fd_check_stress(PRM, trials=5, step=s) for s in (1e-4, 1e-6, 1e-8)]
    assert errs[1] < errs[0]
    assert errs[1] < errs[2]


def test_fd_detects_injected_stress_bug():
    def broken_stress(kin, prm):
        return 1.02 * mat.cauchy_stress(kin, prm)

    assert fd_check_stress(PRM, trials=5, stress_fn=broken_stress) > 1e-3


def test_fd_detects_injected_tangent_bug():
    def broken_tangent(kin, prm):
        D = mat.spatial_tangent(kin, prm)
        D[3, 3] *= 2.0  # wrong shear scaling, the classic Voigt mistake
        return D

    assert fd_check_tangent(PRM, trials=5, tangent_fn=broken_tangent) > 1e-2


# ---------------------------------------------------------------------------
# dense assembly oracle


def test_dense_oracle_single_element_placement(unit_box):
    from biphasic.fem import GlsParams, element_matrices

    dm = DofMap.from_mesh(unit_box)
    rng = np.random.default_rng(0)
    state = SolutionState(
        u=0.01 * rng.standard_normal(dm.n_udofs),
        p=0.01 * rng.standard_normal(dm.n_pdofs),
        t=1.0,
    )
    prev = SolutionState.zero(dm)
    A, rhs = dense_assembly_oracle(
        unit_box, dm, state, prev, PRM, PermeabilityParams(k=1e-3), False, 1.0
    )
    # additivity: the (0,0) u-block equals the sum of contributions of the
    # elements containing node 0
    nodes0 = [e for e in range(unit_box.n_elements) if 0 in unit_box.elements[e]]
    acc = 0.0
    for e in nodes0:
        el = unit_box.elements[e]
        udofs = np.array([3 * n + c for n in el for c in range(3)])
        em = element_matrices(
            unit_box.coords[el],
            state.u[udofs],
            prev.u[udofs],
            state.p[dm.pdof_of_node[el[:4]] - dm.n_udofs],
            PRM,
            PermeabilityParams(k=1e-3),
            GlsParams(),
            1.0,
        )
        local = np.nonzero(udofs == 0)[0][0]
        acc += em.k_uu[local, local]
    assert A[0, 0] == pytest.approx(acc, rel=1e-14)


def test_dense_oracle_size_guard():
    mesh = generate_box(MeshSpec(shape="box", lx=1, ly=1, lz=4, subdivisions=(2, 2, 8)))
    dm = DofMap.from_mesh(mesh)
    assert dm.ndofs > 200
    state = SolutionState.zero(dm)
    with pytest.raises(OracleSizeError):
        dense_assembly_oracle(
            mesh, dm, state, state, PRM, PermeabilityParams(k=1e-3), False, 1.0
        )
