"""Neo-Hookean energy, stress, tangent, and their FD consistency."""

import numpy as np
import pytest

from biphasic import material as mat
from biphasic import oracle
from biphasic.errors import ConfigError, InvertedElementError
from biphasic.material import Kinematics, NeoHookeParams, PermeabilityParams

from conftest import rand_deformation_gradient

PRM = NeoHookeParams(lam=0.2, mu=0.5)


def test_param_validation():
    with pytest.raises(ConfigError):
        NeoHookeParams(lam=0.2, mu=0.0)
    with pytest.raises(ConfigError):
        NeoHookeParams(lam=-0.1, mu=0.5)
    with pytest.raises(ConfigError):
        PermeabilityParams(k=0.0)


def test_kinematics_invariants():
    rng = np.random.default_rng(0)
    for _ in range(20):
        kin = Kinematics.from_F(rand_deformation_gradient(rng))
        assert kin.J > 0
        # arithmetic-geometric inequality on the eigenvalues of C
        assert kin.I_C >= 3.0 * kin.J ** (2.0 / 3.0) - 1e-12


def test_kinematics_rejects_inverted():
    with pytest.raises(InvertedElementError):
        Kinematics.from_F(np.diag([1.0, 1.0, -1.0]))


def test_energy_zero_at_identity():
    kin = Kinematics.from_F(np.eye(3))
    assert mat.strain_energy(kin, PRM) == 0.0


def test_energy_paper_values_two_codings():
    # lambda = 0.2, mu = 0.5, F = diag(1.1, 1, 1): evaluate the energy with
    # an independent high-precision coding and compare
    import mpmath as mp

    mp.mp.dps = 40
    lnJ = mp.log(mp.mpf("1.1"))
    phi_mp = (
        mp.mpf("0.25") * (mp.mpf("1.1") ** 2 + 2 - 3)
        - mp.mpf("0.5") * lnJ
        + mp.mpf("0.1") * lnJ**2
    )
    kin = Kinematics.from_F(np.diag([1.1, 1.0, 1.0]))
    phi = mat.strain_energy(kin, PRM)
    assert abs(phi - float(phi_mp)) < 1e-15
    assert kin.I_C == pytest.approx(3.21, abs=1e-15)


def test_energy_penalty_growth_toward_collapse():
    phis = [
        mat.strain_energy(Kinematics.from_F(a * np.eye(3)), PRM)
        for a in (0.01, 0.5, 1.0)
    ]
    assert phis[0] > phis[1] > phis[2] == 0.0


def test_energy_nonneg_with_minimum_at_identity():
    rng = np.random.default_rng(1)
    for _ in range(40):
        kin = Kinematics.from_F(rand_deformation_gradient(rng, 0.5, 2.0))
        assert mat.strain_energy(kin, PRM) >= 0.0
    # FD gradient of the energy vanishes at the reference state
    h = 1e-7
    g = 0.0
    for i in range(3):
        for j in range(3):
            Fp = np.eye(3)
            Fm = np.eye(3)
            Fp[i, j] += h
            Fm[i, j] -= h
            g = max(
                g,
                abs(
                    mat.strain_energy(Kinematics.from_F(Fp), PRM)
                    - mat.strain_energy(Kinematics.from_F(Fm), PRM)
                )
                / (2 * h),
            )
    assert g < 1e-9


def test_stress_zero_at_identity():
    kin = Kinematics.from_F(np.eye(3))
    assert np.abs(mat.cauchy_stress(kin, PRM)).max() == 0.0


def test_stress_zero_under_pure_rotation():
    rng = np.random.default_rng(2)
    for _ in range(5):
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1.0
        kin = Kinematics.from_F(q)
        assert np.abs(mat.cauchy_stress(kin, PRM)).max() < 1e-14


def test_stress_objectivity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        F = rand_deformation_gradient(rng)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1.0
        s = mat.cauchy_stress(Kinematics.from_F(F), PRM)
        s_rot = mat.cauchy_stress(Kinematics.from_F(q @ F), PRM)
        assert np.abs(s_rot - q @ s @ q.T).max() < 1e-10


def test_stress_matches_energy_fd():
    err = oracle.fd_check_stress(PRM, trials=20)
    assert err < 1e-5


def test_tangent_matches_stress_fd():
    err = oracle.fd_check_tangent(PRM, trials=20)
    assert err < 1e-4


def test_tangent_at_identity_is_small_strain_matrix():
    D = mat.spatial_tangent(Kinematics.from_F(np.eye(3)), PRM)
    C = np.zeros((6, 6))
    C[:3, :3] = PRM.lam
    for i in range(3):
        C[i, i] += 2 * PRM.mu
        C[3 + i, 3 + i] = PRM.mu
    assert np.abs(D - C).max() < 1e-15


def test_shear_modulus_positivity_bound():
    # mu' = (mu - lambda lnJ)/J stays positive while lnJ < mu/lambda = 2.5
    ln_j_star = PRM.mu / PRM.lam
    assert ln_j_star == pytest.approx(2.5)
    for J in (0.7, 1.0, 1.4):
        kin = Kinematics.from_F(J ** (1 / 3) * np.eye(3))
        D = mat.spatial_tangent(kin, PRM)
        assert D[3, 3] > 0.0
        assert np.log(J) < ln_j_star


def test_stress_tangent_bundle_invariants():
    rng = np.random.default_rng(4)
    kin = Kinematics.from_F(rand_deformation_gradient(rng))
    st = mat.stress_and_tangent(kin, PRM)
    assert np.abs(st.sigma - st.sigma.T).max() < 1e-12
    rel = np.abs(st.D - st.D.T).max() / np.abs(st.D).max()
    assert rel < 1e-10


def test_voigt_round_trip():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3))
    sym = 0.5 * (a + a.T)
    for strain in (False, True):
        v = mat.tensor_to_voigt(sym, strain=strain)
        back = mat.voigt_to_tensor(v, strain=strain)
        assert np.abs(back - sym).max() < 1e-15
