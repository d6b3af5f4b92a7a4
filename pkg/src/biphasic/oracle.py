"""Independent analytic and brute-force references used by tests and the
`verify` command.

Nothing here shares numerical code with the paths it checks: the series
solution is classical, the finite-difference checks differentiate the
energy/stress directly, and the dense assembly oracle scatters element
blocks with plain Python loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import material as mat_mod
from .errors import ConfigError, OracleSizeError
from .fem import element_matrices
from .material import Kinematics, NeoHookeParams


@dataclass(frozen=True)
class TerzaghiParams:
    """Column of height H (mm), step traction sigma0 (MPa), constrained
    modulus M = lambda + 2 mu (MPa), permeability k; z = 0 is the sealed
    bottom, z = H the drained top."""

    H: float
    sigma0: float
    M: float
    k: float
    n_terms: int = 200

    def __post_init__(self):
        if min(self.H, self.sigma0, self.M, self.k) <= 0.0:
            raise ConfigError("TerzaghiParams must all be positive")
        if self.n_terms < 10:
            raise ConfigError(f"n_terms must be >= 10, got {self.n_terms}")

    @property
    def c_v(self) -> float:
        """Consolidation coefficient k*M, mm^2/s."""
        return self.k * self.M


def terzaghi_pressure(z, t: float, prm: TerzaghiParams):
    """Series solution of one-dimensional consolidation.

    p(z,t) = (4 sigma0/pi) sum_{m odd} (1/m) sin(m pi (H-z)/(2H))
             exp(-(m pi/(2H))^2 c_v t)

    The truncation remainder is bounded by the first omitted term's
    amplitude (alternating-sign envelope decays monotonically in m).
    """
    if t <= 0.0:
        raise ValueError(f"terzaghi_pressure requires t > 0, got {t}")
    z = np.asarray(z, dtype=float)
    ms = np.arange(1, 2 * prm.n_terms, 2, dtype=float)
    arg = ms[:, None] * np.pi * (prm.H - z[None, :] if z.ndim else prm.H - z) / (2 * prm.H)
    decay = np.exp(-((ms * np.pi / (2 * prm.H)) ** 2) * prm.c_v * t)
    series = (np.sin(arg) * (decay / ms)[:, None]).sum(axis=0)
    out = (4.0 * prm.sigma0 / np.pi) * series
    return out if out.size > 1 else float(out[0])


def terzaghi_consolidation_time(prm: TerzaghiParams, degree: float) -> float:
    """Time at which the average degree of consolidation reaches `degree`,
    found by bisection on the series for U(t)."""
    if not (0.0 < degree < 1.0):
        raise ConfigError(f"degree must be in (0,1), got {degree}")

    def U(t):
        ms = np.arange(1, 2 * prm.n_terms, 2, dtype=float)
        terms = (8 / np.pi**2) / ms**2 * np.exp(
            -((ms * np.pi / (2 * prm.H)) ** 2) * prm.c_v * t
        )
        return 1.0 - terms.sum()

    t_scale = prm.H**2 / prm.c_v
    lo, hi = 1e-9 * t_scale, 10.0 * t_scale
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if U(mid) < degree:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# finite-difference derivative checks


def _random_states(prm: NeoHookeParams, trials: int, rng) -> list:
    kins = []
    for _ in range(trials):
        F = np.eye(3) + 0.25 * (rng.random((3, 3)) - 0.5)
        J = np.linalg.det(F)
        if J <= 0.05:
            F = np.eye(3) + 0.05 * (rng.random((3, 3)) - 0.5)
            J = np.linalg.det(F)
        target = rng.uniform(0.7, 1.4)
        kins.append(Kinematics.from_F(F * (target / J) ** (1.0 / 3.0)))
    return kins


def fd_check_stress(
    prm: NeoHookeParams,
    trials: int = 20,
    step: float = 1e-6,
    seed: int = 1234,
    energy_fn=mat_mod.strain_energy,
    stress_fn=mat_mod.cauchy_stress,
) -> float:
    """Worst relative error of the Cauchy stress against central finite
    differences of the energy (via the first Piola stress push-forward)."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kin in _random_states(prm, trials, rng):
        F = kin.F
        P = np.zeros((3, 3))
        h = step * max(1.0, np.abs(F).max())
        for i in range(3):
            for j in range(3):
                Fp = F.copy()
                Fm = F.copy()
                Fp[i, j] += h
                Fm[i, j] -= h
                P[i, j] = (
                    energy_fn(Kinematics.from_F(Fp), prm)
                    - energy_fn(Kinematics.from_F(Fm), prm)
                ) / (2.0 * h)
        sigma_fd = P @ F.T / kin.J
        sigma = stress_fn(kin, prm)
        denom = max(np.abs(sigma_fd).max(), 1e-12)
        worst = max(worst, np.abs(sigma - sigma_fd).max() / denom)
    return worst


def fd_check_tangent(
    prm: NeoHookeParams,
    trials: int = 20,
    step: float = 1e-5,
    seed: int = 4321,
    stress_fn=mat_mod.cauchy_stress,
    tangent_fn=mat_mod.spatial_tangent,
) -> float:
    """Worst relative error of the spatial tangent against directional
    finite differences of the Kirchhoff stress under superposed symmetric
    velocity-gradient perturbations: J c:H = D_H tau - H tau - tau H."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kin in _random_states(prm, trials, rng):
        F, J = kin.F, kin.J
        tau = stress_fn(kin, prm) * J
        D = tangent_fn(kin, prm)
        D_fd = np.zeros((6, 6))
        for col, (i, j) in enumerate(mat_mod.VOIGT_PAIRS):
            H = np.zeros((3, 3))
            H[i, j] += 0.5
            H[j, i] += 0.5
            if i == j:
                H[i, j] = 1.0
            Fp = (np.eye(3) + step * H) @ F
            Fm = (np.eye(3) - step * H) @ F
            tau_p = stress_fn(Kinematics.from_F(Fp), prm) * np.linalg.det(Fp)
            tau_m = stress_fn(Kinematics.from_F(Fm), prm) * np.linalg.det(Fm)
            dtau = (tau_p - tau_m) / (2.0 * step)
            cH = (dtau - H @ tau - tau @ H) / J
            # H already carries unit engineering shear (H_ij + H_ji = 1),
            # so this column is exactly D[:, col] in our Voigt convention
            D_fd[:, col] = mat_mod.tensor_to_voigt(cH)
        denom = max(np.abs(D_fd).max(), 1e-12)
        worst = max(worst, np.abs(D - D_fd).max() / denom)
    return worst


# ---------------------------------------------------------------------------
# dense assembly oracle


def dense_assembly_oracle(
    mesh,
    dofmap,
    state,
    prev_state,
    mat,
    perm,
    gls,
    dt: float,
):
    """Dense index-by-index scatter of element blocks for small systems.

    Returns (matrix, rhs) in the same scaled block convention as
    solver.assemble. Refuses systems above 200 dofs.
    """
    from .fem import GlsParams, tau_gls
    from .mesh import circumsphere_radius

    n = dofmap.ndofs
    if n > 200:
        raise OracleSizeError(f"dense oracle limited to 200 dofs, got {n}")
    gls_enabled = bool(getattr(gls, "enabled", gls))

    A = np.zeros((n, n))
    rhs = np.zeros(n)
    for e in range(mesh.n_elements):
        nodes = mesh.elements[e]
        X = mesh.coords[nodes]
        udofs = [3 * int(nd) + c for nd in nodes for c in range(3)]
        pdofs = [int(dofmap.pdof_of_node[nd]) for nd in nodes[:4]]
        u_el = np.array([state.u[d] for d in udofs])
        u_prev_el = np.array([prev_state.u[d] for d in udofs])
        p_el = np.array([state.p[d - dofmap.n_udofs] for d in pdofs])

        tau = tau_gls(circumsphere_radius(X[:4]), perm.k, dt) if gls_enabled else 0.0
        em = element_matrices(
            X, u_el, u_prev_el, p_el, mat, perm,
            GlsParams(tau=tau, enabled=gls_enabled), dt,
        )

        for a in range(30):
            for b in range(30):
                A[udofs[a], udofs[b]] += em.k_uu[a, b] + em.k_uu_gls[a, b]
            for b in range(4):
                A[udofs[a], pdofs[b]] += em.k_up[a, b]
                A[pdofs[b], udofs[a]] += em.k_up[a, b]
            rhs[udofs[a]] -= em.f_int_u[a] + em.f_gls_u[a]
        for a in range(4):
            for b in range(4):
                A[pdofs[a], pdofs[b]] += -dt * em.k_pp[a, b]
            rhs[pdofs[a]] += dt * em.f_int_p[a]
    return A, rhs


def dirichlet_oracle(A: np.ndarray, b: np.ndarray, dofs, values) -> np.ndarray:
    """Solve A x = b subject to x[dofs] = values with dense Lagrange
    multipliers (reference for solver.apply_dirichlet)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    dofs = np.asarray(dofs, dtype=int)
    m = dofs.size
    E = np.zeros((m, n))
    E[np.arange(m), dofs] = 1.0
    K = np.block([[A, E.T], [E, np.zeros((m, m))]])
    rhs = np.concatenate([b, np.asarray(values, dtype=float)])
    return np.linalg.solve(K, rhs)[:n]
