"""Named self-checks behind the `verify` CLI command.

Each check returns a CheckResult; the CLI renders the table and maps
overall success to the exit code. Stress/tangent checks accept override
functions so broken implementations can be injected in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import material as mat_mod
from . import oracle
from .fem import quadrature_tet4pt, shape_tet4, shape_tet10
from .material import NeoHookeParams, PermeabilityParams
from .mesh import MeshSpec, generate_box
from .scenario import build_terzaghi_column, build_unconfined_compression, preset_mesh_spec
from .solver import DofMap, NewtonSettings, SolutionState, march, solve_time_step


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status:4s}  {self.name:24s} value={self.value:.3e} "
            f"threshold={self.threshold:.1e}  {self.detail}"
        )


def check_quadrature() -> CheckResult:
    """Degree-2 exactness of the 4-point rule against the factorial formula."""
    rule = quadrature_tet4pt()
    worst = abs(float(rule.weights.sum()) - 1.0 / 6.0)
    for a, b, c in [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (2, 0, 0), (0, 2, 0), (0, 0, 2),
        (1, 1, 0), (1, 0, 1), (0, 1, 1),
    ]:
        exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
        got = float(
            np.sum(
                rule.weights
                * rule.points[:, 0] ** a
                * rule.points[:, 1] ** b
                * rule.points[:, 2] ** c
            )
        )
        worst = max(worst, abs(got - exact))
    return CheckResult("quadrature_degree2", worst < 1e-14, worst, 1e-14)


def check_partition_of_unity() -> CheckResult:
    rule = quadrature_tet4pt()
    pts = np.vstack([rule.points, [[0.25, 0.25, 0.25]]])
    worst = 0.0
    for shape in (shape_tet10, shape_tet4):
        vals, grads = shape(pts)
        worst = max(worst, float(np.abs(vals.sum(axis=-1) - 1.0).max()))
        worst = max(worst, float(np.abs(grads.sum(axis=-2)).max()))
    return CheckResult("partition_of_unity", worst < 1e-12, worst, 1e-12)


def check_stress_reference() -> CheckResult:
    prm = NeoHookeParams(lam=0.2, mu=0.5)
    kin = mat_mod.Kinematics.from_F(np.eye(3))
    worst = max(
        float(np.abs(mat_mod.cauchy_stress(kin, prm)).max()),
        abs(mat_mod.strain_energy(kin, prm)),
    )
    return CheckResult("stress_free_reference", worst == 0.0, worst, 0.0)


def check_fd_stress(stress_fn=None) -> CheckResult:
    prm = NeoHookeParams(lam=0.2, mu=0.5)
    kwargs = {"stress_fn": stress_fn} if stress_fn is not None else {}
    err = oracle.fd_check_stress(prm, trials=20, **kwargs)
    return CheckResult("fd_stress", err < 1e-5, err, 1e-5)


def check_fd_tangent(tangent_fn=None) -> CheckResult:
    prm = NeoHookeParams(lam=0.2, mu=0.5)
    kwargs = {"tangent_fn": tangent_fn} if tangent_fn is not None else {}
    err = oracle.fd_check_tangent(prm, trials=20, **kwargs)
    return CheckResult("fd_tangent", err < 1e-4, err, 1e-4)


def check_assembly_equivalence() -> CheckResult:
    """Sparse assembly against the dense scatter oracle on a small mesh."""
    from .solver import assemble

    mesh = generate_box(MeshSpec(shape="box", lx=1, ly=1, lz=1, subdivisions=(1, 1, 1)))
    dm = DofMap.from_mesh(mesh)
    rng = np.random.default_rng(42)
    state = SolutionState(
        u=0.01 * rng.standard_normal(dm.n_udofs),
        p=0.01 * rng.standard_normal(dm.n_pdofs),
        t=1.0,
    )
    prev = SolutionState(
        u=0.005 * rng.standard_normal(dm.n_udofs),
        p=np.zeros(dm.n_pdofs),
        t=0.0,
    )
    mat = NeoHookeParams(lam=0.2, mu=0.5)
    perm = PermeabilityParams(k=1e-3)
    worst = 0.0
    for gls in (False, True):
        system = assemble(mesh, state, prev, mat, perm, gls, 2.0)
        dense, rhs = oracle.dense_assembly_oracle(
            mesh, dm, state, prev, mat, perm, gls, 2.0
        )
        worst = max(worst, float(np.abs(system.matrix.toarray() - dense).max()))
        worst = max(worst, float(np.abs(system.rhs - rhs).max()))
    return CheckResult("assembly_vs_dense", worst < 1e-14, worst, 1e-14)


def check_system_symmetry(n_steps: int = 3) -> CheckResult:
    """Assembled-matrix symmetry on every Newton iteration of a coarse run,
    with and without stabilization."""
    mesh_spec = MeshSpec(
        shape="quarter_cylinder", radius=18.0, height=8.0, subdivisions=(2, 6, 3)
    )
    from .mesh import generate

    mesh = generate(mesh_spec)
    mat = NeoHookeParams(lam=0.2, mu=0.5)
    perm = PermeabilityParams(k=1e-3)
    worst = 0.0
    count = 0

    def monitor(system, t, it):
        nonlocal worst, count
        a = system.matrix
        asym = abs(a - a.T).max()
        worst = max(worst, float(asym / abs(a).max()))
        count += 1

    for gls in (False, True):
        sc = build_unconfined_compression(mesh, mat, perm, gls, 6.4, 2.5e-3)
        march(sc, n_steps, system_monitor=monitor)
    return CheckResult(
        "system_symmetry", worst < 1e-12, worst, 1e-12,
        detail=f"{count} Newton iterations checked",
    )


def terzaghi_comparison(depth_elements: int = 16, sigma0: float = 1e-3,
                        k: float = 1e-3):
    """March a consolidation column and compare pressure profiles against
    the 200-term series at 20/50/80% average consolidation.

    Returns (errors dict, times dict). The time schedule starts near the
    stability limit of the first steps and grows geometrically.
    """
    lam, mu = 0.2, 0.5
    H = 8.0
    prm = oracle.TerzaghiParams(H=H, sigma0=sigma0, M=lam + 2 * mu, k=k, n_terms=200)
    mesh = generate_box(
        MeshSpec(shape="box", lx=0.5, ly=0.5, lz=H, subdivisions=(1, 1, depth_elements))
    )
    sc = build_terzaghi_column(
        mesh, NeoHookeParams(lam=lam, mu=mu), PermeabilityParams(k=k),
        dt=1.0, sigma0=sigma0,
    )
    dm = sc.dofmap

    targets = {
        deg: oracle.terzaghi_consolidation_time(prm, deg) for deg in (0.2, 0.5, 0.8)
    }
    t20, t50, t80 = targets[0.2], targets[0.5], targets[0.8]
    schedule = list(np.linspace(t20 / 12, t20, 12))
    schedule += list(np.linspace(t20, t50, 9)[1:])
    schedule += list(np.linspace(t50, t80, 9)[1:])

    from .mesh import reference_line_nodes

    line = reference_line_nodes(mesh, (0, 0, 0), (0, 0, 1), 1e-9)
    corner = line[np.isin(line, dm.corner_nodes)]
    z = mesh.coords[corner, 2]

    errors = {}
    state = sc.initial_state(dm)
    for t in schedule:
        state, _ = solve_time_step(sc, state, t)
        for deg, t_target in targets.items():
            if abs(t - t_target) < 1e-9 * t_target:
                p = state.p[dm.pdof_of_node[corner] - dm.n_udofs]
                ref = oracle.terzaghi_pressure(z, t_target, prm)
                errors[deg] = float(np.linalg.norm(p - ref) / np.linalg.norm(ref))
    return errors, targets


def check_terzaghi(depth_elements: int = 16) -> CheckResult:
    errors, _ = terzaghi_comparison(depth_elements=depth_elements)
    worst = max(errors.values())
    detail = " ".join(f"U{int(100*d)}%={e:.4f}" for d, e in sorted(errors.items()))
    return CheckResult("terzaghi_series", worst < 0.02, worst, 0.02, detail=detail)


def run_all_checks(terzaghi_refine: int = 1, include_slow: bool = True) -> list:
    """The standard battery; refine level r uses 8*2^(r-1) column elements."""
    checks = [
        check_quadrature(),
        check_partition_of_unity(),
        check_stress_reference(),
        check_fd_stress(),
        check_fd_tangent(),
        check_assembly_equivalence(),
    ]
    if include_slow:
        checks.append(check_system_symmetry())
        checks.append(check_terzaghi(depth_elements=8 * 2 ** (terzaghi_refine - 1)))
    return checks
