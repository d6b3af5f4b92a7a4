"""Global assembly, constraints, Newton iteration and time marching.

Block convention (symmetric saddle point): with C = integral(B_div^T N^p)
and the element sign K_up = -C,

    [[K_uu + K_gls,  K_up    ],   [d_u]   [  f_ext_u - f_int_u - f_gls ]
     [K_up^T,        -dt*K_pp]] @ [d_p] = [  dt * (f_int_p - f_ext_p)  ]

which is the Newton update of the momentum residual and the mass-balance
residual scaled by -dt. The pressure block enters with a negative sign;
that (not a sign flip of K_up) is what makes the assembled matrix
symmetric, and it makes the system indefinite, hence the direct sparse
LU solve.

External loads are passed as a full-length vector already in the scaled
convention (forces on u dofs, dt-scaled fluxes on p dofs).
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BiphasicError, ConfigError, InvertedElementError, StepFailureError
from .fem import element_matrices_batch, tau_gls
from .mesh import Mesh, circumsphere_radii


@dataclass(frozen=True)
class DofMap:
    """Displacement dofs 3*node+comp for all nodes; pressure dofs appended
    for corner nodes only (Taylor-Hood)."""

    n_nodes: int
    corner_nodes: np.ndarray
    pdof_of_node: np.ndarray  # ndofs index, -1 on midside nodes

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "DofMap":
        corners = mesh.corner_nodes
        pdof = np.full(mesh.n_nodes, -1, dtype=np.int64)
        pdof[corners] = 3 * mesh.n_nodes + np.arange(corners.size)
        return cls(n_nodes=mesh.n_nodes, corner_nodes=corners, pdof_of_node=pdof)

    @property
    def n_udofs(self) -> int:
        return 3 * self.n_nodes

    @property
    def n_pdofs(self) -> int:
        return self.corner_nodes.size

    @property
    def ndofs(self) -> int:
        return self.n_udofs + self.n_pdofs

    def udof(self, node: int, comp: int) -> int:
        return 3 * node + comp

    def pdof(self, node: int) -> int:
        d = int(self.pdof_of_node[node])
        if d < 0:
            raise ConfigError(f"node {node} carries no pressure dof (midside node)")
        return d


@dataclass
class SolutionState:
    """Nodal displacement (mm), corner pressures (MPa) and time (s)."""

    u: np.ndarray
    p: np.ndarray
    t: float

    @classmethod
    def zero(cls, dofmap: DofMap, t: float = 0.0) -> "SolutionState":
        return cls(u=np.zeros(dofmap.n_udofs), p=np.zeros(dofmap.n_pdofs), t=t)

    def copy(self) -> "SolutionState":
        return SolutionState(u=self.u.copy(), p=self.p.copy(), t=self.t)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.p])

    @classmethod
    def from_vector(cls, x: np.ndarray, dofmap: DofMap, t: float) -> "SolutionState":
        nu = dofmap.n_udofs
        return cls(u=x[:nu].copy(), p=x[nu:].copy(), t=t)


@dataclass(frozen=True)
class NewtonSettings:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_iters: int = 20
    max_step_halvings: int = 4

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ConfigError("Newton tolerances must be > 0")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


@dataclass
class GlobalSystem:
    """Assembled sparse block system and its right-hand side (-residual)."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap


class Workspace:
    """Per-mesh precomputed scatter structure for repeated assembly."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.dofmap = DofMap.from_mesh(mesh)
        conn = mesh.elements.astype(np.int64)
        self.X = mesh.coords[conn]
        self.udofs = (3 * conn[:, :, None] + np.arange(3)).reshape(-1, 30)
        self.pdofs = self.dofmap.pdof_of_node[conn[:, :4]]
        self.ldofs = np.hstack([self.udofs, self.pdofs])
        self.h = circumsphere_radii(mesh)

        nel = conn.shape[0]
        rows = np.repeat(self.ldofs, 34, axis=1).ravel()
        cols = np.tile(self.ldofs, (1, 34)).ravel()
        order = np.lexsort((cols, rows))
        rs, cs = rows[order], cols[order]
        boundary = np.ones(rs.size, dtype=bool)
        boundary[1:] = (rs[1:] != rs[:-1]) | (cs[1:] != cs[:-1])
        starts = np.nonzero(boundary)[0]
        ndofs = self.dofmap.ndofs
        indices = cs[starts]
        indptr = np.zeros(ndofs + 1, dtype=np.int64)
        np.add.at(indptr[1:], rs[starts], 1)
        np.cumsum(indptr, out=indptr)

        # csr slot of each raw entry; bincount then accumulates duplicates
        # sequentially in element order (bitwise-reproducible scatter)
        slot_sorted = np.cumsum(boundary) - 1
        slot_of_entry = np.empty(rows.size, dtype=np.int64)
        slot_of_entry[order] = slot_sorted
        self.scatter_slots = slot_of_entry
        self.nnz = starts.size
        self.csr_indices = indices.astype(np.int32)
        self.csr_indptr = indptr
        self.nel = nel


_workspaces: "weakref.WeakKeyDictionary[Mesh, Workspace]" = weakref.WeakKeyDictionary()


def get_workspace(mesh: Mesh) -> Workspace:
    ws = _workspaces.get(mesh)
    if ws is None:
        ws = Workspace(mesh)
        _workspaces[mesh] = ws
    return ws


def assemble(
    mesh: Mesh,
    state: SolutionState,
    prev_state: SolutionState,
    mat,
    perm,
    gls,
    dt: float,
    f_ext: np.ndarray | None = None,
    workspace: Workspace | None = None,
) -> GlobalSystem:
    """Assemble the scaled block system at the current Newton iterate.

    gls may be a bool or anything with an ``enabled`` attribute. The
    backward-Euler velocity uses (state.u - prev_state.u)/dt.
    """
    ws = workspace or get_workspace(mesh)
    dm = ws.dofmap
    if state.u.shape != (dm.n_udofs,) or state.p.shape != (dm.n_pdofs,):
        raise ConfigError("state dimensions do not match the mesh dof map")

    gls_enabled = bool(getattr(gls, "enabled", gls))
    if gls_enabled:
        taus = tau_gls(1.0, perm.k, dt) * ws.h**2  # = h^2/(4 k dt) per element
    else:
        taus = np.zeros(ws.nel)

    u_el = state.u[ws.udofs]
    u_prev_el = prev_state.u[ws.udofs]
    p_el = state.p[ws.pdofs - dm.n_udofs]

    out = element_matrices_batch(
        ws.X, u_el, u_prev_el, p_el, mat.lam, mat.mu, perm.k, taus, dt,
        element_ids=np.arange(ws.nel),
    )

    nel = ws.nel
    K = np.empty((nel, 34, 34))
    K[:, :30, :30] = out["k_uu"] + out["k_uu_gls"]
    K[:, :30, 30:] = out["k_up"]
    K[:, 30:, :30] = out["k_up"].transpose(0, 2, 1)
    K[:, 30:, 30:] = -dt * out["k_pp"]

    data = np.bincount(ws.scatter_slots, weights=K.reshape(-1), minlength=ws.nnz)
    matrix = sp.csr_matrix(
        (data, ws.csr_indices, ws.csr_indptr), shape=(dm.ndofs, dm.ndofs)
    )

    rhs = np.zeros(dm.ndofs)
    np.add.at(rhs, ws.udofs.ravel(), -(out["f_int_u"] + out["f_gls_u"]).ravel())
    np.add.at(rhs, ws.pdofs.ravel(), dt * out["f_int_p"].ravel())
    if f_ext is not None:
        rhs += f_ext

    return GlobalSystem(matrix=matrix, rhs=rhs, dofmap=dm)


def apply_dirichlet(system: GlobalSystem, dofs, values) -> GlobalSystem:
    """Symmetric elimination: move columns to the RHS, zero rows/columns,
    unit diagonal, prescribed value on the RHS."""
    dofs = np.asarray(dofs, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if dofs.size != values.size:
        raise ConfigError("constraint dofs and values differ in length")
    uniq, first = np.unique(dofs, return_index=True)
    if uniq.size != dofs.size:
        # duplicates allowed only when the values agree
        for d in uniq:
            vs = values[dofs == d]
            if np.ptp(vs) > 1e-14 * max(1.0, np.abs(vs).max()):
                raise ConfigError(f"conflicting constraint values on dof {int(d)}")
        dofs, values = uniq, values[first]

    n = system.dofmap.ndofs
    A = system.matrix
    x_bc = np.zeros(n)
    x_bc[dofs] = values
    rhs = system.rhs - A @ x_bc

    free = np.ones(n)
    free[dofs] = 0.0
    D_free = sp.diags(free)
    con = np.zeros(n)
    con[dofs] = 1.0
    A2 = (D_free @ A @ D_free + sp.diags(con)).tocsr()
    rhs *= free
    rhs[dofs] = values
    return GlobalSystem(matrix=A2, rhs=rhs, dofmap=system.dofmap)


try:
    import cvxopt
    import cvxopt.umfpack as _umfpack

    _HAVE_UMFPACK = True
except Exception:  # pragma: no cover - cvxopt is a declared dependency
    _HAVE_UMFPACK = False

_solver_cache: dict = {}


def solve_sparse(matrix: sp.csr_matrix, rhs: np.ndarray, cache_key=None) -> np.ndarray:
    """Direct sparse LU solve of the symmetric indefinite system.

    Uses the multifrontal UMFPACK factorization (via cvxopt) when
    available, falling back to SuperLU. With a cache_key, the cvxopt
    matrix shell and the symbolic analysis are reused across calls with
    the same sparsity pattern (all Newton iterations of a run).
    """
    if not _HAVE_UMFPACK:
        lu = spla.splu(matrix.tocsc(), permc_spec="COLAMD")
        return lu.solve(rhs)

    csc = matrix.tocsc()
    n = csc.shape[0]
    entry = None
    if cache_key is not None:
        entry = _solver_cache.get(cache_key)
        if entry is not None and (entry[0] != csc.nnz or entry[1] != n):
            entry = None
    if entry is None:
        cols = np.repeat(np.arange(n, dtype=np.int64), np.diff(csc.indptr))
        acv = cvxopt.spmatrix(
            np.arange(csc.nnz, dtype=float), csc.indices.astype(np.int64), cols, (n, n)
        )
        perm = np.asarray(acv.V).ravel().astype(np.int64)
        acv.V = cvxopt.matrix(csc.data[perm])
        symbolic = _umfpack.symbolic(acv)
        entry = (csc.nnz, n, acv, perm, symbolic)
        if cache_key is not None:
            if len(_solver_cache) > 8:
                _solver_cache.clear()
            _solver_cache[cache_key] = entry
    _, _, acv, perm, symbolic = entry
    acv.V = cvxopt.matrix(csc.data[perm])
    numeric = _umfpack.numeric(acv, symbolic)
    b = cvxopt.matrix(rhs)
    _umfpack.solve(acv, numeric, b)
    return np.asarray(b).ravel()


def solve_time_step(
    scenario,
    prev_state: SolutionState,
    t_new: float,
    settings: NewtonSettings | None = None,
    system_monitor=None,
    initial_guess: SolutionState | None = None,
    _halvings_left: int | None = None,
) -> tuple[SolutionState, int]:
    """Advance one backward-Euler step with full Newton iterations.

    On non-convergence (or an inverted element) the step is halved and
    re-run, up to settings.max_step_halvings times. Returns the converged
    state and the total number of Newton iterations spent. initial_guess
    seeds the first iterate (e.g. an extrapolation from earlier steps);
    it does not affect the converged result.
    """
    settings = settings or NewtonSettings()
    if _halvings_left is None:
        _halvings_left = settings.max_step_halvings
    dt = t_new - prev_state.t
    if dt <= 0.0:
        raise ConfigError(f"time step must advance time (dt={dt})")

    try:
        return _newton_solve(
            scenario, prev_state, t_new, dt, settings, system_monitor, initial_guess
        )
    except (StepFailureError, InvertedElementError) as err:
        if _halvings_left <= 0:
            history = getattr(err, "history", [])
            raise StepFailureError(
                f"step to t={t_new} failed after {settings.max_step_halvings} "
                f"halvings: {err}",
                history=history,
            ) from err
        t_mid = prev_state.t + 0.5 * dt
        mid, it1 = solve_time_step(
            scenario, prev_state, t_mid, settings, system_monitor,
            _halvings_left=_halvings_left - 1,
        )
        end, it2 = solve_time_step(
            scenario, mid, t_new, settings, system_monitor,
            _halvings_left=_halvings_left - 1,
        )
        return end, it1 + it2


def _newton_solve(scenario, prev_state, t_new, dt, settings, system_monitor,
                  initial_guess=None):
    ws = get_workspace(scenario.mesh)
    dm = ws.dofmap
    x = (initial_guess or prev_state).as_vector()
    dofs, values = scenario.constraints(t_new)
    x[dofs] = values
    f_ext = scenario.external_load(t_new, dt)

    history = []
    res0 = None
    for it in range(settings.max_iters + 1):
        state = SolutionState.from_vector(x, dm, t_new)
        system = assemble(
            scenario.mesh, state, prev_state, scenario.material,
            scenario.permeability, scenario.gls_enabled, dt,
            f_ext=f_ext, workspace=ws,
        )
        if system_monitor is not None:
            system_monitor(system, t_new, it)
        constrained = apply_dirichlet(system, dofs, np.zeros(dofs.size))
        res = float(np.linalg.norm(constrained.rhs))
        history.append(res)
        if res0 is None:
            res0 = res
        if res <= settings.rel_tol * res0 + settings.abs_tol:
            return SolutionState.from_vector(x, dm, t_new), it
        if it == settings.max_iters:
            break
        cache_key = (id(ws), hash(dofs.tobytes()))
        delta = solve_sparse(constrained.matrix, constrained.rhs, cache_key=cache_key)
        if not np.all(np.isfinite(delta)):
            raise StepFailureError(
                f"linear solve produced non-finite update at t={t_new}",
                history=[history],
            )
        x = x + delta

    raise StepFailureError(
        f"Newton did not converge in {settings.max_iters} iterations at "
        f"t={t_new} (residuals {history[0]:.3e} -> {history[-1]:.3e})",
        history=[history],
    )


@dataclass
class MarchResult:
    states: list
    newton_iters: list


def march(
    scenario,
    n_steps: int,
    settings: NewtonSettings | None = None,
    on_step=None,
    system_monitor=None,
) -> MarchResult:
    """Backward-Euler time marching from the scenario's initial state.

    on_step(i, state) is called after each converged step. The returned
    states list starts with the initial state (so it has n_steps+1 entries).
    """
    dm = get_workspace(scenario.mesh).dofmap
    state = scenario.initial_state(dm)
    states = [state]
    iters = []
    for i in range(1, n_steps + 1):
        t_new = i * scenario.dt
        guess = None
        if len(states) >= 2:
            # linear extrapolation over the uniform step grid
            x = 2.0 * states[-1].as_vector() - states[-2].as_vector()
            guess = SolutionState.from_vector(x, dm, t_new)
        state, its = solve_time_step(
            scenario, state, t_new, settings, system_monitor, initial_guess=guess
        )
        states.append(state)
        iters.append(its)
        if on_step is not None:
            on_step(i, state)
    return MarchResult(states=states, newton_iters=iters)
