"""Field extraction, oscillation quantification, and file emission.

The oscillation metric quantifies pressure discrepancies relative to the
plateau at mid-thickness of the domain (the fluid-pressurized core):
overshoot is measured against the whole profile's maximum, undershoot
against the minimum over the interior half of the thickness, both as
percentages of the plateau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExtractionError, MetricError
from .mesh import Mesh
from .solver import DofMap, SolutionState


@dataclass(frozen=True)
class PressureProfile:
    """Nodal pressures along a reference line at one time level."""

    z: np.ndarray  # axial coordinate, mm, strictly increasing
    p: np.ndarray  # MPa
    time: float = 0.0
    step: int = 0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if z.size != p.size or z.size < 2:
            raise ExtractionError("profile needs >= 2 matched (z, p) pairs")
        if not np.all(np.diff(z) > 0.0):
            raise ExtractionError("profile coordinates must be strictly increasing")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class OscillationReport:
    plateau_pressure: float  # MPa
    overshoot_pct: float
    undershoot_pct: float
    max_deviation_pct: float
    peak_pressure: float  # MPa, max over the profile


def extract_profile(
    mesh: Mesh,
    dofmap: DofMap,
    state: SolutionState,
    line_nodes,
    axis: int = 2,
) -> PressureProfile:
    """Nodal pressures at the given (corner) nodes, in axial order."""
    nodes = np.asarray(line_nodes, dtype=np.int64)
    if nodes.size == 0:
        raise ExtractionError("empty node list")
    pdofs = dofmap.pdof_of_node[nodes]
    if np.any(pdofs < 0):
        bad = int(nodes[np.argmax(pdofs < 0)])
        raise ExtractionError(
            f"node {bad} carries no pressure dof (midside node); "
            "filter the line to corner nodes first"
        )
    z = mesh.coords[nodes, axis]
    order = np.argsort(z, kind="stable")
    return PressureProfile(
        z=z[order], p=state.p[pdofs[order] - dofmap.n_udofs], time=state.t
    )


def oscillation_metric(profile: PressureProfile, mid_z: float | None = None) -> OscillationReport:
    """Quantify over/undershoot of a through-thickness pressure profile.

    mid_z is the mid-thickness coordinate defining the plateau node;
    defaults to the midpoint of the profile's coordinate range. The
    undershoot scans the interior half of the thickness (|z - mid_z| <=
    a quarter of the range), which excludes the p = 0 Dirichlet ends.
    """
    if profile.z.size < 5:
        raise MetricError(f"need >= 5 profile nodes, got {profile.z.size}")
    z, p = profile.z, profile.p
    span = z[-1] - z[0]
    if mid_z is None:
        mid_z = 0.5 * (z[0] + z[-1])
    plateau = float(p[np.argmin(np.abs(z - mid_z))])
    if plateau <= 0.0:
        raise MetricError(f"plateau pressure {plateau} <= 0; metric undefined")

    overshoot = 100.0 * max(0.0, float(p.max()) - plateau) / plateau
    interior = np.abs(z - mid_z) <= 0.25 * span
    undershoot = 100.0 * max(0.0, plateau - float(p[interior].min())) / plateau
    return OscillationReport(
        plateau_pressure=plateau,
        overshoot_pct=overshoot,
        undershoot_pct=undershoot,
        max_deviation_pct=max(overshoot, undershoot),
        peak_pressure=float(p.max()),
    )


# ---------------------------------------------------------------------------
# file writers


def _midside_parents(mesh: Mesh) -> np.ndarray:
    """(n_mid, 3) rows of [midside node, corner a, corner b]."""
    from .fem import TET10_EDGES

    seen = {}
    for el in mesh.elements:
        for m, (a, b) in enumerate(TET10_EDGES):
            seen[int(el[4 + m])] = (int(el[a]), int(el[b]))
    return np.array([[mid, a, b] for mid, (a, b) in sorted(seen.items())], dtype=np.int64)


def nodal_pressures(mesh: Mesh, dofmap: DofMap, state: SolutionState) -> np.ndarray:
    """Pressure at every node: corner values, midside = edge-end average."""
    p = np.zeros(mesh.n_nodes)
    p[dofmap.corner_nodes] = state.p
    parents = _midside_parents(mesh)
    p[parents[:, 0]] = 0.5 * (p[parents[:, 1]] + p[parents[:, 2]])
    return p


def seepage_velocity(mesh: Mesh, dofmap: DofMap, state: SolutionState, k: float) -> np.ndarray:
    """Cell-averaged Darcy velocity w = -k grad(p), current configuration."""
    corners = mesh.elements[:, :4]
    x = mesh.coords[corners] + state.u.reshape(-1, 3)[corners]
    pvals = state.p[dofmap.pdof_of_node[corners] - dofmap.n_udofs]
    edges = x[:, 1:] - x[:, :1]  # (n,3,3) rows are edge vectors
    dp = pvals[:, 1:] - pvals[:, :1]
    grad = np.linalg.solve(edges, dp[..., None])[..., 0]
    return -k * grad


def write_vtk(path, mesh: Mesh, dofmap: DofMap, state: SolutionState, k: float) -> None:
    """Legacy ASCII unstructured grid with quadratic tetra cells (type 24).

    Point data: displacement (vector), pressure (scalar, midside values
    interpolated). Cell data: seepage_velocity (vector).
    """
    u = state.u.reshape(-1, 3)
    p = nodal_pressures(mesh, dofmap, state)
    w = seepage_velocity(mesh, dofmap, state, k)
    n, m = mesh.n_nodes, mesh.n_elements
    out = []
    out.append("# vtk DataFile Version 4.2")
    out.append(f"biphasic state t={state.t!r} s")
    out.append("ASCII")
    out.append("DATASET UNSTRUCTURED_GRID")
    out.append(f"POINTS {n} double")
    for x, y, z in mesh.coords:
        out.append(f"{x:.17g} {y:.17g} {z:.17g}")
    out.append(f"CELLS {m} {11 * m}")
    for row in mesh.elements:
        out.append("10 " + " ".join(str(int(v)) for v in row))
    out.append(f"CELL_TYPES {m}")
    out.extend(["24"] * m)
    out.append(f"POINT_DATA {n}")
    out.append("VECTORS displacement double")
    for vx, vy, vz in u:
        out.append(f"{vx:.17g} {vy:.17g} {vz:.17g}")
    out.append("SCALARS pressure double 1")
    out.append("LOOKUP_TABLE default")
    for v in p:
        out.append(f"{v:.17g}")
    out.append(f"CELL_DATA {m}")
    out.append("VECTORS seepage_velocity double")
    for vx, vy, vz in w:
        out.append(f"{vx:.17g} {vy:.17g} {vz:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def write_profile_csv(path, profiles) -> None:
    """All per-step profiles as z_mm,p_mpa,step,time_s rows."""
    lines = ["z_mm,p_mpa,step,time_s"]
    for prof in profiles:
        for z, p in zip(prof.z, prof.p):
            lines.append(f"{z:.17g},{p:.17g},{prof.step},{prof.time:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_profile_csv(path):
    """Inverse of write_profile_csv; returns the list of PressureProfile."""
    import csv

    rows = []
    with open(path) as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(
                (int(row["step"]), float(row["time_s"]), float(row["z_mm"]), float(row["p_mpa"]))
            )
    profiles = []
    for step in sorted({r[0] for r in rows}):
        sel = [r for r in rows if r[0] == step]
        profiles.append(
            PressureProfile(
                z=np.array([r[2] for r in sel]),
                p=np.array([r[3] for r in sel]),
                time=sel[0][1],
                step=step,
            )
        )
    return profiles


def write_summary(path, report: OscillationReport | None, config_items, run_info: dict) -> None:
    """Structured-text run summary: config echo, solver stats, metric."""
    lines = ["biphasic solve summary", "=" * 22, "", "[config]"]
    for key, val in config_items:
        lines.append(f"{key} = {val}")
    lines.append("")
    lines.append("[run]")
    for key, val in run_info.items():
        if isinstance(val, (list, tuple, np.ndarray)):
            val = " ".join(str(v) for v in val)
        lines.append(f"{key} = {val}")
    lines.append("")
    lines.append("[oscillation]")
    if report is None:
        lines.append("status = metric unavailable")
    else:
        lines.append(f"plateau_pressure_mpa = {report.plateau_pressure:.17g}")
        lines.append(f"overshoot_pct = {report.overshoot_pct:.17g}")
        lines.append(f"undershoot_pct = {report.undershoot_pct:.17g}")
        lines.append(f"max_deviation_pct = {report.max_deviation_pct:.17g}")
        lines.append(f"peak_pressure_mpa = {report.peak_pressure:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
