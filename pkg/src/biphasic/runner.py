"""End-to-end run orchestration shared by the CLI and the test suite.

A run builds the mesh, the unconfined-compression scenario and marches
it, collecting the reference-line pressure profile after every step.
Writers then emit the standard output layout into the run directory:
step_<i>.vtk, profile.csv, profile.png, summary.txt.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import figures, postprocess
from .errors import QueryError
from .mesh import Mesh, reference_line_nodes
from .scenario import (
    SimulationConfig,
    Scenario,
    build_mesh_from_config,
    n_steps_from_config,
    parse_profile_line,
    scenario_from_config,
)
from .solver import NewtonSettings, march
from .fem import tau_gls


@dataclass
class RunResult:
    config: SimulationConfig
    mesh: Mesh
    scenario: Scenario
    states: list
    profiles: list  # per-step PressureProfile, steps 1..n
    report: postprocess.OscillationReport | None
    newton_iters: list
    tau_min: float
    tau_max: float

    @property
    def final_profile(self):
        return self.profiles[-1]


def line_corner_nodes(mesh: Mesh, dofmap, point, direction, tol: float = 1e-6):
    """Reference-line nodes filtered to pressure-carrying corner nodes."""
    nodes = reference_line_nodes(mesh, point, direction, tol)
    corner = nodes[np.isin(nodes, dofmap.corner_nodes)]
    if corner.size < 2:
        raise QueryError("reference line hits fewer than 2 corner nodes")
    return corner


def run_simulation(
    config: SimulationConfig,
    mesh: Mesh | None = None,
    settings: NewtonSettings | None = None,
    system_monitor=None,
) -> RunResult:
    """March the configured unconfined-compression case to target strain."""
    config.validate()
    if mesh is None:
        mesh = build_mesh_from_config(config)
    sc = scenario_from_config(config, mesh)
    height = float(mesh.coords[:, 2].max() - mesh.coords[:, 2].min())
    n_steps = n_steps_from_config(config, height)

    point, direction = parse_profile_line(config.profile_line, config)
    line = line_corner_nodes(mesh, sc.dofmap, point, direction)

    profiles = []

    def on_step(i, state):
        prof = postprocess.extract_profile(mesh, sc.dofmap, state, line)
        profiles.append(
            postprocess.PressureProfile(z=prof.z, p=prof.p, time=state.t, step=i)
        )

    result = march(sc, n_steps, settings=settings, on_step=on_step,
                   system_monitor=system_monitor)

    from .solver import get_workspace

    h = get_workspace(mesh).h
    tau_all = h * h / (4.0 * config.permeability * config.dt_s)
    try:
        report = postprocess.oscillation_metric(profiles[-1])
    except Exception:
        report = None
    return RunResult(
        config=config,
        mesh=mesh,
        scenario=sc,
        states=result.states,
        profiles=profiles,
        report=report,
        newton_iters=result.newton_iters,
        tau_min=float(tau_all.min()),
        tau_max=float(tau_all.max()),
    )


def write_run_outputs(result: RunResult, out_dir) -> None:
    """Emit the standard files: VTK snapshots, profile CSV+figure, summary."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    every = cfg.vtk_every
    if every > 0:
        for i, state in enumerate(result.states):
            if i == 0 or i % every == 0 or i == len(result.states) - 1:
                postprocess.write_vtk(
                    os.path.join(out_dir, f"step_{i}.vtk"),
                    result.mesh,
                    result.scenario.dofmap,
                    state,
                    cfg.permeability,
                )
    postprocess.write_profile_csv(os.path.join(out_dir, "profile.csv"), result.profiles)
    figures.render_profile_figure(
        os.path.join(out_dir, "profile.png"),
        result.profiles,
        title=f"reference-line pressure (gls {'on' if cfg.gls_enabled else 'off'})",
    )
    run_info = {
        "steps": len(result.newton_iters),
        "newton_iters": result.newton_iters,
        "gls_enabled": "true" if cfg.gls_enabled else "false",
        "tau_min_mpa": f"{result.tau_min:.17g}",
        "tau_max_mpa": f"{result.tau_max:.17g}",
        "nodes": result.mesh.n_nodes,
        "elements": result.mesh.n_elements,
    }
    postprocess.write_summary(
        os.path.join(out_dir, "summary.txt"),
        result.report,
        cfg.to_items(),
        run_info,
    )
