"""Command-line interface: mesh, solve, verify, sweep.

Thin shell over the library: each command is one library call plus IO.
stdout carries data, stderr carries diagnostics.

Exit codes:
  0  success
  2  usage or configuration error
  3  solver step failure
  4  IO error
  5  verification check failed
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import BiphasicError, ConfigError, StepFailureError
from . import figures
from .mesh import MeshSpec, generate, reference_line_nodes, write_mesh
from .scenario import (
    MESH_PRESETS,
    SimulationConfig,
    apply_overrides,
    load_config,
    preset_mesh_spec,
    save_config,
)
from .solver import DofMap

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STEP = 3
EXIT_IO = 4
EXIT_VERIFY = 5


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="biphasic",
        description="Finite-strain biphasic FEM solver with GLS pressure stabilization",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    mp = sub.add_parser("mesh", help="generate a mesh file and print its counts")
    mp.add_argument("--shape", choices=["box", "quarter_cylinder"])
    mp.add_argument("--preset", type=int, choices=sorted(MESH_PRESETS),
                    help="quarter-cylinder resolution preset (1-4)")
    mp.add_argument("--radius", type=float, default=18.0, help="mm")
    mp.add_argument("--height", type=float, default=8.0, help="mm")
    mp.add_argument("--lx", type=float, default=1.0, help="mm")
    mp.add_argument("--ly", type=float, default=1.0, help="mm")
    mp.add_argument("--lz", type=float, default=1.0, help="mm")
    mp.add_argument("--subdivisions", type=str, default="",
                    help="comma triple: nx,ny,nz (box) or nr,nc,nz (cylinder)")
    mp.add_argument("--out", required=True, help="output mesh file")

    sp = sub.add_parser("solve", help="run a configured compression case")
    sp.add_argument("--config", required=True)
    sp.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE", help="override a config key")
    sp.add_argument("--out", default="", help="override output.dir")

    vp = sub.add_parser("verify", help="run the self-check battery")
    vp.add_argument("--terzaghi-refine", type=int, default=2,
                    help="column resolution level r -> 8*2^(r-1) elements")
    vp.add_argument("--skip-slow", action="store_true",
                    help="only the instant checks")

    wp = sub.add_parser("sweep", help="parameter sweep, gls on and off per value")
    wp.add_argument("--config", required=True, help="base config")
    wp.add_argument("--axis", required=True,
                    choices=["permeability", "mesh", "dt", "rate", "strain"])
    wp.add_argument("--values", required=True,
                    help="comma-separated values (mesh axis: preset levels 1-4)")
    wp.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE")
    wp.add_argument("--out", default="", help="override output.dir")
    return ap


def cmd_mesh(args) -> int:
    if args.preset is not None:
        spec = preset_mesh_spec(args.preset, radius=args.radius, height=args.height)
    else:
        if not args.shape:
            raise ConfigError("either --shape or --preset is required")
        if not args.subdivisions:
            raise ConfigError("--subdivisions is required without --preset")
        subs = tuple(int(s) for s in args.subdivisions.split(","))
        if len(subs) != 3:
            raise ConfigError("--subdivisions needs exactly three integers")
        if args.shape == "box":
            spec = MeshSpec(shape="box", lx=args.lx, ly=args.ly, lz=args.lz,
                            subdivisions=subs)
        else:
            spec = MeshSpec(shape="quarter_cylinder", radius=args.radius,
                            height=args.height, subdivisions=subs)
    mesh = generate(spec)
    write_mesh(mesh, args.out)

    dm = DofMap.from_mesh(mesh)
    line = reference_line_nodes(mesh, (0.0, 0.0, 0.0), (0.0, 0.0, 1.0), 1e-6)
    corners = line[np.isin(line, dm.corner_nodes)]
    print(f"nodes {mesh.n_nodes}")
    print(f"elements {mesh.n_elements}")
    print(f"ref_line_elements {corners.size - 1}")
    print(f"mesh_file {args.out}")
    return EXIT_OK


def _load_with_overrides(args) -> SimulationConfig:
    cfg = load_config(args.config)
    if args.overrides:
        cfg = apply_overrides(cfg, args.overrides)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def cmd_solve(args) -> int:
    from .runner import run_simulation, write_run_outputs

    cfg = _load_with_overrides(args)
    result = run_simulation(cfg)
    write_run_outputs(result, cfg.output_dir)
    rep = result.report
    print(f"steps {len(result.newton_iters)}")
    print(f"newton_iters_total {int(np.sum(result.newton_iters))}")
    if rep is not None:
        print(f"plateau_pressure_mpa {rep.plateau_pressure:.6g}")
        print(f"peak_pressure_mpa {rep.peak_pressure:.6g}")
        print(f"max_deviation_pct {rep.max_deviation_pct:.4f}")
    print(f"output_dir {cfg.output_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_all_checks

    checks = run_all_checks(
        terzaghi_refine=args.terzaghi_refine, include_slow=not args.skip_slow
    )
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_VERIFY


def _sweep_value_config(cfg: SimulationConfig, axis: str, raw: str) -> SimulationConfig:
    if axis == "permeability":
        return replace(cfg, permeability=float(raw))
    if axis == "dt":
        return replace(cfg, dt_s=float(raw))
    if axis == "rate":
        return replace(cfg, rate_mm_per_s=float(raw))
    if axis == "strain":
        return replace(cfg, target_strain=float(raw))
    if axis == "mesh":
        level = int(raw)
        if level not in MESH_PRESETS:
            raise ConfigError(f"mesh sweep values are preset levels {sorted(MESH_PRESETS)}")
        nr, nc, nz = MESH_PRESETS[level]
        return replace(cfg, mesh_path="", nr=nr, nc=nc, nz=nz)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def cmd_sweep(args) -> int:
    from .runner import run_simulation, write_run_outputs

    base = _load_with_overrides(args)
    raw_values = [v for v in args.values.split(",") if v.strip()]
    if not raw_values:
        raise ConfigError("sweep needs a nonempty --values list")

    out_dir = base.output_dir
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    any_failed = False
    for raw in raw_values:
        for gls in (False, True):
            tag = f"{args.axis}_{raw}_gls_{'on' if gls else 'off'}"
            try:
                cfg = _sweep_value_config(base, args.axis, raw.strip())
                cfg = replace(cfg, gls_enabled=gls,
                              output_dir=os.path.join(out_dir, tag))
                cfg.validate()
                result = run_simulation(cfg)
                write_run_outputs(result, cfg.output_dir)
                rep = result.report
                if rep is None:
                    raise ConfigError(
                        "oscillation metric unavailable (reference line has "
                        "fewer than 5 pressure nodes)"
                    )
                rows.append(
                    {
                        "axis_value": float(raw) if args.axis != "mesh" else int(raw),
                        "gls": "on" if gls else "off",
                        "overshoot_pct": rep.overshoot_pct,
                        "undershoot_pct": rep.undershoot_pct,
                        "peak_pressure_mpa": rep.peak_pressure,
                        "newton_iters_total": int(np.sum(result.newton_iters)),
                        "status": "ok",
                    }
                )
            except BiphasicError as err:
                print(f"sweep case {tag} failed: {err}", file=sys.stderr)
                any_failed = True
                rows.append(
                    {
                        "axis_value": raw,
                        "gls": "on" if gls else "off",
                        "overshoot_pct": float("nan"),
                        "undershoot_pct": float("nan"),
                        "peak_pressure_mpa": float("nan"),
                        "newton_iters_total": 0,
                        "status": f"failed: {err}",
                    }
                )

    csv_path = os.path.join(out_dir, "sweep.csv")
    with open(csv_path, "w") as fh:
        fh.write(
            "axis_value,gls,overshoot_pct,undershoot_pct,peak_pressure_mpa,"
            "newton_iters_total,status\n"
        )
        for r in rows:
            fh.write(
                f"{r['axis_value']},{r['gls']},{r['overshoot_pct']:.17g},"
                f"{r['undershoot_pct']:.17g},{r['peak_pressure_mpa']:.17g},"
                f"{r['newton_iters_total']},{r['status']}\n"
            )
    figures.render_sweep_figure(os.path.join(out_dir, "sweep.png"), rows, args.axis)
    for r in rows:
        print(
            f"{r['axis_value']} gls={r['gls']} "
            f"max_dev={max(r['overshoot_pct'], r['undershoot_pct']):.3f}% "
            f"peak={r['peak_pressure_mpa']:.6g} [{r['status']}]"
        )
    print(f"sweep_csv {csv_path}")
    return EXIT_STEP if any_failed else EXIT_OK


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "mesh":
            return cmd_mesh(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StepFailureError as err:
        print(f"step failure: {err}", file=sys.stderr)
        return EXIT_STEP
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_IO
    except BiphasicError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
