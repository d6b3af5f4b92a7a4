"""CLI commands end to end on miniature cases."""

import os

import numpy as np
import pytest

from biphasic.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main
from biphasic.mesh import read_mesh
from biphasic.scenario import SimulationConfig, save_config


def write_tiny_config(path, **overrides):
    """A miniature quarter-cylinder run: 2 steps, few hundred dofs."""
    cfg = SimulationConfig(
        nr=2,
        nc=6,
        nz=4,
        dt_s=16.0,
        rate_mm_per_s=2.5e-3,
        target_strain=0.01,
        output_dir=str(path.parent / "out"),
        **overrides,
    )
    save_config(cfg, path)
    return cfg


def test_mesh_command_box_counts(tmp_path, capsys):
    out = tmp_path / "box.mesh"
    rc = main(
        ["mesh", "--shape", "box", "--lx", "1", "--ly", "1", "--lz", "1",
         "--subdivisions", "1,1,1", "--out", str(out)]
    )
    assert rc == EXIT_OK
    printed = capsys.readouterr().out
    assert "nodes 27" in printed
    assert "elements 6" in printed
    mesh = read_mesh(out)
    assert mesh.n_nodes == 27


def test_mesh_command_quarter_cylinder_ref_line(tmp_path, capsys):
    out = tmp_path / "qc.mesh"
    rc = main(
        ["mesh", "--shape", "quarter_cylinder", "--radius", "18", "--height", "8",
         "--subdivisions", "2,6,3", "--out", str(out)]
    )
    assert rc == EXIT_OK
    printed = capsys.readouterr().out
    assert "ref_line_elements 3" in printed


def test_mesh_command_preset_counts(tmp_path, capsys):
    # resolution preset 1 targets the ~8k-node reference mesh with 5
    # elements on the reference line; counts are regression-pinned
    out = tmp_path / "m1.mesh"
    rc = main(["mesh", "--preset", "1", "--out", str(out)])
    assert rc == EXIT_OK
    printed = capsys.readouterr().out
    assert "nodes 8855" in printed
    assert "elements 5670" in printed
    assert "ref_line_elements 5" in printed


def test_mesh_command_requires_shape(tmp_path, capsys):
    rc = main(["mesh", "--out", str(tmp_path / "x.mesh")])
    assert rc == EXIT_CONFIG
    assert "shape" in capsys.readouterr().err


def test_solve_command_bad_config_path(tmp_path, capsys):
    rc = main(["solve", "--config", str(tmp_path / "missing.cfg")])
    assert rc != EXIT_OK
    assert capsys.readouterr().err


def test_solve_command_invalid_override(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    write_tiny_config(cfg_path)
    rc = main(["solve", "--config", str(cfg_path), "--set", "bogus.key=1"])
    assert rc == EXIT_CONFIG


@pytest.mark.slow
def test_solve_command_end_to_end(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg = write_tiny_config(cfg_path)
    rc = main(["solve", "--config", str(cfg_path)])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "steps 2" in out
    od = cfg.output_dir
    for name in ("profile.csv", "profile.png", "summary.txt", "step_0.vtk", "step_2.vtk"):
        assert os.path.exists(os.path.join(od, name)), name
    summary = open(os.path.join(od, "summary.txt")).read()
    assert "gls_enabled" in summary
    assert "tau_min_mpa" in summary


@pytest.mark.slow
def test_sweep_command_small(tmp_path, capsys):
    cfg_path = tmp_path / "base.cfg"
    write_tiny_config(cfg_path)
    out_dir = tmp_path / "sweep"
    rc = main(
        ["sweep", "--config", str(cfg_path), "--axis", "permeability",
         "--values", "1e-2,1e-3", "--out", str(out_dir)]
    )
    assert rc == EXIT_OK
    csv_path = out_dir / "sweep.csv"
    assert csv_path.exists()
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("axis_value,gls,overshoot_pct,undershoot_pct,peak_pressure_mpa,newton_iters_total")
    assert len(lines) == 1 + 4  # two values x {off, on}
    assert (out_dir / "sweep.png").exists()
    # peak pressure rises as permeability decreases, per row data
    rows = [ln.split(",") for ln in lines[1:]]
    peaks = {(r[0], r[1]): float(r[4]) for r in rows}
    assert peaks[("0.001", "off")] > peaks[("0.01", "off")]


def test_sweep_command_empty_values(tmp_path, capsys):
    cfg_path = tmp_path / "base.cfg"
    write_tiny_config(cfg_path)
    rc = main(
        ["sweep", "--config", str(cfg_path), "--axis", "permeability",
         "--values", ",", "--out", str(tmp_path / "o")]
    )
    assert rc == EXIT_CONFIG


def test_verify_command_quick(capsys):
    rc = main(["verify", "--skip-slow"])
    printed = capsys.readouterr().out
    assert rc == EXIT_OK
    assert "PASS" in printed
    assert "FAIL" not in printed


def test_verify_exit_code_on_failure(monkeypatch, capsys):
    import biphasic.verification as ver

    def broken():
        return ver.CheckResult("fd_stress", False, 1.0, 1e-5)

    monkeypatch.setattr(ver, "check_fd_stress", broken)
    rc = main(["verify", "--skip-slow"])
    assert rc == EXIT_VERIFY
    assert "FAIL" in capsys.readouterr().out
