"""The verify-command check battery, including fault injection."""

import numpy as np
import pytest

from biphasic import material as mat
from biphasic import verification as ver


def test_quadrature_check_passes():
    assert ver.check_quadrature().passed


def test_partition_of_unity_check_passes():
    assert ver.check_partition_of_unity().passed


def test_stress_reference_check_passes():
    assert ver.check_stress_reference().passed


def test_fd_checks_pass():
    assert ver.check_fd_stress().passed
    assert ver.check_fd_tangent().passed


def test_fd_check_fails_with_injected_bug():
    def broken_stress(kin, prm):
        sigma = mat.cauchy_stress(kin, prm)
        return sigma + 0.01 * np.eye(3)

    res = ver.check_fd_stress(stress_fn=broken_stress)
    assert not res.passed

    def broken_tangent(kin, prm):
        D = mat.spatial_tangent(kin, prm)
        return 1.05 * D

    assert not ver.check_fd_tangent(tangent_fn=broken_tangent).passed


def test_assembly_check_passes():
    assert ver.check_assembly_equivalence().passed


@pytest.mark.slow
def test_system_symmetry_check_passes():
    res = ver.check_system_symmetry()
    assert res.passed, res.line()


@pytest.mark.slow
def test_terzaghi_check_and_refinement_monotonicity():
    errors = {}
    for refine in (1, 2, 3):
        errs, _ = ver.terzaghi_comparison(depth_elements=8 * 2 ** (refine - 1))
        errors[refine] = max(errs.values())
    # 16 elements meets the 2% band; refinement improves the profile error
    assert errors[2] < 0.02
    assert errors[3] < errors[2] < errors[1]


def test_check_result_line_format():
    line = ver.CheckResult("demo", True, 1.2e-6, 1e-5, detail="note").line()
    assert line.startswith("PASS")
    assert "demo" in line and "note" in line
