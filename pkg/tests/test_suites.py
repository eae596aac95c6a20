from __future__ import annotations

import numpy as np
import pytest

from grassflow.reductions import Geometry
from grassflow.suites import (
    SUITES,
    measure_gradients,
    measure_identities,
    measure_integrable_limit,
    random_spin_field,
    run_suite,
)


def test_registry_names():
    assert sorted(SUITES) == [
        "conservation",
        "curvature",
        "curve",
        "gauge-compare",
        "gradients",
        "identities",
        "integrable-limit",
        "reductions",
    ]


def test_run_suite_rejects_unknown_name():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("bogus")


def test_check_rows_carry_verdicts():
    out = run_suite("integrable-limit", fields_per_size=2, points=64)
    assert out["suite"] == "integrable-limit"
    assert out["pass"] is True
    for check in out["checks"]:
        assert set(check) == {"name", "residual", "tolerance", "pass"}
        assert check["residual"] <= check["tolerance"]


def test_identity_suite_smoke():
    checks = measure_identities(states_per_family=3, base_points=64, tol=1e-4,
                                check_refinement=False)
    assert all(c["pass"] for c in checks), checks


def test_gradient_suite_smoke():
    checks = measure_gradients(states_per_family=2)
    names = [c["name"] for c in checks]
    assert any("quartic_identity" in n for n in names)
    assert all(c["pass"] for c in checks), checks


def test_failure_is_reported_not_raised():
    out = run_suite("integrable-limit", fields_per_size=1, points=64, tol=1e-30)
    assert out["pass"] is False
    assert any(not c["pass"] for c in out["checks"])


def test_random_spin_field_lands_on_quadrics():
    from grassflow.fields import Grid
    from grassflow.reductions import quadric_defect

    grid = Grid(64, 2.0 * np.pi)
    for g in Geometry:
        sf = random_spin_field(g, grid, seed=3)
        assert quadric_defect(g, sf.s) < 1e-12
        if g is Geometry.HYPERBOLIC:
            assert np.all(sf.s[:, 2] > 0)
