import math

import pytest

from becgrowth.oracles import (bisect_root, lower_gamma_quadrature, retherm_quadrature_ratio)
from becgrowth.validation import HEADER, SUITES, Check, run_suites, suite_bessel


def test_bisect_root():
    assert bisect_root(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError):
        bisect_root(lambda x: x * x + 1, 0.0, 1.0)


def test_lower_gamma_quadrature_integer_order():
    assert lower_gamma_quadrature(1, 2.0) == pytest.approx(1 - math.exp(-2.0), rel=1e-13)


def test_retherm_quadrature_limits():
    # without a cut the mean energy per atom is 3kT, so nothing changes
    assert retherm_quadrature_ratio(60.0) == pytest.approx(1.0, rel=1e-10)


def test_suite_rows_shape():
    rows = suite_bessel()
    assert all(isinstance(c, Check) and len(c.row()) == len(HEADER) for c in rows)
    assert all(c.passed for c in rows)


def test_run_suites_selection():
    checks = run_suites(["retherm", "detailed-balance"])
    assert {c.suite for c in checks} == {"retherm", "detailed-balance"}
    with pytest.raises(KeyError):
        run_suites(["bogus"])
    assert "all" not in SUITES
