import csv
import io
import json
import math

import numpy as np
import pytest

from matreg.convergence import (
    Thresholds,
    auto_sizes,
    counting_checks,
    fit_loglog,
    gamma_commutator_scaling,
    independence_check,
    remainder_scaling,
    run_convergence,
    s4_default_order,
)
from matreg.matrixify import CapacityError, build_matrix_set


@pytest.mark.parametrize("slope", [-2.0, -0.5, 1.0])
def test_fit_loglog_recovers_power_laws(slope):
    x = [2, 4, 8, 16]
    fit = fit_loglog(x, [3.0 * v**slope for v in x])
    assert fit["slope"] == pytest.approx(slope)
    assert fit["residual"] == pytest.approx(0.0, abs=1e-12)


def test_fit_loglog_edge_cases():
    with pytest.raises(ValueError):
        fit_loglog([1, 2], [1, 2])
    assert fit_loglog([1, 2, 3], [1.0, 0.0, 1.0])["slope"] is None


@pytest.mark.parametrize("manifold,cutoff,expected", [("s2", 4, [4, 8, 16]), ("s4", 2, [3, 6, 12]), ("s3", 3, [7, 14, 28])])
def test_auto_sizes(manifold, cutoff, expected):
    assert auto_sizes(manifold, cutoff) == expected


def test_counting_rows_match():
    rows = counting_checks(range(1, 7))
    assert all(r["match"] for r in rows)
    assert {r["d"] for r in rows} == {2, 3, 4}


def test_s2_exact_at_cutoff_three():
    rep = run_convergence("s2", 3, [3, 5, 9])
    assert all(rep.checks.values())
    assert rep.checks["exact"]
    assert rep.dims == [3, 5, 9]


def test_s2_cutoff_four_converges():
    rep = run_convergence("s2", 4, [4, 8, 16])
    assert rep.checks["coordinate_exact"] and rep.checks["strictly_decreasing"]
    assert rep.slopes["max_deviation"]["slope"] <= -0.8
    assert not rep.checks["exact"]


def test_report_serialization():
    rep = run_convergence("s3", 2, [3, 6, 12])
    data = json.loads(rep.dumps())
    assert data["manifold"] == "s3" and data["checks"]["coordinate_exact"]
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert len(rows) >= 4
    assert "\r\n" in rep.to_csv()


def test_run_convergence_validation():
    with pytest.raises(ValueError):
        run_convergence("s2", 3, [8, 4, 16])
    with pytest.raises(CapacityError):
        run_convergence("s2", 4, [2, 4, 8])


def test_thresholds_are_honored():
    rep = run_convergence("s2", 4, [4, 8, 16], thresholds=Thresholds(slope=-5.0))
    assert not rep.checks["slope_ok"]


def test_independence_of_small_s4_stack():
    min_sv, rank = independence_check(build_matrix_set("s4", 2, 3))
    assert rank == 6 and min_sv > 1e-8


def test_remainder_scaling_reports_closed_form_agreement():
    rem = remainder_scaling("s2", [2, 3, 4])
    assert rem.evaluated_on == "s2xs2"
    assert all(r["closed_form_error"] <= 1e-10 for r in rem.rows)
    assert all(math.isfinite(r["ratio"]) for r in rem.rows)
    with pytest.raises(ValueError):
        remainder_scaling("s3", [2, 3, 4])


def test_s4_default_order_is_nontrivial():
    order = s4_default_order(4)
    assert sorted(order) == list(range(5))


def test_gamma_commutators_shrink():
    out = gamma_commutator_scaling([4, 8, 16])
    assert np.all(np.diff(out["norms"]) < 0)
    assert out["slope"] <= -0.8
