import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cclab import tracers
from cclab.tracers import CERTIFIED, NO_CERTIFICATE, NOT_REACHED

LN2 = math.log(2)


@given(st.integers(1, 40), st.integers(1, 10**6), st.integers(1, 50))
def test_error_schedule_is_exact(t, p0, a):
    tr = tracers.pred_lb_trace(p0=p0, a=a, t=t, c1=2)
    assert len(tr.rows) == t + 1
    for row in tr.rows:
        assert row.eps == Fraction(1, 3) + Fraction(2 * row.i, 12 * t)
    assert tr.rows[-1].eps == Fraction(1, 2)


def test_synthetic_run_by_hand():
    tr = tracers.pred_lb_trace(p0=4096, a=1, t=2, c1=2)
    # Divisor 2 * c1 * a * t^2 = 16 per step.
    assert [r.p for r in tr.rows] == [4096, 256, 16]
    assert [r.eps for r in tr.rows] == [Fraction(1, 3), Fraction(5, 12), Fraction(1, 2)]
    assert tr.verdict in (CERTIFIED, NO_CERTIFICATE)


def test_default_parameters():
    params = tracers.pred_params(2 ** 16)
    lll = math.log2(4)
    assert params["log2_log_m"] == pytest.approx(4)
    assert params["log2_n"] == pytest.approx(16 / lll)
    assert params["t"] == pytest.approx(4 / ((2 * LN2 * 36 + 2) * lll))


def test_small_universe_not_reached():
    tr = tracers.pred_lb_trace(2 ** 16)
    assert tr.params["t"] == pytest.approx(0.0385, abs=1e-3)
    assert tr.verdict == NOT_REACHED
    assert tr.reasons


def test_huge_universe_certifies():
    tr = tracers.pred_lb_trace(loglog_m=1100)
    assert tr.params["t"] >= 1
    assert tr.verdict == CERTIFIED
    assert tr.rows[-1].p is None  # far beyond double range, tracked as log2 only
    assert tr.rows[-1].log2_p > 0 and tr.rows[-1].log2_q > 0
    assert tr.notes  # t is not an integer


def test_integral_mode_reports_divergence():
    tr = tracers.pred_lb_trace(p0=1000, a=1, t=3, c1=1.5, log2_q0=40.5, log2_b=2.3,
                               integral=True)
    out = tr.to_json()
    assert "integral_divergence" in out
    assert out["integral_divergence"]["log2_q"] >= 0
    assert all(float(r.p).is_integer() for r in tr.integral_rows[1:])


def test_missing_parameters_rejected():
    with pytest.raises(ValueError):
        tracers.pred_lb_trace(p0=100, a=None, t=None)
    with pytest.raises(ValueError):
        tracers.pred_params(2)


@given(st.floats(1, 1e12), st.integers(1, 12), st.floats(1, 100))
def test_gt_increment_and_bound(n, t, c):
    tr = tracers.gt_lb_trace(n, t, c)
    assert tr.increment == pytest.approx(1 / (6 * t), abs=1e-12)
    assert tr.final_error == pytest.approx(0.5, abs=1e-12)
    if tr.feasible:
        expected = n ** (1 / t) / (2 * LN2 * (3 * t) ** 2)
        assert tr.implied_bound == pytest.approx(expected, abs=1e-9, rel=1e-12)
        assert c <= tr.implied_bound * (1 + 1e-9)
    else:
        assert tr.implied_bound is None


def test_gt_hand_case():
    tr = tracers.gt_lb_trace(64, 1, 1)
    assert tr.k == pytest.approx(18 * LN2)
    assert tr.feasible
    assert tr.implied_bound == pytest.approx(64 / (18 * LN2))
    assert tr.to_json()["stages"] == [pytest.approx(1 / 3), pytest.approx(0.5)]


def test_gt_rejects_bad_parameters():
    with pytest.raises(ValueError):
        tracers.gt_lb_trace(0, 1, 1)
