"""Arithmetic tracers for the predecessor and greater-than lower-bound recursions.

Both tracers are pure arithmetic on real parameters.  Passing
:class:`fractions.Fraction` values keeps every rational step exact; the
logarithms that define the default predecessor parameters are floats.

In the predecessor recursion, ``eps`` is a strict upper bound on the error
("error less than eps"), so reaching exactly 1/2 after t steps still yields
a zero-round protocol erring with probability below 1/2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Any

LN2 = math.log(2)
C1 = 2 * LN2 * 36


def _num(v) -> Any:
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


@dataclass(frozen=True)
class TraceRow:
    i: int
    p: Any
    log2_p: float
    log2_q: float
    eps: Any
    side_ok: bool

    def to_json(self) -> dict:
        return {k: _num(v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class PredTrace:
    params: dict
    rows: tuple
    side_condition: bool
    verdict: str
    reasons: tuple
    notes: tuple = ()
    integral_rows: tuple | None = None

    def to_json(self) -> dict:
        out = {"params": {k: _num(v) for k, v in self.params.items()},
               "rows": [r.to_json() for r in self.rows],
               "side_condition": self.side_condition,
               "verdict": self.verdict,
               "reasons": list(self.reasons),
               "notes": list(self.notes)}
        if self.integral_rows is not None:
            out["integral_rows"] = [r.to_json() for r in self.integral_rows]
            out["integral_divergence"] = {
                "log2_p": self.rows[-1].log2_p - self.integral_rows[-1].log2_p,
                "log2_q": self.rows[-1].log2_q - self.integral_rows[-1].log2_q,
            }
        return out


NOT_REACHED = "asymptotic regime not reached"
CERTIFIED = "contradiction certificate"
NO_CERTIFICATE = "no certificate"


def pred_params(m: int | None = None, c2=1, c3=1, loglog_m: float | None = None) -> dict:
    """Parameters of the predecessor recursion for universe size m.

    ``loglog_m`` (log2 log2 m) may be given instead of m for universes too
    large to write down.
    """
    if loglog_m is None:
        if m is None or m < 4:
            raise ValueError("need m >= 4 or loglog_m")
        loglog_m = math.log2(math.log2(m))
    if loglog_m <= 1:
        raise ValueError("log log log m must be positive")
    lll = math.log2(loglog_m)
    log_n = loglog_m ** 2 / lll
    return {"log_m": _pow2(loglog_m), "log2_log_m": loglog_m, "log2_n": log_n, "c1": C1, "c2": c2, "c3": c3,
            "a": c2 * log_n, "log2_b": c3 * loglog_m,
            "t": loglog_m / ((C1 + c2 + c3) * lll)}


def _pow2(e: float):
    """2**e, or None once it leaves double range."""
    return 2.0 ** e if e < 1000 else None


def _log2(v) -> float:
    return math.log2(v) if v > 0 else -math.inf


def pred_lb_trace(m: int | None = None, c2=1, c3=1, *, loglog_m: float | None = None,
                  p0=None, log2_q0: float | None = None, a=None, log2_b: float | None = None,
                  t=None, c1=None, integral: bool = False) -> PredTrace:
    """Iterate p <- p/(2 c1 a t^2), q <- q/(c1 b t^2), eps <- eps + 2/(12 t).

    Keyword overrides replace the parameters derived from m, which is how
    synthetic runs are traced.  ``q`` and ``b`` are carried as base-2 logs
    because n is astronomically large in the regime the recursion targets.
    """
    if m is None and loglog_m is None:
        base = {"log_m": p0, "log2_n": log2_q0 if log2_q0 is not None else 0.0,
                "c1": C1, "c2": c2, "c3": c3, "a": a, "log2_b": log2_b or 0.0, "t": t}
    else:
        base = pred_params(m, c2, c3, loglog_m)
    overrides = {"log_m": p0, "log2_n": log2_q0, "a": a, "log2_b": log2_b, "t": t, "c1": c1}
    params = {**base, **{k: v for k, v in overrides.items() if v is not None}}
    if params.get("log2_log_m") is None or p0 is not None:
        if params["log_m"] is None:
            raise ValueError("p0, a and t are required without m")
        params["log2_log_m"] = _log2(params["log_m"])
    if any(params[k] is None for k in ("a", "t")):
        raise ValueError("p0, a and t are required without m")
    rows = _recursion(params, floor=False)
    T = params["t"]
    reasons, notes = [], []
    if T < 1:
        verdict = NOT_REACHED
        reasons.append(f"t = {float(T):.6g} < 1")
        side = False
    else:
        side = _side_condition(params)
        last = rows[-1]
        if not side:
            reasons.append("log m / (2 c1 a t^2)^t < log(c1 b t^2) + 1")
        if last.eps > Fraction(1, 2):
            reasons.append("final error bound exceeds 1/2")
        if last.log2_p < 0 or last.log2_q < 0:
            reasons.append("final domain is trivial (p or q below 1)")
        if math.floor(T) != T:
            notes.append(f"t = {float(T):.6g} is not integral; the certificate covers "
                         f"{2 * math.floor(T)}-round protocols")
        verdict = NO_CERTIFICATE if reasons else CERTIFIED
    integral_rows = tuple(_recursion(params, floor=True)) if integral else None
    return PredTrace(params, tuple(rows), side, verdict, tuple(reasons), tuple(notes),
                     integral_rows)


def _recursion(params: dict, floor: bool) -> list:
    c1, a, T = params["c1"], params["a"], params["t"]
    log2_b = params["log2_b"]
    p, log2_p, log2_q = params["log_m"], params["log2_log_m"], params["log2_n"]
    exact = p is not None and all(isinstance(v, (int, Fraction)) for v in (p, a, T, c1))
    if exact:
        p, a, T, c1 = Fraction(p), Fraction(a), Fraction(T), Fraction(c1)
        step = Fraction(2) / (12 * T)
        eps = Fraction(1, 3)
    else:
        step = 2 / (12 * T)
        eps = 1 / 3
    p_div = 2 * c1 * a * T * T
    log2_p_div = _log2(float(p_div))
    log2_q_div = _log2(float(c1 * T * T)) + log2_b
    threshold = log2_q_div + 1
    rows = [TraceRow(0, p, log2_p, float(log2_q), eps, log2_p >= _log2(threshold))]
    steps = math.floor(T) if T >= 1 else 0
    for i in range(1, steps + 1):
        if exact:
            p = p / p_div
            log2_p = _log2(p)
        else:
            log2_p -= log2_p_div
            p = _pow2(log2_p)
        log2_q = log2_q - log2_q_div
        if floor:
            if p is not None:
                p = math.floor(p)
                log2_p = _log2(p)
            log2_q = float(math.floor(log2_q))
        eps = eps + step
        ok = log2_p >= _log2(threshold) and log2_q >= 0
        rows.append(TraceRow(i, p, log2_p, float(log2_q), eps, ok))
    return rows


def _side_condition(params: dict) -> bool:
    c1, a, T = params["c1"], params["a"], params["t"]
    lhs = params["log2_log_m"] - float(T) * math.log2(float(2 * c1 * a * T * T))
    rhs = _log2(math.log2(float(c1 * T * T)) + params["log2_b"] + 1)
    return lhs >= rhs


@dataclass(frozen=True)
class GtTrace:
    n: Any
    t: Any
    c: Any
    k: float
    increment: float
    final_error: float
    feasible: bool
    implied_bound: float | None
    stages: tuple

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else _num(v)) for k, v in asdict(self).items()}


def gt_lb_trace(n, t, c) -> GtTrace:
    """Stage-by-stage error of the greater-than argument with k = (2 ln2)(3t)^2 c.

    Each stage costs 0.5 * sqrt(2 c ln2 / k), which is 1/(6t) whatever c is,
    so t stages take the error from 1/3 to 1/2.  When n >= k^t the argument
    applies and certifies c >= n^(1/t) / ((2 ln2)(3t)^2).
    """
    if n < 1 or t < 1 or c < 1:
        raise ValueError("n, t and c must be at least 1")
    k = 2 * LN2 * (3 * t) ** 2 * c
    inc = 0.5 * math.sqrt(2 * c * LN2 / k)
    stages = tuple(1 / 3 + j * inc for j in range(int(t) + 1))
    feasible = math.log(n) >= t * math.log(k)
    bound = n ** (1 / t) / (2 * LN2 * (3 * t) ** 2) if feasible else None
    return GtTrace(n, t, c, k, inc, stages[-1], feasible, bound, stages)
