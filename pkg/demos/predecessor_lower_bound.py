"""
Tracing the predecessor lower-bound recursion
=============================================

Each round elimination divides the query length p by 2 c1 a t^2 and the set
size q by c1 b t^2, and raises the error by 1/(6t).  The argument only bites
when t >= 1, which needs log log m in the hundreds.
"""

from fractions import Fraction

from cclab import tracers

for m in (2 ** 16, 2 ** 64):
    tr = tracers.pred_lb_trace(m)
    print(f"m = 2^{m.bit_length() - 1}: t = {tr.params['t']:.4f} -> {tr.verdict}")

for loglog in (200, 600, 1100, 4000):
    tr = tracers.pred_lb_trace(loglog_m=loglog)
    last = tr.rows[-1]
    print(f"log log m = {loglog}: t = {tr.params['t']:.3f}, final log2 p = {last.log2_p:.1f}, "
          f"log2 q = {last.log2_q:.1f}, eps = {float(last.eps):.3f} -> {tr.verdict}")
    for note in tr.notes:
        print("   note:", note)

# With integer inputs every step stays exact.
tr = tracers.pred_lb_trace(p0=4096, a=1, t=2, c1=2, log2_q0=30, log2_b=1)
for r in tr.rows:
    print(f"  step {r.i}: p = {r.p}, log2 q = {r.log2_q}, eps = {r.eps}")
assert tr.rows[-1].eps == Fraction(1, 2)

# Flooring after every step drifts from the real-valued run.
tr = tracers.pred_lb_trace(p0=10 ** 6, a=3, t=3, c1=1.7, log2_q0=50.5, log2_b=2.2,
                           integral=True)
print("integral divergence:", tr.to_json()["integral_divergence"])
