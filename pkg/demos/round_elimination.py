"""
Removing rounds from a protocol
===============================

Round reduction turns an Alice-first protocol into a deterministic one with
one round fewer, paying 0.5 * sqrt(2 ln2 * I) in average error, where I is
what the first message reveals about Alice's input.  Round elimination
hides the real input among n copies so that I shrinks to l1/n.
"""

import numpy as np

from cclab import elim, proto
from cclab.proto import A, DetProtocol, Game, Schema

rng = np.random.default_rng(1)

# Equality on one bit.  Alice just sends her bit, so the protocol never errs
# but the message reveals everything.
eq = Game.from_function("01", "01", lambda x, y: int(x == y))
sends = DetProtocol(Schema(A, (1,)), (lambda x, tr: x,), lambda y, tr: int(tr[0] == y))
red = elim.round_reduce(sends, eq, eq.uniform())
print(f"equality, 1 round -> {red.q.schema}: error {red.input_error} -> {red.output_error}, "
      f"information {red.information:.2f}, bound {red.bound:.4f}")

# A random private-coin protocol with a 2-bit opening message.
g = proto.random_game(rng, 6, 6)
d = proto.random_fraction_dist(rng, g.pairs(), 36)
p = proto.random_private_protocol(rng, g, Schema(A, (2, 1, 2)), 16, 2)
red = elim.round_reduce(p, g, d)
print(f"random [3; 2, 1, 2]^A -> {red.q.schema}: error {float(red.input_error):.3f} -> "
      f"{float(red.output_error):.3f} (bound {red.bound:.3f}, I = {red.information:.3f})")

# Lift a 3x3 game to 3 copies and eliminate the first round.  Each restricted
# protocol (index i, known prefix) is reduced, and the best one is kept.
g = proto.random_game(rng, 3, 3)
d = proto.random_fraction_dist(rng, g.pairs(), 24)
lifted = elim.random_lifted_protocol(rng, g, 3, t=3, l1=2)
rep = elim.eliminate_round(lifted, g, d, 3)
print(f"lifted protocol {lifted.schema}: worst-case error {float(rep.delta):.3f}")
print(f"  I(X:M) under D* = {rep.lifted_information:.3f}, "
      f"average per restriction = {rep.expected_information:.3f}")
for c in rep.candidates[:5]:
    print(f"  i={c.i} prefix={c.prefix}: info {c.information:.3f}, "
          f"error {float(c.input_error):.3f} -> {float(c.error):.3f}")
print(f"  chosen i={rep.chosen.i}, error {float(rep.achieved_error):.3f} "
      f"<= {rep.bound:.3f}; new schema {rep.protocol.schema}")

# The price per elimination falls like 1/sqrt(n).
for n in (1, 2, 8, 32, 128):
    print(f"  l1=2, n={n:4d}: additive {elim.elimination_bound(2, n):.5f}")
