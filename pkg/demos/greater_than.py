"""
Greater-than with few rounds
============================

The fingerprint protocol splits x into k blocks, Alice hashes every prefix
ending at a block boundary and Bob names the first block where the hashes
disagree.  After t' levels the segment is a single bit.  It uses about
n^(1/t') log n bits, and the matching lower-bound argument rules out much
less.
"""

import numpy as np

from cclab import games, tracers

rng = np.random.default_rng(3)

for n, rounds in ((16, 1), (16, 2), (64, 2), (64, 3), (256, 4)):
    fp = games.FingerprintProtocol(n, rounds)
    pairs = games.gt_test_pairs(rng, n, 30)
    worst = max(fp.monte_carlo(pairs, 2000, rng).values())
    print(f"n={n:3d} t'={rounds}: k={fp.k}, s={fp.s}, schema {fp.schema}, "
          f"{fp.total_bits} bits (C = {fp.constant:.3f}), sampled max error {worst:.3f}")

# Exact error, summed over every coin, for a small case.
fp = games.FingerprintProtocol(4, 1)
profile = fp.exact_profile()
x, y = max(profile, key=profile.get)
print(f"n=4, t'=1: worst pair {x} vs {y} errs with probability {profile[(x, y)]}")

# The lower-bound stages: each costs 1/(6t), so t stages move 1/3 to 1/2.
for n, t, c in ((64, 1, 1), (2 ** 20, 2, 1), (2 ** 20, 2, 30)):
    tr = tracers.gt_lb_trace(n, t, c)
    stages = ", ".join(f"{e:.3f}" for e in tr.stages)
    verdict = (f"so c >= {tr.implied_bound:.3f}" if tr.feasible
               else "n < k^t, the argument does not apply")
    print(f"n={n}, t={t}, c={c}: errors {stages}; {verdict}")
