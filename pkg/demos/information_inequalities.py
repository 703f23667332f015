"""
Average encoding, classical and quantum
=======================================

A message that says little about the input cannot look very different
from one input to the next.  This walk-through measures that on a few
small examples and then on random ones.
"""

import math

import numpy as np

from cclab import info, qinfo
from cclab.info import JointDist
from cclab.qinfo import CQEnsemble, DensityMatrix

rng = np.random.default_rng(0)

# A message that copies a uniform bit carries one full bit of information.
copy = JointDist((0, 1), (0, 1), np.eye(2) / 2)
gap = info.average_encoding_gap(copy)
print(f"copied bit: I = {info.mutual_information(copy):.3f}, "
      f"average l1 gap {gap.lhs:.5f} <= {gap.rhs:.5f}")

# A noisy copy: flip the bit with probability eps.
for eps in (0.0, 0.1, 0.3, 0.5):
    m = np.array([[1 - eps, eps], [eps, 1 - eps]]) / 2
    g = info.average_encoding_gap(JointDist((0, 1), (0, 1), m))
    print(f"  flip {eps:.1f}: gap {g.lhs:.4f}, allowed {g.rhs:.4f}")

# The slack on random joints, from tight to loose.
ratios = []
for _ in range(2000):
    j = info.random_joint(rng, 4, 4)
    g = info.average_encoding_gap(j)
    if g.rhs > 1e-9:
        ratios.append(g.lhs / g.rhs)
print(f"random 4x4 joints: lhs/rhs ranges over [{min(ratios):.3f}, {max(ratios):.3f}]")

# The quantum version works with purifications instead of distributions.
pair = CQEnsemble((0, 1), (0.5, 0.5), (DensityMatrix.basis(2, 0), DensityMatrix.basis(2, 1)))
cert = qinfo.q_average_encoding_certificate(pair, [qinfo.purify(s) for s in pair.states])
print(f"orthogonal pure pair: {cert.lhs:.5f} <= {cert.rhs:.5f} = sqrt(4 ln2 * 1)")

# Fidelity is the best overlap of purifications, and the Fuchs-Caves
# measurement turns it into a classical Bhattacharyya coefficient.
rho, sigma = qinfo.random_density(rng, 3), qinfo.random_density(rng, 3)
psi = qinfo.purify(rho)
phi = qinfo.align_purifications(psi, sigma)
m = qinfo.fuchs_caves_measurement(rho, sigma)
print(f"F = {qinfo.fidelity(rho, sigma):.6f}, |<psi|phi>| = {abs(psi.overlap(phi)):.6f}, "
      f"B after measuring = "
      f"{qinfo.bhattacharyya(qinfo.measure(rho, m), qinfo.measure(sigma, m)):.6f}")
print(f"1 - F = {1 - qinfo.fidelity(rho, sigma):.4f} <= "
      f"(ln2/2) S = {math.log(2) / 2 * qinfo.q_relative_entropy(rho, sigma):.4f}")
