"""
Predecessor search in the cell probe model
==========================================

Two static structures for S inside [m]: a sorted array searched in
log2(n+1) probes, and an x-fast trie whose binary search over prefix
lengths needs about 2 log2 log2 m probes.  A scheme with t probes is also
a 2t-round protocol in which Alice sends addresses and Bob answers with
cell contents.
"""

import random

from cclab import cellprobe as cp
from cclab import proto

rng = random.Random(2)

S = (3, 17, 18, 40, 41, 200)
m = 256
for kind in ("sorted-array", "xfast"):
    sch = cp.build_predecessor_scheme(kind, m, len(S), seed=0)
    table = sch.storage(S)
    res = cp.run_query(sch, S, 39, table)
    print(f"{kind}: s={sch.s} (this set uses {table.s}), w={sch.w}, t={sch.t}; "
          f"pred(39) = {res.answer} in {res.probes_used} probes")
    print(cp.trace_csv([(39, res)]))

# Probe counts grow with log n for the array and log log m for the trie.
for m in (2 ** 4, 2 ** 8, 2 ** 16):
    n = 8
    row = []
    for kind in ("sorted-array", "xfast"):
        sch = cp.build_predecessor_scheme(kind, m, n, seed=0)
        queries = [rng.randrange(m) for _ in range(300)]
        rep = cp.verify_scheme(sch, cp.random_sets(rng, m, n, 10), queries)
        row.append(f"{kind} {rep.max_probes} probes (error {rep.max_error})")
    print(f"m = {m:6d}: " + ", ".join(row))

# Two FKS probes give the rank, so predecessor plus rank gives rank parity.
par = cp.pred_to_rankparity(cp.xfast_scheme(64, 4), cp.fks_rank_scheme(64, 4))
S = (5, 9, 33, 60)
print("rank parity:", [cp.run_query(par, S, x).answer for x in (4, 5, 10, 40, 63)])

# The scheme as a protocol, checked on every 2-element subset of [16].
sch = cp.sorted_array_scheme(16, 2)
p = cp.scheme_to_protocol(sch)
g = cp.scheme_game(sch, cp.all_sets(16, 2))
print(f"protocol schema {p.schema}, worst-case error "
      f"{proto.distributional_error(p, g, worst_case=True)}")
