"""Cell probe schemes with exact probe accounting.

A scheme stores its data in a :class:`Table` of ``s`` cells of ``w`` bits and
answers a query with a generator: it yields cell addresses, receives their
contents through ``send`` and finally returns the answer.  The runner counts
every probe, so the declared budget ``t`` is checked on each execution path.

Hash dictionaries follow the two-level FKS layout.  Every lookup costs
exactly two probes, a bucket cell and then a slot cell.  The first-level hash
of each dictionary is drawn from the seed and never depends on the stored
set, so the query program needs nothing but the table; only second-level
parameters are retried per bucket and kept in the bucket cell.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import random
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

from sympy import nextprime

from .info import Dist
from .proto import A, NO_COIN, Game, PrivProtocol, Schema

RETRY_CAP = 1000


class CellProbeError(RuntimeError):
    pass


class ProbeBudgetError(CellProbeError):
    pass


@dataclass(frozen=True)
class Table:
    s: int
    w: int
    cells: tuple

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if len(self.cells) != self.s:
            raise CellProbeError(f"{len(self.cells)} cells for declared s = {self.s}")
        limit = 1 << self.w
        for v in self.cells:
            if not 0 <= v < limit:
                raise CellProbeError(f"cell value {v} does not fit in {self.w} bits")

    def __getitem__(self, address: int) -> int:
        return self.cells[address]

    def with_cell(self, address: int, value: int) -> "Table":
        cells = list(self.cells)
        cells[address] = value
        return Table(self.s, self.w, cells)

    def to_bytes(self) -> bytes:
        width = (self.w + 7) // 8
        body = b"".join(v.to_bytes(width, "little") for v in self.cells)
        return struct.pack("<II", self.s, self.w) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Table":
        s, w = struct.unpack_from("<II", data)
        width = (w + 7) // 8
        if len(data) != 8 + s * width:
            raise CellProbeError("table dump has the wrong length")
        cells = [int.from_bytes(data[8 + i * width: 8 + (i + 1) * width], "little")
                 for i in range(s)]
        return cls(s, w, cells)


@dataclass(frozen=True, eq=False)
class CPScheme:
    """Storage map, adaptive query procedure and the problem it solves.

    ``query(x)`` (or ``query(x, r)`` when ``coins`` is set) returns a
    generator.  ``problem(d, x)`` is the reference answer.
    """

    name: str
    s: int
    w: int
    t: int
    storage: Callable[[Any], Table]
    query: Callable
    problem: Callable[[Any, Any], Any]
    queries: tuple = ()
    coins: Dist | None = None
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class QueryResult:
    answer: Any
    probes_used: int
    trace: tuple


def run_query(sch: CPScheme, d, x, table: Table | None = None, coin=None) -> QueryResult:
    table = sch.storage(d) if table is None else table
    gen = sch.query(x) if sch.coins is None else sch.query(x, coin)
    trace = []
    try:
        address = next(gen)
        while True:
            if not 0 <= address < table.s or address >= sch.s:
                raise CellProbeError(f"address {address} outside table of {table.s} cells")
            if len(trace) == sch.t:
                raise ProbeBudgetError(f"{sch.name} exceeds its budget of {sch.t} probes on {x!r}")
            contents = table[address]
            trace.append((address, contents))
            address = gen.send(contents)
    except StopIteration as stop:
        return QueryResult(stop.value, len(trace), tuple(trace))


def trace_csv(rows: Iterable[tuple[Any, QueryResult]]) -> str:
    """CSV rows (query, probe_index, address, contents_hex) for a batch of runs."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["query", "probe_index", "address", "contents_hex"])
    for x, res in rows:
        for k, (address, contents) in enumerate(res.trace):
            writer.writerow([x, k, address, format(contents, "x")])
    return out.getvalue()


@dataclass(frozen=True)
class VerifyReport:
    max_error: Any
    max_probes: int
    witness: Any
    checked: int
    max_cells: int


def verify_scheme(sch: CPScheme, data: Iterable, queries: Iterable | None = None) -> VerifyReport:
    """Largest error and probe count over every (data, query) pair given.

    Randomized schemes are summed exactly over their coin law.
    """
    queries = tuple(sch.queries if queries is None else queries)
    coins = [(None, Fraction(1))] if sch.coins is None else sch.coins.items()
    worst, witness, max_probes, checked, cells = Fraction(0), None, 0, 0, 0
    for d in data:
        table = sch.storage(d)
        cells = max(cells, table.s)
        for x in queries:
            truth = sch.problem(d, x)
            err = 0
            for r, pr in coins:
                res = run_query(sch, d, x, table, r)
                max_probes = max(max_probes, res.probes_used)
                if res.answer != truth:
                    err += pr
            checked += 1
            if err > worst:
                worst, witness = err, (d, x)
    return VerifyReport(worst, max_probes, witness, checked, cells)


# Predecessor problem.

def predecessor(S, x) -> int:
    """Linear-scan predecessor: the largest element of S at most x, or -1."""
    best = -1
    for y in S:
        if best < y <= x:
            best = y
    return best


def _check_universe(m: int, n: int) -> int:
    if m < 2 or m & (m - 1):
        raise CellProbeError(f"universe size m = {m} must be a power of 2 (at least 2)")
    if not 1 <= n <= m:
        raise CellProbeError(f"set size bound n = {n} must lie in [1, m]")
    return m.bit_length() - 1


def _check_set(S, m: int, n: int) -> list:
    S = sorted(set(S))
    if len(S) > n or (S and not (0 <= S[0] and S[-1] < m)):
        raise CellProbeError(f"set {S} is not a subset of [{m}] of size at most {n}")
    return S


def sorted_array_scheme(m: int, n: int) -> CPScheme:
    """Binary search over the sorted set, padded to n cells with its maximum."""
    logm = _check_universe(m, n)
    t = math.ceil(math.log2(n + 1))

    def storage(S):
        S = _check_set(S, m, n)
        if not S:
            raise CellProbeError("sorted-array scheme stores non-empty sets")
        return Table(n, logm, S + [S[-1]] * (n - len(S)))

    def query(x):
        lo, hi = -1, n  # cells[lo] <= x < cells[hi]
        found = -1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            v = yield mid
            if v <= x:
                lo, found = mid, v
            else:
                hi = mid
        return found

    return CPScheme("sorted-array", n, logm, t, storage, query, predecessor, tuple(range(m)),
                    info={"m": m, "n": n})


class _FKSLayout:
    """Arithmetic of one FKS dictionary inside a shared table.

    Bucket cells live at ``base .. base + buckets - 1``.  A bucket cell packs
    ``(a2, b2, offset, size)``; its ``size**2`` slots start at ``offset`` in
    the shared pool.  A slot packs ``(key + 1, value)`` with 0 meaning empty.
    """

    def __init__(self, prime: int, buckets: int, a1: int, b1: int, base: int,
                 key_bits: int, value_bits: int, offset_bits: int, size_bits: int):
        self.prime, self.buckets, self.a1, self.b1, self.base = prime, buckets, a1, b1, base
        self.key_bits, self.value_bits = key_bits, value_bits
        self.param_bits = prime.bit_length()
        self.offset_bits, self.size_bits = offset_bits, size_bits

    @property
    def bucket_width(self) -> int:
        return 2 * self.param_bits + self.offset_bits + self.size_bits

    @property
    def slot_width(self) -> int:
        return self.key_bits + self.value_bits

    def first(self, key: int) -> int:
        return ((self.a1 * key + self.b1) % self.prime) % self.buckets

    def second(self, a2: int, b2: int, size: int, key: int) -> int:
        return ((a2 * key + b2) % self.prime) % (size * size)

    def pack_bucket(self, a2, b2, offset, size) -> int:
        v = a2
        v = (v << self.param_bits) | b2
        v = (v << self.offset_bits) | offset
        return (v << self.size_bits) | size

    def unpack_bucket(self, v: int):
        size = v & ((1 << self.size_bits) - 1)
        v >>= self.size_bits
        offset = v & ((1 << self.offset_bits) - 1)
        v >>= self.offset_bits
        b2 = v & ((1 << self.param_bits) - 1)
        return v >> self.param_bits, b2, offset, size

    def pack_slot(self, key: int, value: int) -> int:
        return ((key + 1) << self.value_bits) | value

    def unpack_slot(self, v: int):
        return (v >> self.value_bits) - 1, v & ((1 << self.value_bits) - 1)

    def build(self, items: dict, cells: list, rng: random.Random) -> None:
        """Write bucket cells and append slot blocks to ``cells``."""
        groups: dict = {}
        for key in items:
            groups.setdefault(self.first(key), []).append(key)
        for bucket, keys in sorted(groups.items()):
            size = len(keys)
            for _ in range(RETRY_CAP):
                a2, b2 = rng.randrange(1, self.prime), rng.randrange(self.prime)
                spots = {self.second(a2, b2, size, k) for k in keys}
                if len(spots) == size:
                    break
            else:
                raise CellProbeError(f"no injective second-level hash after {RETRY_CAP} tries")
            offset = len(cells)
            block = [0] * (size * size)
            for k in keys:
                block[self.second(a2, b2, size, k)] = self.pack_slot(k, items[k])
            cells.extend(block)
            cells[self.base + bucket] = self.pack_bucket(a2, b2, offset, size)

    def lookup(self, key: int):
        """Generator: two probes at most; returns the stored value or None."""
        a2, b2, offset, size = self.unpack_bucket((yield self.base + self.first(key)))
        if size == 0:
            return None
        stored, value = self.unpack_slot((yield offset + self.second(a2, b2, size, key)))
        return value if stored == key else None


def _bits(v: int) -> int:
    return max(1, int(v).bit_length())


def _dictionaries(m: int, n: int, count: int, value_bits: int, seed: int, header: int):
    """``count`` FKS layouts sharing one table after ``header`` fixed cells.

    Worst case all n keys of a dictionary share a bucket, so every dictionary
    reserves up to ``n + n**2`` cells; the declared ``s`` uses that bound.
    """
    prime = int(nextprime(m))
    rng = random.Random(seed)
    s_max = header + count * (n + n * n)
    layouts = []
    for j in range(count):
        a1, b1 = rng.randrange(1, prime), rng.randrange(prime)
        layouts.append(_FKSLayout(prime, n, a1, b1, header + j * n, _bits(m), value_bits,
                                  _bits(s_max), _bits(n)))
    w = max(max(lay.bucket_width, lay.slot_width) for lay in layouts)
    return layouts, s_max, w


def fks_rank_scheme(m: int, n: int, seed: int = 0) -> CPScheme:
    """Membership and rank of y in S with at most 2 probes.

    The answer is ``(True, rank)`` for members, 1-based, and ``(False, 0)``
    otherwise.
    """
    _check_universe(m, n)
    (layout,), s_max, w = _dictionaries(m, n, 1, _bits(n), seed, 0)

    def storage(S):
        S = _check_set(S, m, n)
        cells = [0] * n
        layout.build({y: r for r, y in enumerate(S, start=1)}, cells,
                     random.Random(repr((seed, S))))
        return Table(len(cells), w, cells)

    def query(y):
        r = yield from layout.lookup(y)
        return (False, 0) if r is None else (True, r)

    def problem(S, y):
        S = sorted(set(S))
        return (True, S.index(y) + 1) if y in S else (False, 0)

    return CPScheme("fks-rank", s_max, w, 2, storage, query, problem, tuple(range(m)),
                    info={"m": m, "n": n, "seed": seed})


def xfast_scheme(m: int, n: int, seed: int = 0) -> CPScheme:
    """x-fast trie: binary search over prefix lengths with one FKS dictionary per level.

    The dictionary of level l maps every length-l prefix of a stored key to
    ``(max leaf below, predecessor of the min leaf below)``.  Cell 0 holds the
    root entry.  If the longest stored prefix of x has length l and x's next
    bit is 1, the answer is that node's max; if it is 0, every leaf below is
    larger than x and the answer is the stored predecessor of its min.
    """
    L = _check_universe(m, n)
    vbits = _bits(m)
    layouts, s_max, w = _dictionaries(m, n, L, 2 * vbits, seed, 1)
    t = 2 * math.ceil(math.log2(L + 1)) + 1

    def pack(mx, pred):
        return ((mx + 1) << vbits) | (pred + 1)

    def unpack(v):
        return (v >> vbits) - 1, (v & ((1 << vbits) - 1)) - 1

    def storage(S):
        S = _check_set(S, m, n)
        if not S:
            raise CellProbeError("x-fast scheme stores non-empty sets")
        cells = [0] * (1 + L * n)
        cells[0] = pack(S[-1], -1)
        rng = random.Random(repr((seed, S)))
        prev = {y: (S[k - 1] if k else -1) for k, y in enumerate(S)}
        for level in range(1, L + 1):
            nodes: dict = {}
            for y in S:
                key = y >> (L - level)
                lo_max = nodes.get(key)
                if lo_max is None:
                    nodes[key] = (y, prev[y])
                else:
                    nodes[key] = (y, lo_max[1])
            layouts[level - 1].build({k: pack(*v) for k, v in nodes.items()}, cells, rng)
        w_cells = max(cells).bit_length()
        if w_cells > w:
            raise CellProbeError("cell overflow")
        return Table(len(cells), w, cells)

    def query(x):
        root = yield 0
        lo, hi, node = 0, L, unpack(root)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            found = yield from layouts[mid - 1].lookup(x >> (L - mid))
            if found is None:
                hi = mid - 1
            else:
                lo, node = mid, unpack(found)
        mx, pred_min = node
        if lo == L:
            return mx
        bit = (x >> (L - lo - 1)) & 1
        return mx if bit else pred_min

    return CPScheme("xfast", s_max, w, t, storage, query, predecessor, tuple(range(m)),
                    info={"m": m, "n": n, "seed": seed, "probe_bound": t})


def build_predecessor_scheme(kind: str, m: int, n: int, seed: int = 0) -> CPScheme:
    if kind == "sorted-array":
        return sorted_array_scheme(m, n)
    if kind == "xfast":
        return xfast_scheme(m, n, seed)
    raise CellProbeError(f"unknown predecessor scheme {kind!r}")


def rank_parity_answer(S, x) -> str:
    return "odd" if sum(1 for y in S if y <= x) % 2 else "even"


def pred_to_rankparity(pred: CPScheme, fks: CPScheme) -> CPScheme:
    """Rank parity from a predecessor search followed by an FKS rank lookup.

    The FKS table is appended after the predecessor table.  A missing
    predecessor means rank 0, which is even.
    """
    if pred.info.get("m") != fks.info.get("m") or pred.info.get("n") != fks.info.get("n"):
        raise CellProbeError("predecessor and rank schemes are built for different universes")
    shift = pred.s

    def storage(S):
        a, b = pred.storage(S), fks.storage(S)
        pad = [0] * (pred.s - a.s)
        return Table(pred.s + b.s, max(pred.w, fks.w), a.cells + tuple(pad) + b.cells)

    def query(x, r=None):
        gen = pred.query(x) if pred.coins is None else pred.query(x, r)
        y = yield from gen
        if y == -1:
            return "even"
        inner = fks.query(y)
        try:
            address = next(inner)
            while True:
                address = inner.send((yield address + shift))
        except StopIteration as stop:
            member, rank_ = stop.value
        if not member:
            raise CellProbeError(f"predecessor {y} is missing from the rank table")
        return "odd" if rank_ % 2 else "even"

    info = dict(pred.info)
    info["parts"] = (pred.name, fks.name)
    return CPScheme(f"{pred.name}+{fks.name}-parity", pred.s + fks.s, max(pred.w, fks.w),
                    pred.t + 2, storage, query, rank_parity_answer, pred.queries,
                    pred.coins, info)


# Cell probe scheme to communication protocol.

def scheme_game(sch: CPScheme, data: Iterable, queries: Iterable | None = None) -> Game:
    """The scheme's problem as a game: Alice holds the query, Bob the data."""
    data = [tuple(sorted(d)) if isinstance(d, (set, frozenset)) else d for d in data]
    queries = tuple(sch.queries if queries is None else queries)
    return Game(queries, data, {(x, d): sch.problem(d, x) for x in queries for d in data})


def scheme_to_protocol(sch: CPScheme) -> PrivProtocol:
    """Alice sends probe addresses, Bob returns cell contents; 2t rounds.

    Paths that stop early send address 0 and ignore the reply, so every run
    has exactly 2t messages of ``ceil(log2 s)`` and ``w`` bits.  Alice then
    answers from the contents she saw, so the protocol errs exactly when the
    scheme does, coin by coin.
    """
    abits = max(1, math.ceil(math.log2(sch.s)))
    schema = Schema(A, (abits, sch.w) * sch.t)
    tables: dict = {}

    def table_of(d):
        t = tables.get(d)
        if t is None:
            t = tables[d] = sch.storage(d)
        return t

    def replay(x, coin, tr):
        """Drive the query on the contents already received; return (next address, answer)."""
        gen = sch.query(x) if sch.coins is None else sch.query(x, coin)
        replies = [int(m, 2) for m in tr[1::2]]
        try:
            address = next(gen)
            for v in replies:
                address = gen.send(v)
        except StopIteration as stop:
            return None, stop.value
        return address, None

    def alice(x, coin, tr):
        address, _ = replay(x, coin, tr)
        return format(0 if address is None else address, f"0{abits}b")

    def bob(d, coin, tr):
        return format(table_of(d)[int(tr[-1], 2)], f"0{sch.w}b")

    def answer(x, coin, tr):
        address, value = replay(x, coin, tr)
        if address is not None:
            raise ProbeBudgetError(f"query {x!r} needs more than {sch.t} probes")
        return value

    coin_a = NO_COIN if sch.coins is None else sch.coins
    return PrivProtocol(schema, (alice, bob) * sch.t, answer, coin_a, NO_COIN)


def random_sets(rng: random.Random, m: int, n: int, count: int) -> list:
    return [tuple(sorted(rng.sample(range(m), n))) for _ in range(count)]


def all_sets(m: int, n: int) -> list:
    return [tuple(c) for c in itertools.combinations(range(m), n)]
