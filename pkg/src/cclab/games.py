"""Rank parity and greater-than: instances, input reductions, fingerprint protocol.

Bit strings are plain ``str`` values over ``"01"`` read big-endian, so
comparing equal-length strings as integers is the same as comparing them
lexicographically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .proto import A, DetProtocol, Game, PubProtocol, Schema, bitstrings, transport


class GameError(ValueError):
    pass


def _check_bits(s: str, length: int, what: str) -> None:
    if len(s) != length or s.strip("01"):
        raise GameError(f"{what} {s!r} is not a {length}-bit string")


def as_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


# Rank parity.

@dataclass(frozen=True)
class ParInstance:
    p: int
    q: int
    x: str
    S: frozenset

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        _check_bits(self.x, self.p, "query")
        for y in self.S:
            _check_bits(y, self.p, "set element")
        if len(self.S) > self.q:
            raise GameError(f"|S| = {len(self.S)} exceeds q = {self.q}")

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "x": self.x, "S": sorted(self.S)}

    @classmethod
    def from_json(cls, obj) -> "ParInstance":
        return cls(obj["p"], obj["q"], obj["x"], frozenset(obj["S"]))


def rank(x: str, S) -> int:
    """Number of elements of S that are at most x."""
    return sum(1 for y in S if y <= x)


def par_eval(inst: ParInstance) -> str:
    return "odd" if rank(inst.x, inst.S) % 2 else "even"


def parity(x: str, S) -> str:
    return "odd" if rank(x, S) % 2 else "even"


@dataclass(frozen=True)
class InputMaps:
    """Maps from the inputs of a small game to the inputs of a big one.

    ``alice`` and ``bob`` act on single inputs, so a protocol for the big
    game transports to the small one by precomposition.
    """

    alice: object
    bob: object

    def transport(self, protocol):
        return transport(protocol, self.alice, self.bob)


def rankred1_transform(p: int, k: int) -> InputMaps:
    """Inputs of PAR^(k),A_{p/k,q} to inputs of PAR_{p,q}.

    Alice holds ``(x1, ..., xk)``; Bob holds ``(S, i, (x1, ..., x_{i-1}))``.
    """
    if k < 1 or p % k:
        raise GameError(f"k = {k} does not divide p = {p}")
    step = p // k

    def alice(xs):
        return "".join(xs)

    def bob(b):
        S, i, prefix = b
        pad = "0" * (p - i * step)
        return frozenset("".join(prefix) + y + pad for y in S)

    return InputMaps(alice, bob)


def rankred2_transform(p: int, q: int, k: int) -> InputMaps:
    """Inputs of PAR^(k),B_{p-log k-1,q/k} to inputs of PAR_{p,q}.

    Alice holds ``(x, i)``; Bob holds ``(S_1, ..., S_k)``.  Each odd-sized
    ``S_j`` is padded with the block's all-ones string so that lower blocks
    contribute an even rank.
    """
    if k < 1 or k & (k - 1):
        raise GameError(f"k = {k} is not a power of 2")
    if q % k:
        raise GameError(f"k = {k} does not divide q = {q}")
    logk = k.bit_length() - 1
    if p < logk + 2:
        raise GameError(f"p = {p} is too small for k = {k}")

    def alice(a):
        x, i = a[0], a[1]
        return to_bits(i - 1, logk) + "0" + x

    def bob(sets):
        out = set()
        for j, Sj in enumerate(sets, start=1):
            head = to_bits(j - 1, logk)
            out.update(head + "0" + y for y in Sj)
            if len(Sj) % 2:
                out.add(head + "1" * (p - logk))
        return frozenset(out)

    return InputMaps(alice, bob)


def subsets(strings, max_size: int) -> list:
    return [frozenset(c) for r in range(max_size + 1) for c in itertools.combinations(strings, r)]


def par_game(p: int, q: int) -> Game:
    X = bitstrings(p)
    return Game.from_function(X, subsets(X, q), parity)


def par_lifted_a(p: int, q: int, k: int) -> Game:
    """PAR^(k),A_{p,q} as an explicit game."""
    X = bitstrings(p)
    sets = subsets(X, q)
    xs_all = list(itertools.product(X, repeat=k))
    bobs = [(S, i, pre) for S in sets for i in range(1, k + 1)
            for pre in itertools.product(X, repeat=i - 1)]
    table = {}
    for xs in xs_all:
        for S, i, pre in bobs:
            if xs[:i - 1] == pre:
                table[(xs, (S, i, pre))] = parity(xs[i - 1], S)
    return Game(xs_all, bobs, table)


def par_lifted_b(p: int, q: int, k: int) -> Game:
    """PAR^(k),B_{p,q}: Alice has (x, i), Bob has k sets."""
    X = bitstrings(p)
    sets = subsets(X, q)
    alices = [(x, i) for x in X for i in range(1, k + 1)]
    bobs = list(itertools.product(sets, repeat=k))
    return Game.from_function(alices, bobs, lambda a, b: parity(a[0], b[a[1] - 1]))


# Greater-than.

@dataclass(frozen=True)
class GtInstance:
    n: int
    x: str
    y: str

    def __post_init__(self):
        _check_bits(self.x, self.n, "x")
        _check_bits(self.y, self.n, "y")

    def to_json(self) -> dict:
        return {"n": self.n, "x": self.x, "y": self.y}

    @classmethod
    def from_json(cls, obj) -> "GtInstance":
        return cls(obj["n"], obj["x"], obj["y"])


def gt_eval(inst: GtInstance) -> bool:
    return inst.x > inst.y


def gt_game(n: int) -> Game:
    X = bitstrings(n)
    return Game.from_function(X, X, lambda x, y: x > y)


def gt_lifted(n: int, k: int) -> Game:
    """GT^(k),A_n: Alice has k strings, Bob has (y, i, prefix)."""
    X = bitstrings(n)
    xs_all = list(itertools.product(X, repeat=k))
    bobs = [(y, i, pre) for y in X for i in range(1, k + 1)
            for pre in itertools.product(X, repeat=i - 1)]
    table = {}
    for xs in xs_all:
        for y, i, pre in bobs:
            if xs[:i - 1] == pre:
                table[(xs, (y, i, pre))] = xs[i - 1] > y
    return Game(xs_all, bobs, table)


def gt_self_reduce(n: int, k: int) -> InputMaps:
    """Inputs of GT^(k),A_{n/k} to inputs of GT_n.

    Bob pads with ones, so equal blocks at position i compare as "not greater".
    """
    if k < 1 or n % k:
        raise GameError(f"k = {k} does not divide n = {n}")
    step = n // k

    def alice(xs):
        return "".join(xs)

    def bob(b):
        y, i, prefix = b
        return "".join(prefix) + y + "1" * (n - i * step)

    return InputMaps(alice, bob)


# Public-coin fingerprint protocol for GT_n.

class FingerprintProtocol:
    """t'-level descent with inner-product fingerprints.

    Each level splits the current segment into at most k blocks of
    ``ceil(len/k)`` bits (the last one shorter).  Alice sends an s-bit hash of
    every block prefix of her segment; Bob answers with the index of the
    first prefix whose hash differs from his own, or k when none does, and
    that block becomes the next segment.  After t' levels the segment is a
    single bit; Alice answers "greater" iff her bit there is 1 and Bob never
    reported agreement.

    The public coin is a bit array of shape ``(t', k, s, n)``: one fresh
    s x n matrix per comparison, of which a prefix of length l uses the
    first l columns.  Unequal strings collide with probability exactly
    ``2^-s``, so the union bound over at most ``t' k`` comparisons keeps the
    error at most ``t' k 2^-s <= 1/3``.
    """

    def __init__(self, n: int, rounds: int):
        if n < 1 or rounds < 1:
            raise GameError("fingerprint protocol needs n >= 1 and t' >= 1")
        self.n, self.levels = n, rounds
        self.k = _int_root_ceil(n, rounds)
        self.s = max(1, math.ceil(math.log2(3 * rounds * self.k)))
        self.reply_bits = max(1, math.ceil(math.log2(self.k + 1)))
        self.schema = Schema(A, (self.k * self.s, self.reply_bits) * rounds)
        self.coin_shape = (rounds, self.k, self.s, n)

    @property
    def total_bits(self) -> int:
        return self.schema.total_bits

    @property
    def constant(self) -> float:
        """C with total bits = C * n^(1/t') * log2 n (log2 n read as 1 when n = 1)."""
        return self.total_bits / (self.n ** (1 / self.levels) * max(1.0, math.log2(self.n)))

    @property
    def error_bound(self) -> Fraction:
        return Fraction(self.levels * self.k, 2 ** self.s)

    def blocks(self, lo: int, hi: int) -> list:
        size = math.ceil((hi - lo) / self.k)
        return [(a, min(a + size, hi)) for a in range(lo, hi, size)]

    # One run for a fixed coin, through the generic protocol machinery.

    def det_protocol(self, coin: np.ndarray) -> DetProtocol:
        coin = np.asarray(coin, dtype=np.uint8).reshape(self.coin_shape)
        s, k = self.s, self.k

        def hash_bits(level, slot, bits):
            v = np.frombuffer(bits.encode(), dtype=np.uint8) - 48
            h = coin[level, slot, :, :len(v)].astype(np.int64) @ v % 2
            return "".join("1" if b else "0" for b in h)

        def segment(tr):
            lo, hi, equal = 0, self.n, False
            for level in range(len(tr) // 2):
                j = int(tr[2 * level + 1], 2)
                if j >= k or equal:
                    equal = True
                    continue
                blocks = self.blocks(lo, hi)
                lo, hi = blocks[min(j, len(blocks) - 1)]
            return lo, hi, equal

        def alice_msg(x, tr):
            level = len(tr) // 2
            lo, hi, equal = segment(tr)
            if equal:
                return "0" * (k * s)
            out = [hash_bits(level, j, x[lo:b]) for j, (_, b) in enumerate(self.blocks(lo, hi))]
            return "".join(out).ljust(k * s, "0")

        def bob_msg(y, tr):
            level = len(tr) // 2
            lo, hi, equal = segment(tr)
            if equal:
                return to_bits(k, self.reply_bits)
            sent = tr[-1]
            for j, (_, b) in enumerate(self.blocks(lo, hi)):
                if hash_bits(level, j, y[lo:b]) != sent[j * s:(j + 1) * s]:
                    return to_bits(j, self.reply_bits)
            return to_bits(k, self.reply_bits)

        def answer(x, tr):
            lo, hi, equal = segment(tr)
            return (not equal) and x[lo] == "1"

        msgs = [alice_msg, bob_msg] * self.levels
        return DetProtocol(self.schema, tuple(msgs), answer)

    def run(self, x: str, y: str, coin: np.ndarray) -> bool:
        return self.det_protocol(coin).run(x, y).answer

    def sample_coin(self, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, 2, size=self.coin_shape, dtype=np.uint8)

    def as_pub(self, max_atoms: int = 2**16) -> PubProtocol:
        """Every coin value as an explicit component (tiny n only)."""
        bits = int(np.prod(self.coin_shape))
        if 2 ** bits > max_atoms:
            raise GameError(f"public coin has 2^{bits} values (cap {max_atoms})")
        w = Fraction(1, 2 ** bits)
        comps = []
        for code in range(2 ** bits):
            coin = np.array([(code >> b) & 1 for b in range(bits)], dtype=np.uint8)
            comps.append((w, self.det_protocol(coin)))
        return PubProtocol(tuple(comps))

    # Exact error by enumerating the comparison outcomes.

    def exact_error(self, x: str, y: str) -> Fraction:
        """Error on (x, y), summed exactly over the coin.

        Only the agree/disagree outcome of each comparison depends on the
        coin.  Those outcomes are independent, an equal pair always agrees
        and an unequal pair agrees with probability ``2^-s``, so summing over
        outcome patterns is the same as summing over all coin values.
        """
        truth = x > y
        collide = Fraction(1, 2 ** self.s)

        def walk(level, lo, hi):
            if level == self.levels:
                return Fraction(int((x[lo] == "1") != truth))
            total, reach = Fraction(0), Fraction(1)
            for a, b in self.blocks(lo, hi):
                agree = Fraction(1) if x[lo:b] == y[lo:b] else collide
                total += reach * (1 - agree) * walk(level + 1, a, b)
                reach *= agree
            return total + reach * int(truth)

        return walk(0, 0, self.n)

    def exact_profile(self) -> dict:
        X = bitstrings(self.n)
        return {(x, y): self.exact_error(x, y) for x in X for y in X}

    # Vectorized Monte Carlo.

    def sample_answers(self, x: str, y: str, coins: np.ndarray) -> np.ndarray:
        """Answers on (x, y) for a batch of coins of shape ``(N, t', k, s, n)``."""
        N = coins.shape[0]
        xv = np.frombuffer(x.encode(), dtype=np.uint8) - 48
        diff = (xv ^ (np.frombuffer(y.encode(), dtype=np.uint8) - 48)).astype(np.int64)
        lo = np.zeros(N, dtype=np.int64)
        hi = np.full(N, self.n, dtype=np.int64)
        equal = np.zeros(N, dtype=bool)
        cols = np.arange(self.n)
        for level in range(self.levels):
            size = -(-(hi - lo) // self.k)
            chosen = np.full(N, -1, dtype=np.int64)
            for j in range(self.k):
                start = lo + j * size
                end = np.minimum(start + size, hi)
                live = (start < hi) & (chosen < 0) & ~equal
                length = end - lo
                idx = np.clip(lo[:, None] + cols[None, :], 0, self.n - 1)
                d = np.where(cols[None, :] < length[:, None], diff[idx], 0)
                h = np.einsum("nsl,nl->ns", coins[:, level, j].astype(np.int64), d) % 2
                disagree = h.any(axis=1)
                hit = live & disagree
                chosen[hit] = j
            agree_all = (chosen < 0) & ~equal
            equal |= agree_all
            move = ~equal
            new_lo = lo + np.maximum(chosen, 0) * size
            new_hi = np.minimum(new_lo + size, hi)
            lo = np.where(move, new_lo, lo)
            hi = np.where(move, new_hi, hi)
        return ~equal & (xv[np.clip(lo, 0, self.n - 1)] == 1)

    def monte_carlo(self, pairs, trials_per_pair: int, rng: np.random.Generator,
                    batch: int = 2000) -> dict:
        """Empirical error rate per pair, with fresh coins for every trial."""
        out = {}
        for x, y in pairs:
            wrong, done = 0, 0
            while done < trials_per_pair:
                m = min(batch, trials_per_pair - done)
                coins = rng.integers(0, 2, size=(m,) + self.coin_shape, dtype=np.uint8)
                wrong += int((self.sample_answers(x, y, coins) != (x > y)).sum())
                done += m
            out[(x, y)] = wrong / trials_per_pair
        return out


def _int_root_ceil(n: int, t: int) -> int:
    """Smallest k with k^t >= n."""
    k = max(1, round(n ** (1 / t)))
    while k ** t < n:
        k += 1
    while k > 1 and (k - 1) ** t >= n:
        k -= 1
    return k


def gt_test_pairs(rng: np.random.Generator, n: int, count: int) -> list[tuple[str, str]]:
    """Input pairs for error sweeps: a third uniform, a third equal, a third one flip apart.

    Pairs differing in one late bit force the descent through every round,
    which is where the protocol is most likely to err.
    """
    pairs = []
    for k in range(count):
        x = "".join(rng.choice(["0", "1"], size=n))
        if k % 3 == 0:
            y = "".join(rng.choice(["0", "1"], size=n))
        elif k % 3 == 1:
            y = x
        else:
            j = int(rng.integers(n))
            y = x[:j] + ("1" if x[j] == "0" else "0") + x[j + 1:]
        pairs.append((x, y))
    return pairs


def gt_fingerprint_protocol(n: int, rounds: int) -> FingerprintProtocol:
    return FingerprintProtocol(n, rounds)

