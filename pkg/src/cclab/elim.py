"""Round reduction and round elimination on explicit finite protocols.

``round_reduce`` removes the first message of an Alice-first private-coin
protocol at an average-error cost of ``0.5 * sqrt(2 ln2 * I(X:M))``.  It
runs in two stages: regenerate the first message from a fresh coin that
ignores the input, then make that coin public and fix every remaining coin
to its best value.

``eliminate_round`` lifts a base game ``f`` to ``f^(n)`` (Alice holds n
inputs, Bob holds one index plus the preceding inputs), fixes the public
coin of a lifted protocol under the product distribution ``D*``, restricts
to every index/prefix and round-reduces each restriction.  The best
restriction has error at most ``delta + 0.5 * sqrt(2 * l1 * ln2 / n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .info import LN2, Dist, l1_distance
from .proto import (A, DetProtocol, Game, PrivProtocol, ProtocolError, PubProtocol, Schema,
                    _private, bitstrings, random_fraction_dist, distributional_error, first_message_law,
                    first_message_stats, fix_public_coin, input_marginal)

TOL = 1e-9
EXACT_TOL = 1e-12
LIFT_CAP = 10**6


class InternalConsistencyError(AssertionError):
    """A proven inequality failed; this points at an implementation bug."""


def _require_alice_start(p: PrivProtocol) -> None:
    if p.schema.t < 1:
        raise ProtocolError("protocol has no round to remove")
    if p.schema.starter != A:
        raise ProtocolError("round reduction needs a protocol in which Alice speaks first")


def stage1_regenerate(p, d: Dist) -> PrivProtocol:
    """Alice draws the first message from the average law, then resamples her old coin.

    The new Alice coin is a pair ``(m, r)``: ``m`` follows the d-average
    first-message law for every input and ``r`` follows the old coin's law
    conditioned on (x, m).  If m can never occur on input x, ``r`` is the
    first declared coin value.
    """
    p = _private(p)
    _require_alice_start(p)
    average = first_message_stats(p, d).average
    first = p.messages[0]
    cache: dict = {}

    def coin_a(x):
        law = cache.get(x)
        if law is None:
            coins = p.alice_coins(x)
            by_msg: dict = {}
            for c, pc in coins.items():
                by_msg.setdefault(first(x, c, ()), []).append((c, pc))
            weights = {}
            for m, pm in average.items():
                bucket = by_msg.get(m)
                if bucket:
                    total = sum(pc for _, pc in bucket)
                    for c, pc in bucket:
                        weights[(m, c)] = pm * pc / total
                else:
                    weights[(m, coins.outcomes[0])] = pm
            law = cache[x] = Dist.from_mapping(weights)
        return law

    msgs = [lambda x, c, tr: c[0]]
    for r in range(1, p.schema.t):
        f = p.messages[r]
        if p.schema.speaker(r) == A:
            msgs.append(lambda x, c, tr, f=f: f(x, c[1], tr))
        else:
            msgs.append(f)
    if p.schema.answerer == A:
        answer = lambda x, c, tr: p.answer(x, c[1], tr)
    else:
        answer = p.answer
    return PrivProtocol(p.schema, tuple(msgs), answer, coin_a, p.coin_b)


@dataclass(frozen=True)
class FixedCoin:
    message: str
    bob_coin: Any
    alice_coins: dict


def _best_fixing(p: PrivProtocol, g: Game, d: Dist) -> tuple[FixedCoin, Any]:
    first = p.messages[0]
    laws = {x: first_message_law(p, x) for x in g.X}
    ref = laws[g.X[0]]
    for x, law in laws.items():
        if l1_distance(law, ref) > EXACT_TOL:
            raise ProtocolError(f"first message depends on Alice's input (x={x!r})")
    if callable(p.coin_b):
        raise ProtocolError("Bob's coin law must not depend on his input")
    mass_by_x: dict = {}
    for (x, y), w in d.items():
        mass_by_x.setdefault(x, []).append((y, w, g(x, y)))
    best = None
    for m in bitstrings(p.schema.lengths[0]):
        if ref.prob(m) <= 0:
            continue
        for cb, _ in p.coin_b.items():
            choice, total = {}, 0
            for x in g.X:
                options = [c for c, _ in p.alice_coins(x).items() if first(x, c, ()) == m]
                if not options:
                    options = [p.alice_coins(x).outcomes[0]]
                best_c, best_cost = None, None
                for c in options:
                    cost = 0
                    for y, w, z in mass_by_x.get(x, ()):
                        if p.run(x, y, c, cb).answer != z:
                            cost += w
                    if best_cost is None or cost < best_cost:
                        best_c, best_cost = c, cost
                choice[x] = best_c
                total += best_cost
            if best is None or total < best[1]:
                best = (FixedCoin(m, cb, choice), total)
    return best


def stage2_publicize_fix(p, g: Game, d: Dist) -> DetProtocol:
    """Drop an input-independent first message by fixing all coins publicly.

    Bob knows the fixed first message, so the result starts with Bob and has
    one round fewer.  The fixed values minimize the d-average error; on ties
    the first message in lexicographic order and the first declared coin
    value win.
    """
    p = _private(p)
    _require_alice_start(p)
    fixed, _ = _best_fixing(p, g, d)
    return _fixed_protocol(p, fixed)


def _fixed_protocol(p: PrivProtocol, fixed: FixedCoin) -> DetProtocol:
    m0 = (fixed.message,)
    coin = fixed.alice_coins
    msgs = []
    for r in range(1, p.schema.t):
        f = p.messages[r]
        if p.schema.speaker(r) == A:
            msgs.append(lambda x, tr, f=f: f(x, coin[x], m0 + tr))
        else:
            msgs.append(lambda y, tr, f=f: f(y, fixed.bob_coin, m0 + tr))
    if p.schema.answerer == A:
        answer = lambda x, tr: p.answer(x, coin[x], m0 + tr)
    else:
        answer = lambda y, tr: p.answer(y, fixed.bob_coin, m0 + tr)
    return DetProtocol(p.schema.tail(), tuple(msgs), answer)


def reduction_cost(information: float) -> float:
    """Additive error of one round reduction: 0.5 * sqrt(2 ln2 * I)."""
    return 0.5 * math.sqrt(2 * LN2 * max(information, 0.0))


@dataclass(frozen=True)
class RoundReduction:
    q: DetProtocol
    bound: float
    input_error: Any
    output_error: Any
    information: float
    fixed: FixedCoin

    @property
    def holds(self) -> bool:
        return self.output_error <= self.bound + TOL


def round_reduce(p, g: Game, d: Dist) -> RoundReduction:
    """Deterministic protocol with one round fewer and error within the information cost."""
    p = _private(p)
    _require_alice_start(p)
    stats = first_message_stats(p, d)
    regenerated = stage1_regenerate(p, d)
    fixed, _ = _best_fixing(regenerated, g, d)
    q = _fixed_protocol(regenerated, fixed)
    before = distributional_error(p, g, d)
    after = distributional_error(q, g, d)
    return RoundReduction(q, float(before) + reduction_cost(stats.information), before, after,
                          stats.information, fixed)


# Lifted games and round elimination.

class LiftedGame(Game):
    """``f^(n)`` on the given side.

    Side A: Alice holds ``(x1..xn)``, Bob holds ``(y, i, (x1..x_{i-1}))`` and
    the answer is ``f(x_i, y)``.  Side B mirrors this with Bob holding the
    n inputs.  Only prefix-consistent pairs satisfy the promise.
    """

    def __init__(self, base: Game, n: int, side: str = A):
        if n < 1:
            raise ProtocolError("multiplicity n must be at least 1")
        many = base.X if side == A else base.Y
        one = base.Y if side == A else base.X
        count = len(many) ** n * len(one) * n
        if count > LIFT_CAP:
            raise ProtocolError(f"lifted game would have {count} pairs (cap {LIFT_CAP})")
        tuples = list(itertools.product(many, repeat=n))
        singles = [(v, i, pre) for v in one for i in range(1, n + 1)
                   for pre in itertools.product(many, repeat=i - 1)]
        table = {}
        for xs in tuples:
            for i in range(1, n + 1):
                pre = xs[:i - 1]
                for v in one:
                    pair = (xs[i - 1], v) if side == A else (v, xs[i - 1])
                    if base.promise(*pair):
                        key = (xs, (v, i, pre)) if side == A else ((v, i, pre), xs)
                        table[key] = base(*pair)
        if side == A:
            super().__init__(tuples, singles, table, base.Z)
        else:
            super().__init__(singles, tuples, table, base.Z)
        self.base, self.n, self.side = base, n, side


def lift_game(g: Game, n: int, side: str = A) -> LiftedGame:
    return LiftedGame(g, n, side)


def build_dstar(d: Dist, n: int) -> Dist:
    """Law on lifted pairs: i uniform, (x_j, y_j) iid from d, keep y = y_i."""
    dx = input_marginal(d, A)
    xs_support = dx.items()
    inv_n = Fraction(1, n) if d.is_exact else 1.0 / n
    weights: dict = {}
    for i in range(1, n + 1):
        for (x, y), w in d.items():
            for before in itertools.product(xs_support, repeat=i - 1):
                for after in itertools.product(xs_support, repeat=n - i):
                    mass = inv_n * w
                    for _, q in before:
                        mass *= q
                    for _, q in after:
                        mass *= q
                    pre = tuple(v for v, _ in before)
                    xs = pre + (x,) + tuple(v for v, _ in after)
                    key = (xs, (y, i, pre))
                    weights[key] = weights.get(key, 0) + mass
    return Dist.from_mapping(weights)


def derive_restricted(p_star, i: int, prefix: tuple, d: Dist, n: int) -> PrivProtocol:
    """Protocol for the base game obtained by fixing index i and prefix.

    Alice plants her input at position i and draws positions i+1..n from the
    X-marginal of d with a private coin; Bob plays ``(y, i, prefix)``.
    """
    p_star = _private(p_star)
    prefix = tuple(prefix)
    if len(prefix) != i - 1 or not 1 <= i <= n:
        raise ProtocolError(f"prefix of length {len(prefix)} does not fit index {i} of {n}")
    dx = input_marginal(d, A)
    if any(dx.prob(v) <= 0 for v in prefix):
        raise ProtocolError(f"prefix {prefix!r} has zero probability under D*")
    suffixes = []
    for combo in itertools.product(dx.items(), repeat=n - i):
        w = Fraction(1) if dx.is_exact else 1.0
        for _, q in combo:
            w *= q
        suffixes.append((tuple(v for v, _ in combo), w))

    def joint(x_coins):
        weights = {}
        for suf, w in suffixes:
            for c, pc in x_coins(suf).items():
                weights[(suf, c)] = w * pc
        return Dist.from_mapping(weights)

    if callable(p_star.coin_a):
        cache: dict = {}

        def coin_a(x):
            if x not in cache:
                cache[x] = joint(lambda suf: p_star.alice_coins(prefix + (x,) + suf))
            return cache[x]
    else:
        coin_a = joint(lambda suf: p_star.coin_a)

    msgs = []
    for r, f in enumerate(p_star.messages):
        if p_star.schema.speaker(r) == A:
            msgs.append(lambda x, c, tr, f=f: f(prefix + (x,) + c[0], c[1], tr))
        else:
            msgs.append(lambda y, c, tr, f=f: f((y, i, prefix), c, tr))
    if p_star.schema.answerer == A:
        answer = lambda x, c, tr: p_star.answer(prefix + (x,) + c[0], c[1], tr)
    else:
        answer = lambda y, c, tr: p_star.answer((y, i, prefix), c, tr)
    return PrivProtocol(p_star.schema, tuple(msgs), answer, coin_a, p_star.coin_b)


def elimination_bound(l1: int, n: int) -> float:
    """Additive error 0.5 * sqrt(2 * l1 * ln2 / n) of one round elimination."""
    return 0.5 * math.sqrt(2 * l1 * LN2 / n)


@dataclass(frozen=True)
class Candidate:
    i: int
    prefix: tuple
    weight: Any
    information: float
    input_error: Any
    error: Any


@dataclass(frozen=True)
class EliminationReport:
    delta: Any
    dstar_error: Any
    l1: int
    n: int
    additive_bound: float
    candidates: tuple
    chosen: Candidate
    protocol: DetProtocol = field(repr=False)
    lifted_information: float = 0.0

    @property
    def achieved_error(self):
        return self.chosen.error

    @property
    def bound(self) -> float:
        return float(self.delta) + self.additive_bound

    @property
    def expected_information(self) -> float:
        return float(sum(float(c.weight) * c.information for c in self.candidates))

    @property
    def holds(self) -> bool:
        return self.achieved_error <= self.bound + TOL

    def to_json(self) -> dict:
        from .info import _jsonable
        return {
            "delta": float(self.delta),
            "dstar_error": float(self.dstar_error),
            "l1": self.l1,
            "n": self.n,
            "additive_bound": self.additive_bound,
            "bound": self.bound,
            "achieved_error": float(self.achieved_error),
            "holds": self.holds,
            "lifted_information": self.lifted_information,
            "expected_information": self.expected_information,
            "chosen": {"i": self.chosen.i, "prefix": _jsonable(self.chosen.prefix)},
            "output_schema": self.protocol.schema.to_json(),
            "candidates": [{"i": c.i, "prefix": _jsonable(c.prefix), "weight": float(c.weight),
                            "info": c.information, "input_error": float(c.input_error),
                            "error": float(c.error)} for c in self.candidates],
        }


def eliminate_round(p, g: Game, d: Dist, n: int) -> EliminationReport:
    """Turn a protocol for the lifted game into one for ``g`` with one round fewer."""
    pub = p if isinstance(p, PubProtocol) else PubProtocol(((Fraction(1), p),))
    _require_alice_start(pub.components[0][1])
    lifted = lift_game(g, n, A)
    delta = distributional_error(pub, lifted, worst_case=True)
    if delta >= Fraction(1, 2):
        raise ProtocolError(f"lifted protocol has worst-case error {float(delta)} >= 1/2")
    dstar = build_dstar(d, n)
    p_star = fix_public_coin(pub, lifted, dstar)
    dstar_error = distributional_error(p_star, lifted, dstar)
    lifted_info = first_message_stats(p_star, dstar).information
    dx = input_marginal(d, A)
    support = [x for x in g.X if dx.prob(x) > 0]
    one = Fraction(1) if dx.is_exact else 1.0
    candidates, best, best_q = [], None, None
    for i in range(1, n + 1):
        for prefix in itertools.product(support, repeat=i - 1):
            weight = one / n
            for v in prefix:
                weight *= dx.prob(v)
            derived = derive_restricted(p_star, i, prefix, d, n)
            red = round_reduce(derived, g, d)
            cand = Candidate(i, prefix, weight, red.information, red.input_error,
                             red.output_error)
            candidates.append(cand)
            if best is None or cand.error < best.error:
                best, best_q = cand, red.q
    l1 = pub.schema.lengths[0]
    report = EliminationReport(delta, dstar_error, l1, n, elimination_bound(l1, n),
                               tuple(candidates), best, best_q, lifted_info)
    if not report.holds:
        raise InternalConsistencyError(
            f"achieved error {float(report.achieved_error)} exceeds bound {report.bound}")
    return report


def zero_round_optimum(g: Game, d: Dist):
    """Least d-average error of any answer computed from y alone."""
    by_y: dict = {}
    for (x, y), w in d.items():
        cell = by_y.setdefault(y, {})
        z = g(x, y)
        cell[z] = cell.get(z, 0) + w
    return sum(sum(c.values()) - max(c.values()) for c in by_y.values())


def random_lifted_protocol(rng, g: Game, n: int, t: int = 2, l1: int = 1,
                           alice_coins: int = 2, bob_coins: int = 3,
                           components: int = 2) -> PubProtocol:
    """Seeded public-coin protocol for ``f^(n)`` with worst-case error at most 1/bob_coins.

    Alice opens with ``l1`` bits drawn from a table over her inputs and coin.
    Bob names his index and input plus one noise bit, set when his uniform
    coin hits the value marked bad for his input.  The last speaker answers
    correctly unless the noise bit is set and the opening message is marked
    risky; with ``t = 3`` Alice relays the answer to Bob.  Bad coin values
    are spread cyclically over Bob's inputs, so once |Y| reaches the number
    of coin values no fixed coin avoids the noise.  Codes no input sends are
    read as the first one, which keeps every strategy total.
    """
    if t not in (2, 3):
        raise ProtocolError("random lifted protocols use 2 or 3 rounds")
    if bob_coins < 3:
        raise ProtocolError("at least 3 Bob coin values keep the error below 1/2")
    lifted = lift_game(g, n, A)
    singles = lifted.Y
    width = max(1, math.ceil(math.log2(len(singles))))
    zbits = max(1, math.ceil(math.log2(len(g.Z))))
    lengths = [l1, width + 1] + ([zbits] if t == 3 else [])
    schema = Schema(A, tuple(lengths))
    code = {v: format(k, f"0{width}b") for k, v in enumerate(singles)}
    decode = {c: v for v, c in code.items()}
    zcode = {z: format(k, f"0{zbits}b") for k, z in enumerate(g.Z)}
    zdecode = {c: z for z, c in zcode.items()}
    wrong = {z: g.Z[(k + 1) % len(g.Z)] for k, z in enumerate(g.Z)}
    opening = bitstrings(l1)
    bob_coin = Dist.uniform(range(bob_coins))
    comps = []
    for _ in range(components):
        coin = random_fraction_dist(rng, range(alice_coins))
        first = {(xs, c): opening[rng.integers(len(opening))]
                 for xs in lifted.X for c in coin.outcomes}
        risky = {m: bool(rng.random() < 0.7) for m in opening}
        shift = {}
        for v in singles:
            shift.setdefault(v[1:], int(rng.integers(bob_coins)))
        bad = {v: (g.Y.index(v[0]) + shift[v[1:]]) % bob_coins for v in singles}

        def alice_value(xs, c, tr, risky=risky):
            y, i, _ = decode.get(tr[1][:-1], singles[0])
            z = g(xs[i - 1], y)
            return wrong[z] if tr[1][-1] == "1" and risky[tr[0]] else z

        msgs = [lambda xs, c, tr, first=first: first[(xs, c)],
                lambda v, c, tr, bad=bad: code[v] + ("1" if c == bad[v] else "0")]
        if t == 3:
            msgs.append(lambda xs, c, tr, f=alice_value: zcode[f(xs, c, tr)])
            answer = lambda v, c, tr: zdecode.get(tr[2], g.Z[0])
        else:
            answer = alice_value
        comps.append(PrivProtocol(schema, tuple(msgs), answer, coin, bob_coin))
    weights = random_fraction_dist(rng, range(components))
    return PubProtocol(tuple(zip(weights.probs, comps)))
