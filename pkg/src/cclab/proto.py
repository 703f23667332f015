"""Finite two-party communication protocols with exact evaluation.

A protocol runs over a :class:`Schema` ``[t; l1..lt]`` with a designated
starter.  Round ``r`` is spoken by the starter when ``r`` is even.  The
answer is produced by the receiver of the last message from its own input
and the full transcript; with no rounds at all, Bob answers from ``y``.

Message and answer functions are plain callables.  Private coins are
:class:`~cclab.info.Dist` values, optionally conditioned on the owner's
input (``coin_a`` may be a callable ``x -> Dist``).  Probabilities stay
exact whenever the coin and input laws hold :class:`fractions.Fraction`
values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .info import Dist, JointDist, mutual_information

A, B = "A", "B"
FORMAT = "cclab-proto-1"
ENUMERATION_CAP = 10**6


class ProtocolError(ValueError):
    """Malformed protocol, schema violation, or input outside its domain."""


class PromiseError(ProtocolError):
    """Input pair outside the game's promise."""


def other(side: str) -> str:
    return B if side == A else A


def bitstrings(length: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=length)]


@dataclass(frozen=True)
class Schema:
    starter: str
    lengths: tuple = ()

    def __post_init__(self):
        if self.starter not in (A, B):
            raise ProtocolError(f"starter must be 'A' or 'B', got {self.starter!r}")
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))
        if any(n < 1 for n in self.lengths):
            raise ProtocolError("message lengths must be at least one bit")

    @property
    def t(self) -> int:
        return len(self.lengths)

    def speaker(self, r: int) -> str:
        return self.starter if r % 2 == 0 else other(self.starter)

    @property
    def answerer(self) -> str:
        return B if self.t == 0 else other(self.speaker(self.t - 1))

    def tail(self) -> "Schema":
        """Schema left after dropping the first message: ``[t-1; l2..lt]`` of the other side."""
        if self.t == 0:
            raise ProtocolError("cannot drop a round from a zero-round schema")
        return Schema(other(self.starter), self.lengths[1:])

    @property
    def total_bits(self) -> int:
        return sum(self.lengths)

    def __str__(self) -> str:
        if not self.lengths:
            return f"[0]^{self.starter}"
        return f"[{self.t}; {', '.join(map(str, self.lengths))}]^{self.starter}"

    def to_json(self) -> dict:
        return {"starter": self.starter, "lengths": list(self.lengths)}

    @classmethod
    def from_json(cls, obj) -> "Schema":
        return cls(obj["starter"], tuple(obj["lengths"]))


class Game:
    """Function table f on promise pairs (x, y).

    Pairs absent from ``table`` violate the promise.
    """

    def __init__(self, X: Iterable, Y: Iterable, table: Mapping, Z: Iterable | None = None):
        self.X = tuple(X)
        self.Y = tuple(Y)
        self.table = dict(table)
        self.Z = tuple(Z) if Z is not None else tuple(sorted(set(self.table.values()), key=repr))
        xs, ys, zs = set(self.X), set(self.Y), set(self.Z)
        for (x, y), z in self.table.items():
            if x not in xs or y not in ys or z not in zs:
                raise ProtocolError(f"table entry {(x, y)!r} -> {z!r} outside declared sets")

    @classmethod
    def from_function(cls, X, Y, f: Callable, promise: Callable | None = None, Z=None) -> "Game":
        X, Y = tuple(X), tuple(Y)
        table = {(x, y): f(x, y) for x in X for y in Y if promise is None or promise(x, y)}
        return cls(X, Y, table, Z)

    def __call__(self, x, y):
        try:
            return self.table[(x, y)]
        except KeyError:
            raise PromiseError(f"pair {(x, y)!r} violates the promise") from None

    def promise(self, x, y) -> bool:
        return (x, y) in self.table

    def pairs(self) -> list:
        return list(self.table)

    def uniform(self) -> Dist:
        return Dist.uniform(self.pairs())

    def to_json(self) -> dict:
        from .info import _jsonable
        return {"format": FORMAT, "kind": "game",
                "X": [_jsonable(x) for x in self.X], "Y": [_jsonable(y) for y in self.Y],
                "Z": [_jsonable(z) for z in self.Z],
                "table": [[_jsonable(x), _jsonable(y), _jsonable(z)]
                          for (x, y), z in self.table.items()]}

    @classmethod
    def from_json(cls, obj) -> "Game":
        from .info import _frozen
        _check_format(obj, "game")
        return cls([_frozen(x) for x in obj["X"]], [_frozen(y) for y in obj["Y"]],
                   {(_frozen(x), _frozen(y)): _frozen(z) for x, y, z in obj["table"]},
                   [_frozen(z) for z in obj["Z"]])

    def __repr__(self) -> str:
        return f"Game(|X|={len(self.X)}, |Y|={len(self.Y)}, pairs={len(self.table)})"


NO_COIN = Dist((None,), (Fraction(1),))


@dataclass(frozen=True)
class Run:
    answer: Any
    transcript: tuple


def _play(schema: Schema, messages, answer, x, y, ca, cb) -> Run:
    tr: tuple = ()
    for r, msg in enumerate(messages):
        if schema.speaker(r) == A:
            m = msg(x, ca, tr)
        else:
            m = msg(y, cb, tr)
        if len(m) != schema.lengths[r] or m.strip("01"):
            raise ProtocolError(f"round {r + 1} message {m!r} does not match {schema}")
        tr += (m,)
    if schema.answerer == A:
        return Run(answer(x, ca, tr), tr)
    return Run(answer(y, cb, tr), tr)


@dataclass(frozen=True, eq=False)
class PrivProtocol:
    """Private-coin protocol.

    ``messages[r]`` and ``answer`` take ``(own_input, own_coin, transcript)``.
    """

    schema: Schema
    messages: tuple
    answer: Callable
    coin_a: Dist | Callable = NO_COIN
    coin_b: Dist | Callable = NO_COIN

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if len(self.messages) != self.schema.t:
            raise ProtocolError(f"{len(self.messages)} message functions for {self.schema}")

    def alice_coins(self, x) -> Dist:
        return self.coin_a(x) if callable(self.coin_a) else self.coin_a

    def bob_coins(self, y) -> Dist:
        return self.coin_b(y) if callable(self.coin_b) else self.coin_b

    def run(self, x, y, ca=None, cb=None) -> Run:
        return _play(self.schema, self.messages, self.answer, x, y, ca, cb)


@dataclass(frozen=True, eq=False)
class DetProtocol:
    """Deterministic protocol; functions take ``(own_input, transcript)``."""

    schema: Schema
    messages: tuple
    answer: Callable

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if len(self.messages) != self.schema.t:
            raise ProtocolError(f"{len(self.messages)} message functions for {self.schema}")

    def run(self, x, y) -> Run:
        return self.as_private().run(x, y)

    @cached_property
    def _private_form(self) -> PrivProtocol:
        return PrivProtocol(self.schema,
                            tuple(lambda i, c, tr, f=f: f(i, tr) for f in self.messages),
                            lambda i, c, tr: self.answer(i, tr))

    def as_private(self) -> PrivProtocol:
        return self._private_form


@dataclass(frozen=True, eq=False)
class PubProtocol:
    """Public-coin protocol: a finite mixture of private-coin protocols."""

    components: tuple

    def __post_init__(self):
        comps = tuple((p, _private(q)) for p, q in self.components)
        if not comps:
            raise ProtocolError("public-coin protocol needs at least one component")
        if any(p < 0 for p, _ in comps) or abs(sum(p for p, _ in comps) - 1) > 1e-12:
            raise ProtocolError("component probabilities are not a distribution")
        if len({q.schema for _, q in comps}) != 1:
            raise ProtocolError("components use different schemas")
        object.__setattr__(self, "components", comps)

    @property
    def schema(self) -> Schema:
        return self.components[0][1].schema


def _private(p) -> PrivProtocol:
    if isinstance(p, DetProtocol):
        return p.as_private()
    if isinstance(p, PrivProtocol):
        return p
    raise ProtocolError(f"expected a deterministic or private-coin protocol, got {type(p)}")


def evaluate(p: DetProtocol, x, y, game: Game | None = None) -> Run:
    if game is not None and not game.promise(x, y):
        raise PromiseError(f"pair {(x, y)!r} violates the promise")
    try:
        return p.run(x, y)
    except (KeyError, IndexError) as exc:
        raise ProtocolError(f"unreachable transcript or input on {(x, y)!r}: {exc}") from exc


def pair_error(p: PrivProtocol, x, y, z):
    """Exact probability that ``p`` answers something other than ``z`` on (x, y)."""
    err = 0
    ca_items = p.alice_coins(x).items()
    cb_items = p.bob_coins(y).items()
    try:
        for ca, pa in ca_items:
            for cb, pb in cb_items:
                if p.run(x, y, ca, cb).answer != z:
                    err += pa * pb
    except (KeyError, IndexError) as exc:
        raise ProtocolError(f"protocol undefined on input {(x, y)!r}: {exc}") from exc
    return err


def _components(p) -> list:
    if isinstance(p, PubProtocol):
        return list(p.components)
    return [(Fraction(1), _private(p))]


def error_profile(p, g: Game, pairs: Iterable | None = None) -> dict:
    """Map each promise pair to the exact error probability of ``p`` on it."""
    comps = _components(p)
    pairs = g.pairs() if pairs is None else list(pairs)
    out = {}
    for x, y in pairs:
        z = g(x, y)
        out[(x, y)] = sum(w * pair_error(q, x, y, z) for w, q in comps)
    return out


def distributional_error(p, g: Game, d: Dist | None = None, worst_case: bool = False):
    """Average error under ``d``, or the maximum over promise pairs with ``worst_case``."""
    if worst_case:
        return max(error_profile(p, g).values())
    if d is None:
        raise ProtocolError("a distribution is required unless worst_case is set")
    support = d.items()
    for (x, y), _ in support:
        if not g.promise(x, y):
            raise PromiseError(f"distribution puts mass on off-promise pair {(x, y)!r}")
    prof = error_profile(p, g, [xy for xy, _ in support])
    return sum(w * prof[xy] for xy, w in support)


def input_marginal(d: Dist, side: str = A) -> Dist:
    """Marginal of one player's input under a law on (x, y) pairs."""
    k = 0 if side == A else 1
    weights: dict = {}
    for (pair, w) in zip(d.outcomes, d.probs):
        weights[pair[k]] = weights.get(pair[k], 0) + w
    return Dist(weights.keys(), weights.values())


@dataclass(frozen=True)
class FirstMessageStats:
    marginal: Dist
    conditionals: dict
    average: Dist
    information: float

    def joint(self) -> JointDist:
        return JointDist.from_conditionals(self.marginal, self.conditionals)


def first_message_law(p: PrivProtocol, x) -> Dist:
    """Law of the first message given the starter's input ``x``."""
    if p.schema.t == 0:
        raise ProtocolError("zero-round protocol has no first message")
    side = p.schema.starter
    coins = p.alice_coins(x) if side == A else p.bob_coins(x)
    msgs = bitstrings(p.schema.lengths[0])
    weights = {m: 0 for m in msgs}
    first = p.messages[0]
    for c, pc in coins.items():
        m = first(x, c, ())
        if m not in weights:
            raise ProtocolError(f"first message {m!r} does not match {p.schema}")
        weights[m] += pc
    return Dist(msgs, [weights[m] for m in msgs])


def first_message_stats(p, d: Dist) -> FirstMessageStats:
    """Per-input first-message laws, their d-average and I(input : first message)."""
    p = _private(p)
    if p.schema.t == 0:
        raise ProtocolError("zero-round protocol has no first message")
    marginal = input_marginal(d, p.schema.starter)
    conds = {x: first_message_law(p, x) for x in marginal.outcomes}
    msgs = bitstrings(p.schema.lengths[0])
    avg = {m: 0 for m in msgs}
    for x, px in zip(marginal.outcomes, marginal.probs):
        for m, pm in zip(conds[x].outcomes, conds[x].probs):
            avg[m] += px * pm
    average = Dist(msgs, [avg[m] for m in msgs])
    info = mutual_information(JointDist.from_conditionals(marginal, conds))
    return FirstMessageStats(marginal, conds, average, max(info, 0.0))


def fix_public_coin(p: PubProtocol, g: Game, d: Dist) -> PrivProtocol:
    """Component with least distributional error under ``d`` (lowest index on ties)."""
    if not p.components:
        raise ProtocolError("empty public-coin protocol")
    best, best_err = None, None
    for _, q in p.components:
        e = distributional_error(q, g, d)
        if best_err is None or e < best_err:
            best, best_err = q, e
    return best


def transport(p, alice_map: Callable, bob_map: Callable):
    """Precompose a protocol with input maps; schema, coins and errors carry over.

    ``alice_map``/``bob_map`` send the new game's inputs to the old game's.
    """
    if isinstance(p, PubProtocol):
        return PubProtocol(tuple((w, transport(q, alice_map, bob_map)) for w, q in p.components))
    if isinstance(p, DetProtocol):
        maps = {A: alice_map, B: bob_map}
        msgs = tuple(lambda i, tr, f=f, h=maps[p.schema.speaker(r)]: f(h(i), tr)
                     for r, f in enumerate(p.messages))
        h = maps[p.schema.answerer]
        return DetProtocol(p.schema, msgs, lambda i, tr: p.answer(h(i), tr))
    maps = {A: alice_map, B: bob_map}
    msgs = tuple(lambda i, c, tr, f=f, h=maps[p.schema.speaker(r)]: f(h(i), c, tr)
                 for r, f in enumerate(p.messages))
    h = maps[p.schema.answerer]
    coin_a = (lambda x: p.alice_coins(alice_map(x))) if callable(p.coin_a) else p.coin_a
    coin_b = (lambda y: p.bob_coins(bob_map(y))) if callable(p.coin_b) else p.coin_b
    return PrivProtocol(p.schema, msgs, lambda i, c, tr: p.answer(h(i), c, tr), coin_a, coin_b)


# Table-driven protocols and the JSON interchange format.

def _key(v):
    from .info import _frozen, _jsonable
    return _frozen(_jsonable(v))


class _Table:
    """Lookup ``(input, coin, transcript) -> value`` from an explicit table."""

    def __init__(self, entries: Mapping):
        self.entries = dict(entries)

    def __call__(self, inp, coin, tr):
        return self.entries[(_key(inp), _key(coin), tuple(tr))]


def table_protocol(schema: Schema, message_tables: Sequence[Mapping], answer_table: Mapping,
                   coin_a=NO_COIN, coin_b=NO_COIN) -> PrivProtocol:
    """Private-coin protocol whose functions are explicit tables.

    Table keys are ``(input, coin, transcript_tuple)``; use ``None`` as the
    coin of a coinless side.
    """
    return PrivProtocol(schema, tuple(_Table(t) for t in message_tables), _Table(answer_table),
                        coin_a, coin_b)


def _tabulate(p: PrivProtocol, X, Y):
    """Every (input, coin, prefix) of each round's speaker, plus answer points.

    Unreachable prefixes are included because the round transforms evaluate
    a player's strategy on transcripts that player's input never produces.
    """
    inputs = {A: X, B: Y}
    coins = {A: p.alice_coins, B: p.bob_coins}
    prefixes: list = [()]
    rounds = []
    for r, msg in enumerate(p.messages):
        side = p.schema.speaker(r)
        rounds.append({(i, c, tr): msg(i, c, tr) for i in inputs[side]
                       for c, _ in coins[side](i).items() for tr in prefixes})
        prefixes = [tr + (m,) for tr in prefixes for m in bitstrings(p.schema.lengths[r])]
    side = p.schema.answerer
    answers = {(i, c, tr): p.answer(i, c, tr) for i in inputs[side]
               for c, _ in coins[side](i).items() for tr in prefixes}
    return rounds, answers


def _coin_json(coin, inputs):
    if callable(coin):
        from .info import _jsonable
        return {"kind": "conditional",
                "table": [[_jsonable(i), coin(i).to_json()] for i in inputs]}
    return {"kind": "fixed", "dist": coin.to_json()}


def _coin_from_json(obj):
    if obj["kind"] == "fixed":
        return Dist.from_json(obj["dist"])
    laws = {_key(i): Dist.from_json(d) for i, d in obj["table"]}
    return lambda i: laws[_key(i)]


def protocol_to_json(p, game: Game) -> dict:
    """Tabulate a protocol over the game's input sets and every transcript."""
    from .info import _jsonable, _prob_to_json
    if isinstance(p, PubProtocol):
        return {"format": FORMAT, "kind": "pub", "schema": p.schema.to_json(),
                "components": [{"prob": _prob_to_json(w), "protocol": protocol_to_json(q, game)}
                               for w, q in p.components]}
    kind = "det" if isinstance(p, DetProtocol) else "priv"
    q = _private(p)
    rounds, answers = _tabulate(q, game.X, game.Y)
    enc = lambda k, v: [_jsonable(k[0]), _jsonable(k[1]), list(k[2]), _jsonable(v)]
    obj = {"format": FORMAT, "kind": kind, "schema": q.schema.to_json(),
           "rounds": [{"speaker": q.schema.speaker(r),
                       "table": [enc(k, v) for k, v in tab.items()]}
                      for r, tab in enumerate(rounds)],
           "answer": {"table": [enc(k, v) for k, v in answers.items()]}}
    if kind == "priv":
        obj["coins"] = {A: _coin_json(q.coin_a, game.X), B: _coin_json(q.coin_b, game.Y)}
    return obj


def protocol_from_json(obj):
    from .info import _prob_from_json
    _check_format(obj)
    kind = obj["kind"]
    if kind == "pub":
        return PubProtocol(tuple((_prob_from_json(c["prob"]), protocol_from_json(c["protocol"]))
                                 for c in obj["components"]))
    schema = Schema.from_json(obj["schema"])
    dec = lambda rows: {(_key(i), _key(c), tuple(tr)): _key(v) for i, c, tr, v in rows}
    msgs = [dec(r["table"]) for r in obj["rounds"]]
    ans = dec(obj["answer"]["table"])
    if kind == "det":
        return DetProtocol(schema,
                           tuple(lambda i, tr, t=_Table(m): t(i, None, tr) for m in msgs),
                           lambda i, tr, t=_Table(ans): t(i, None, tr))
    if kind != "priv":
        raise ProtocolError(f"unknown protocol kind {kind!r}")
    return table_protocol(schema, msgs, ans, _coin_from_json(obj["coins"][A]),
                          _coin_from_json(obj["coins"][B]))


def distribution_to_json(d: Dist) -> dict:
    return {"format": FORMAT, "kind": "distribution", **d.to_json()}


def distribution_from_json(obj) -> Dist:
    _check_format(obj, "distribution")
    return Dist.from_json(obj)


def _check_format(obj, kind: str | None = None) -> None:
    if obj.get("format") != FORMAT:
        raise ProtocolError(f"unsupported format {obj.get('format')!r}; expected {FORMAT}")
    if kind is not None and obj.get("kind") != kind:
        raise ProtocolError(f"expected a {kind!r} document, got {obj.get('kind')!r}")


# Zero-sum game between input distributions and deterministic protocols.

class _StrategySpace:
    """All message strategies for a schema, answers left to best response.

    For every strategy and promise pair, ``cells[s, k]`` identifies the
    (answerer input, transcript) cell the pair lands in; the optimal answer
    function picks, per cell, the most likely correct value.
    """

    def __init__(self, g: Game, s: Schema):
        self.game, self.schema = g, s
        pairs = g.pairs()
        self.pairs = pairs
        xi = {x: i for i, x in enumerate(g.X)}
        yi = {y: i for i, y in enumerate(g.Y)}
        zi = {z: i for i, z in enumerate(g.Z)}
        ax = np.array([xi[x] for x, _ in pairs])
        by = np.array([yi[y] for _, y in pairs])
        self.z = np.array([zi[g(x, y)] for x, y in pairs])
        per_round = []
        size = 1
        n_prefix = 1
        for r, length in enumerate(s.lengths):
            n_inputs = len(g.X) if s.speaker(r) == A else len(g.Y)
            entries = n_inputs * n_prefix
            options = (2 ** length) ** entries
            per_round.append((entries, options, length, n_prefix))
            size *= options
            n_prefix *= 2 ** length
            if size > ENUMERATION_CAP:
                break
        if size > ENUMERATION_CAP:
            raise ProtocolError(
                f"{s} on |X|={len(g.X)}, |Y|={len(g.Y)} has more than {ENUMERATION_CAP} "
                f"message strategies (at least {size})")
        self.size = size
        idx = np.arange(size)
        prefix = np.zeros((size, len(pairs)), dtype=np.int64)
        stride = 1
        for r, (entries, options, length, npre) in enumerate(per_round):
            code = (idx // stride) % options
            stride *= options
            digits = np.zeros((size, entries), dtype=np.int64)
            rem = code.copy()
            base = 2 ** length
            for e in range(entries):
                digits[:, e] = rem % base
                rem //= base
            own = ax if s.speaker(r) == A else by
            entry = own[None, :] * npre + prefix
            msg = np.take_along_axis(digits, entry, axis=1)
            prefix = prefix * base + msg
        recv = ax if s.answerer == A else by
        n_recv = len(g.X) if s.answerer == A else len(g.Y)
        self.n_cells = n_recv * n_prefix
        self.cells = recv[None, :] * n_prefix + prefix
        self.nz = len(g.Z)

    def cell_mass(self, d: np.ndarray) -> np.ndarray:
        flat = (np.arange(self.size)[:, None] * self.n_cells + self.cells) * self.nz + self.z[None, :]
        w = np.broadcast_to(d, flat.shape)
        counts = np.bincount(flat.ravel(), weights=w.ravel(),
                             minlength=self.size * self.n_cells * self.nz)
        return counts.reshape(self.size, self.n_cells, self.nz)

    def best_response(self, d: np.ndarray) -> tuple[int, float, np.ndarray]:
        mass = self.cell_mass(d)
        errs = d.sum() - mass.max(axis=2).sum(axis=1)
        s = int(np.argmin(errs))
        answers = mass[s].argmax(axis=1)
        err_vec = (answers[self.cells[s]] != self.z).astype(float)
        return s, float(errs[s]), err_vec


@dataclass(frozen=True)
class MinimaxEstimate:
    value: float
    lower: float
    upper: float
    hardest_distribution: Dist
    iterations: int
    strategies: int


def minimax_value_estimate(g: Game, s: Schema, gap: float = 0.01, max_iter: int = 200_000,
                           eta: float | None = None) -> MinimaxEstimate:
    """Approximate the randomized worst-case error of the best protocol over ``s``.

    Multiplicative weights over promise pairs plays against exact best
    responses.  ``lower`` is the best response value at the hardest
    distribution seen (a certified lower bound); ``upper`` is the worst-case
    error of the averaged best responses (a certified upper bound).
    """
    space = _StrategySpace(g, s)
    n = len(space.pairs)
    eta = eta if eta is not None else min(0.5, math.sqrt(8 * math.log(max(n, 2)) / 1000))
    logw = np.zeros(n)
    avg_err = np.zeros(n)
    lower, hardest = -1.0, None
    upper = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        d = np.exp(logw - logw.max())
        d /= d.sum()
        _, val, err_vec = space.best_response(d)
        if val > lower:
            lower, hardest = val, d
        avg_err += (err_vec - avg_err) / it
        upper = float(avg_err.max())
        if upper - lower <= gap:
            break
        logw += eta * err_vec
    return MinimaxEstimate((lower + upper) / 2, lower, upper,
                           Dist(space.pairs, hardest), it, space.size)


def minimax_value_exact(g: Game, s: Schema) -> tuple[float, Dist]:
    """Exact game value by linear programming over the enumerated strategies.

    Maximize v subject to v <= sum_cells w[s, c] and w[s, c] <= (mass in c
    answered wrong by z) for every strategy s, cell c and answer z.
    """
    from scipy.optimize import linprog
    from scipy.sparse import coo_matrix

    space = _StrategySpace(g, s)
    n, size, ncell, nz = len(space.pairs), space.size, space.n_cells, space.nz
    used = np.unique(np.arange(size)[:, None] * ncell + space.cells)
    wid = {int(k): i for i, k in enumerate(used)}
    nw = len(used)
    nvar = n + 1 + nw  # d, v, w
    rows, cols, vals = [], [], []
    # v - sum_c w[s, c] <= 0
    by_strategy = used // ncell
    for k, key in enumerate(used):
        rows.append(int(by_strategy[k]))
        cols.append(n + 1 + k)
        vals.append(-1.0)
    for st in range(size):
        rows.append(st)
        cols.append(n)
        vals.append(1.0)
    r = size
    # w[s, c] - sum_{p in c, z(p) != z'} d_p <= 0
    for key in used:
        st, c = divmod(int(key), ncell)
        members = np.flatnonzero(space.cells[st] == c)
        for zz in range(nz):
            rows.append(r)
            cols.append(n + 1 + wid[int(key)])
            vals.append(1.0)
            for p_ in members:
                if space.z[p_] != zz:
                    rows.append(r)
                    cols.append(int(p_))
                    vals.append(-1.0)
            r += 1
    a_ub = coo_matrix((vals, (rows, cols)), shape=(r, nvar)).tocsr()
    b_ub = np.zeros(r)
    a_eq = np.zeros((1, nvar))
    a_eq[0, :n] = 1
    c = np.zeros(nvar)
    c[n] = -1
    bounds = [(0, None)] * n + [(None, None)] + [(0, None)] * nw
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise ProtocolError(f"linear program failed: {res.message}")
    d = np.clip(res.x[:n], 0, None)
    return float(-res.fun), Dist(space.pairs, d / d.sum())


# Seeded random instances for property checks.

def random_game(rng: np.random.Generator, nx: int, ny: int, nz: int = 2) -> Game:
    X, Y = range(nx), range(ny)
    return Game(X, Y, {(x, y): int(rng.integers(nz)) for x in X for y in Y}, range(nz))


def random_fraction_dist(rng: np.random.Generator, outcomes, denominator: int = 16,
                         sparsity: float = 0.0) -> Dist:
    """Random law with rational probabilities on a grid of ``1/denominator``."""
    outcomes = tuple(outcomes)
    k = len(outcomes)
    keep = rng.random(k) >= sparsity
    keep[rng.integers(k)] = True
    live = np.flatnonzero(keep)
    counts = np.zeros(k, dtype=int)
    counts[live] = 1 + rng.multinomial(denominator - len(live), [1 / len(live)] * len(live)) \
        if denominator > len(live) else 1
    total = int(counts.sum())
    return Dist(outcomes, [Fraction(int(c), total) for c in counts])


def random_private_protocol(rng: np.random.Generator, g: Game, schema: Schema,
                            alice_coins: int = 1, bob_coins: int = 1,
                            input_free_first: bool = False) -> PrivProtocol:
    """Table protocol with independent random entries and random rational coins.

    With ``input_free_first`` the first message reads only the starter's coin,
    so it carries no information about the input.
    """
    coin_a = random_fraction_dist(rng, range(alice_coins))
    coin_b = random_fraction_dist(rng, range(bob_coins))
    coins = {A: coin_a.outcomes, B: coin_b.outcomes}
    inputs = {A: g.X, B: g.Y}
    tables = []
    prefixes: list = [()]
    for r, length in enumerate(schema.lengths):
        side = schema.speaker(r)
        msgs = bitstrings(length)
        table = {}
        for c in coins[side]:
            shared = {tr: msgs[rng.integers(len(msgs))] for tr in prefixes}
            for i in inputs[side]:
                for tr in prefixes:
                    if input_free_first and r == 0:
                        table[(i, c, tr)] = shared[tr]
                    else:
                        table[(i, c, tr)] = msgs[rng.integers(len(msgs))]
        tables.append(table)
        prefixes = [tr + (m,) for tr in prefixes for m in msgs]
    side = schema.answerer
    answers = {(i, c, tr): g.Z[rng.integers(len(g.Z))]
               for i in inputs[side] for c in coins[side] for tr in prefixes}
    return PrivProtocol(schema, tuple(_dict_lookup(t) for t in tables), _dict_lookup(answers),
                        coin_a, coin_b)


def _dict_lookup(table: dict) -> Callable:
    return lambda i, c, tr: table[(i, c, tr)]
