import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cclab import proto
from cclab.info import Dist
from cclab.proto import (A, B, DetProtocol, Game, PrivProtocol, ProtocolError, PromiseError,
                         PubProtocol, Schema)


def brute_error(p: PrivProtocol, g: Game, d: Dist) -> Fraction:
    """Reference enumeration written independently of the library's evaluator."""
    total = 0
    for (x, y), w in zip(d.outcomes, d.probs):
        ca_law, cb_law = p.alice_coins(x), p.bob_coins(y)
        for (ca, pa), (cb, pb) in itertools.product(zip(ca_law.outcomes, ca_law.probs),
                                                    zip(cb_law.outcomes, cb_law.probs)):
            tr = ()
            for r, f in enumerate(p.messages):
                own = (x, ca) if r % 2 == (0 if p.schema.starter == A else 1) else (y, cb)
                tr += (f(*own, tr),)
            last_a = p.schema.t and p.schema.speaker(p.schema.t - 1) == A
            own = (y, cb) if (p.schema.t == 0 or last_a) else (x, ca)
            total += w * pa * pb * (p.answer(*own, tr) != g(x, y))
    return total


def equality(bits):
    X = ["".join(b) for b in itertools.product("01", repeat=bits)]
    return Game.from_function(X, X, lambda x, y: int(x == y))


def gt(bits):
    X = ["".join(b) for b in itertools.product("01", repeat=bits)]
    return Game.from_function(X, X, lambda x, y: int(x > y))


def test_schema_rules():
    s = Schema(A, (2, 3, 1))
    assert [s.speaker(r) for r in range(3)] == [A, B, A]
    assert s.answerer == B
    assert s.tail() == Schema(B, (3, 1))
    assert str(s) == "[3; 2, 3, 1]^A"
    assert Schema(A).answerer == B
    assert Schema(B, (1,)).answerer == A
    with pytest.raises(ProtocolError):
        Schema("C")
    with pytest.raises(ProtocolError):
        Schema(A, (0,))
    with pytest.raises(ProtocolError):
        Schema(A).tail()


def test_promise_enforced():
    g = Game.from_function((0, 1), (0, 1), lambda x, y: x ^ y, promise=lambda x, y: x <= y)
    assert not g.promise(1, 0)
    with pytest.raises(PromiseError):
        g(1, 0)
    p = DetProtocol(Schema(A, (1,)), (lambda x, tr: str(x),), lambda y, tr: int(tr[0]) ^ y)
    with pytest.raises(PromiseError):
        proto.evaluate(p, 1, 0, g)
    assert proto.distributional_error(p, g, worst_case=True) == 0


def test_message_length_checked():
    p = DetProtocol(Schema(A, (2,)), (lambda x, tr: "1",), lambda y, tr: 0)
    with pytest.raises(ProtocolError):
        p.run(0, 0)


def test_trivial_equality_protocol_is_exact():
    g = equality(2)
    p = DetProtocol(Schema(A, (2,)), (lambda x, tr: x,), lambda y, tr: int(tr[0] == y))
    assert proto.distributional_error(p, g, worst_case=True) == 0


def test_public_coin_error_is_mixture():
    g = equality(1)
    right = DetProtocol(Schema(A, (1,)), (lambda x, tr: x,), lambda y, tr: int(tr[0] == y))
    wrong = DetProtocol(Schema(A, (1,)), (lambda x, tr: x,), lambda y, tr: int(tr[0] != y))
    pub = PubProtocol(((Fraction(3, 4), right), (Fraction(1, 4), wrong)))
    assert proto.distributional_error(pub, g, g.uniform()) == Fraction(1, 4)
    assert proto.fix_public_coin(pub, g, g.uniform()).answer is not None
    fixed = proto.fix_public_coin(pub, g, g.uniform())
    assert proto.distributional_error(fixed, g, g.uniform()) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exact_error_matches_reference(seed):
    rng = np.random.default_rng(seed)
    g = proto.random_game(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
    t = int(rng.integers(0, 4))
    schema = Schema(A if rng.random() < 0.5 else B,
                    tuple(int(v) for v in rng.integers(1, 3, size=t)))
    p = proto.random_private_protocol(rng, g, schema, 3, 2)
    d = proto.random_fraction_dist(rng, g.pairs(), 20)
    assert proto.distributional_error(p, g, d) == brute_error(p, g, d)


def test_first_message_information_of_sent_input():
    g = equality(2)
    p = DetProtocol(Schema(A, (2,)), (lambda x, tr: x,), lambda y, tr: int(tr[0] == y))
    stats = proto.first_message_stats(p, g.uniform())
    assert stats.information == pytest.approx(2.0)
    assert stats.average.prob("01") == Fraction(1, 4)
    silent = DetProtocol(Schema(A, (1,)), (lambda x, tr: "0",), lambda y, tr: 1)
    assert proto.first_message_stats(silent, g.uniform()).information == pytest.approx(0.0)


def test_transport_preserves_errors():
    rng = np.random.default_rng(4)
    g = proto.random_game(rng, 3, 3)
    p = proto.random_private_protocol(rng, g, Schema(B, (1, 2)), 2, 2)
    # Relabel inputs: new Alice inputs are letters, new Bob inputs are negatives.
    letters = "abc"
    g2 = Game(letters, (0, -1, -2), {(letters[x], -y): z for (x, y), z in g.table.items()})
    q = proto.transport(p, letters.index, lambda y: -y)
    assert q.schema == p.schema
    old = proto.error_profile(p, g)
    new = proto.error_profile(q, g2)
    assert all(new[(letters[x], -y)] == e for (x, y), e in old.items())


def test_json_round_trip_preserves_profile():
    rng = np.random.default_rng(8)
    g = proto.random_game(rng, 3, 2)
    p = proto.random_private_protocol(rng, g, Schema(A, (1, 1, 2)), 2, 4)
    obj = json.loads(json.dumps(proto.protocol_to_json(p, g)))
    q = proto.protocol_from_json(obj)
    g2 = Game.from_json(json.loads(json.dumps(g.to_json())))
    assert proto.error_profile(q, g2) == proto.error_profile(p, g)
    d = proto.random_fraction_dist(rng, g.pairs())
    assert proto.distribution_from_json(proto.distribution_to_json(d)).probs == d.probs


def test_zero_round_equality_value_is_one_half():
    """Bob alone cannot tell x = y from x != y: the game value is 1/2 by hand."""
    g = equality(1)
    value, hardest = proto.minimax_value_exact(g, Schema(A))
    assert value == pytest.approx(0.5, abs=1e-9)
    est = proto.minimax_value_estimate(g, Schema(A))
    assert abs(est.value - 0.5) <= 0.01


def test_one_bit_message_solves_one_bit_equality():
    value, _ = proto.minimax_value_exact(equality(1), Schema(A, (1,)))
    assert value == pytest.approx(0.0, abs=1e-9)


def test_minimax_estimate_brackets_exact_value():
    g = gt(2)
    s = Schema(A, (1, 1))
    exact, hardest = proto.minimax_value_exact(g, s)
    est = proto.minimax_value_estimate(g, s)
    assert est.lower - 1e-9 <= exact <= est.upper + 1e-9
    assert abs(est.value - exact) <= 0.01
    assert sum(hardest.probs) == pytest.approx(1.0)
