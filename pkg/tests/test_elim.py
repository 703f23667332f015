import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cclab import elim, proto
from cclab.info import Dist
from cclab.proto import A, B, DetProtocol, Game, PrivProtocol, ProtocolError, Schema

LN2 = math.log(2)


def equality1():
    return Game.from_function("01", "01", lambda x, y: int(x == y))


def sends_input():
    return DetProtocol(Schema(A, (1,)), (lambda x, tr: x,), lambda y, tr: int(tr[0] == y))


def test_reduction_cost_formula():
    assert elim.reduction_cost(0) == 0
    assert elim.reduction_cost(1) == pytest.approx(0.5 * math.sqrt(2 * LN2))


def test_round_reduce_pays_for_a_fully_informative_message():
    g = equality1()
    red = elim.round_reduce(sends_input(), g, g.uniform())
    assert red.q.schema == Schema(B, ())
    assert red.input_error == 0
    assert red.information == pytest.approx(1.0)
    # Any zero-round protocol errs at least 1/2 here, and the bound allows 0.5887.
    assert red.output_error >= elim.zero_round_optimum(g, g.uniform()) == Fraction(1, 2)
    assert red.holds


def test_zero_round_optimum_by_hand():
    g = Game.from_function((0, 1, 2), (0, 1), lambda x, y: int(x > y))
    d = Dist.uniform(g.pairs())
    # y = 0: answers 0,1,1 -> best 1 with one miss; y = 1: answers 0,0,1 -> one miss.
    assert elim.zero_round_optimum(g, d) == Fraction(2, 6)


def test_stage1_keeps_error_when_message_is_input_free():
    rng = np.random.default_rng(0)
    g = proto.random_game(rng, 3, 3)
    p = proto.random_private_protocol(rng, g, Schema(A, (1, 1)), 4, 2, input_free_first=True)
    d = proto.random_fraction_dist(rng, g.pairs())
    regenerated = elim.stage1_regenerate(p, d)
    assert proto.distributional_error(regenerated, g, d) == proto.distributional_error(p, g, d)


def test_stage1_first_message_follows_average_law():
    rng = np.random.default_rng(1)
    g = proto.random_game(rng, 4, 2)
    p = proto.random_private_protocol(rng, g, Schema(A, (2, 1)), 8, 1)
    d = proto.random_fraction_dist(rng, g.pairs())
    avg = proto.first_message_stats(p, d).average
    regenerated = elim.stage1_regenerate(p, d)
    for x in g.X:
        assert proto.first_message_law(regenerated, x).probs == avg.probs


def test_stage2_rejects_input_dependent_first_message():
    g = equality1()
    with pytest.raises(ProtocolError):
        elim.stage2_publicize_fix(sends_input(), g, g.uniform())


def test_bob_first_protocol_rejected():
    g = equality1()
    p = DetProtocol(Schema(B, (1,)), (lambda y, tr: y,), lambda x, tr: int(tr[0] == x))
    with pytest.raises(ProtocolError):
        elim.round_reduce(p, g, g.uniform())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_round_reduce_property(seed, input_free):
    rng = np.random.default_rng(seed)
    g = proto.random_game(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
    lengths = tuple(int(v) for v in rng.integers(1, 3, size=int(rng.integers(1, 4))))
    p = proto.random_private_protocol(rng, g, Schema(A, lengths), int(rng.integers(1, 9)),
                                      int(rng.integers(1, 4)), input_free_first=input_free)
    d = proto.random_fraction_dist(rng, g.pairs(), 32)
    red = elim.round_reduce(p, g, d)
    assert red.q.schema == Schema(A, lengths).tail()
    assert red.output_error <= red.bound + 1e-9
    if input_free:
        assert red.information == pytest.approx(0.0, abs=1e-12)
        assert red.output_error <= red.input_error


def test_elimination_bound_values():
    assert elim.elimination_bound(1, 1) == pytest.approx(0.5 * math.sqrt(2 * LN2))
    assert elim.elimination_bound(2, 8) == pytest.approx(0.294353, abs=1e-6)


def test_lifted_game_shape():
    g = Game.from_function((0, 1, 2), "ab", lambda x, y: (x + len(y)) % 2)
    lg = elim.lift_game(g, 2, A)
    assert len(lg.X) == 9
    assert len(lg.Y) == 2 * (1 + 3)
    assert lg(((1, 2)), ("a", 2, (1,))) == g(2, "a")
    assert not lg.promise((1, 2), ("a", 2, (0,)))
    lb = elim.lift_game(g, 2, B)
    assert len(lb.Y) == 4 and len(lb.X) == 3 * (1 + 2)


def test_dstar_marginals():
    rng = np.random.default_rng(3)
    g = proto.random_game(rng, 3, 2)
    d = proto.random_fraction_dist(rng, g.pairs(), 12)
    n = 3
    dstar = elim.build_dstar(d, n)
    assert sum(dstar.probs) == 1
    dx = proto.input_marginal(d, A)
    # Pair (x_i, y) follows d; every other coordinate follows the X-marginal.
    pair_law, other_law = {}, {}
    for (xs, (y, i, pre)), w in dstar.items():
        assert xs[:i - 1] == pre
        pair_law[(xs[i - 1], y)] = pair_law.get((xs[i - 1], y), 0) + w
        j = (i % n) + 1
        other_law[xs[j - 1]] = other_law.get(xs[j - 1], 0) + w
    assert all(pair_law.get(k, 0) == w for k, w in d.items())
    assert all(other_law.get(x, 0) == w for x, w in dx.items())


def test_derived_protocol_averages_to_lifted_error():
    """Weighted errors of the restricted protocols recover the D* error exactly."""
    rng = np.random.default_rng(5)
    g = proto.random_game(rng, 2, 3)
    d = proto.random_fraction_dist(rng, g.pairs(), 16)
    n = 2
    pub = elim.random_lifted_protocol(rng, g, n)
    lifted = elim.lift_game(g, n)
    dstar = elim.build_dstar(d, n)
    p_star = proto.fix_public_coin(pub, lifted, dstar)
    dx = proto.input_marginal(d, A)
    total = 0
    for i in range(1, n + 1):
        for prefix in itertools.product(g.X, repeat=i - 1):
            w = Fraction(1, n)
            for v in prefix:
                w *= dx.prob(v)
            if w:
                total += w * proto.distributional_error(
                    elim.derive_restricted(p_star, i, prefix, d, n), g, d)
    assert total == proto.distributional_error(p_star, lifted, dstar)


def test_eliminate_round_report():
    rng = np.random.default_rng(7)
    g = proto.random_game(rng, 3, 3)
    d = proto.random_fraction_dist(rng, g.pairs(), 24)
    pub = elim.random_lifted_protocol(rng, g, 3, t=3, l1=2)
    rep = elim.eliminate_round(pub, g, d, 3)
    assert rep.protocol.schema == Schema(B, pub.schema.lengths[1:])
    assert rep.holds
    assert rep.delta <= Fraction(1, 3)
    assert rep.expected_information == pytest.approx(rep.lifted_information / 3, abs=1e-12)
    assert sum(c.weight for c in rep.candidates) == 1
    assert proto.distributional_error(rep.protocol, g, d) == rep.achieved_error
    assert set(rep.to_json()) >= {"delta", "bound", "achieved_error", "candidates"}


def test_eliminate_round_refuses_bad_protocols():
    g = equality1()
    # Always answering "different" errs with certainty on equal pairs.
    always_wrong = DetProtocol(
        Schema(A, (1, 1)), (lambda xs, tr: "0", lambda v, tr: "0"), lambda xs, tr: 0)
    with pytest.raises(ProtocolError):
        elim.eliminate_round(always_wrong, g, g.uniform(), 1)
