"""Seeded property suites shared by ``cclab verify`` and the acceptance tests.

Each check returns a :class:`Check` with the number of instances examined,
the largest residual (how far the worst instance came to violating the
property; positive means a violation) and a few failing examples.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cellprobe as cp
from . import elim, games, info, proto, qinfo

TOL = 1e-9
Q_TOL = 1e-8


@dataclass
class Check:
    name: str
    checked: int = 0
    worst: float = -math.inf
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def record(self, residual: float, tol: float, example=None) -> None:
        """Count one instance; it fails when ``residual > tol``."""
        self.checked += 1
        self.worst = max(self.worst, float(residual))
        if residual > tol and len(self.failures) < 5:
            self.failures.append(example if example is not None else self.checked - 1)

    @property
    def passed(self) -> bool:
        return not self.failures and self.checked > 0

    def to_json(self) -> dict:
        return {"name": self.name, "checked": self.checked, "passed": self.passed,
                "worst_residual": None if self.worst == -math.inf else self.worst,
                "failures": [repr(f) for f in self.failures],
                "seconds": round(self.seconds, 3), **self.details}


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        out = fn(*args, **kwargs)
        elapsed = time.perf_counter() - start
        for check in out if isinstance(out, list) else [out]:
            check.seconds = elapsed
        return out
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# Classical information.

@_timed
def average_encoding(count: int = 1000, seed: int = 0, max_size: int = 8) -> Check:
    rng = np.random.default_rng(seed)
    c = Check("average encoding (classical)")
    for k in range(count):
        nx, nm = rng.integers(1, max_size + 1, size=2)
        j = info.random_joint(rng, int(nx), int(nm), sparsity=0.3 * (k % 2))
        gap = info.average_encoding_gap(j)
        c.record(gap.lhs - gap.rhs, TOL, k)
    return c


@_timed
def pinsker(count: int = 1000, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    c = Check("Pinsker")
    for k in range(count):
        size = int(rng.integers(2, 9))
        p = info.random_dist(rng, range(size))
        q = info.random_dist(rng, range(size))
        c.record(info.l1_distance(p, q) - info.pinsker_bound(p, q), TOL, k)
    return c


@_timed
def chain_rules(count: int = 1000, seed: int = 0) -> Check:
    """Both chain-rule identities on random joints of (X, Y, Z)."""
    rng = np.random.default_rng(seed)
    c = Check("chain rules")
    mi = info.mutual_information_nd
    for k in range(count):
        shape = tuple(int(v) for v in rng.integers(2, 5, size=3))
        p = rng.dirichlet(np.ones(np.prod(shape))).reshape(shape)
        X, Y, Z = 0, 1, 2
        first = mi(p, (X, Y), (Z,)) - (mi(p, (X,), (Z,)) + mi(p, (Y,), (Z, X)) - mi(p, (X,), (Y,)))
        second = mi(p, (Y,), (Z, X)) - (mi(p, (X,), (Y,))
                                        + info.conditional_mutual_information(p, (Y,), (Z,), (X,)))
        c.record(max(abs(first), abs(second)), TOL, k)
    return c


# Quantum facts.

@_timed
def quantum_facts(count: int = 500, seed: int = 0, max_dim: int = 6) -> list:
    rng = np.random.default_rng(seed)
    names = ["BleqS", "measurement contractivity", "relative entropy monotonicity",
             "Fuchs-Caves one-sided", "Fuchs-Caves attained", "pure-state trace distance"]
    checks = {n: Check(n) for n in names}
    for k in range(count):
        d = int(rng.integers(2, max_dim + 1))
        rho = qinfo.random_density(rng, d)
        sigma = qinfo.random_density(rng, d)
        f = qinfo.fidelity(rho, sigma)
        s = qinfo.q_relative_entropy(rho, sigma)
        checks["BleqS"].record((1 - f) - info.LN2 / 2 * s, Q_TOL, k)
        povm = qinfo.random_povm(rng, d, int(rng.integers(2, 2 * d + 1)))
        p1, p2 = qinfo.measure(rho, povm), qinfo.measure(sigma, povm)
        checks["measurement contractivity"].record(
            info.l1_distance(p1, p2) - qinfo.trace_distance(rho, sigma), Q_TOL, k)
        checks["relative entropy monotonicity"].record(
            info.relative_entropy(p1, p2) - s, Q_TOL, k)
        vn = qinfo.POVM.von_neumann(qinfo.random_unitary(rng, d))
        b = qinfo.bhattacharyya(qinfo.measure(rho, vn), qinfo.measure(sigma, vn))
        checks["Fuchs-Caves one-sided"].record(f - b, Q_TOL, k)
        best = qinfo.fuchs_caves_measurement(rho, sigma)
        b_best = qinfo.bhattacharyya(qinfo.measure(rho, best), qinfo.measure(sigma, best))
        checks["Fuchs-Caves attained"].record(abs(b_best - f), 1e-4, k)
        psi, phi = qinfo.random_pure(rng, d), qinfo.random_pure(rng, d)
        formula = 2 * math.sqrt(max(0.0, 1 - abs(psi.overlap(phi)) ** 2))
        checks["pure-state trace distance"].record(
            abs(qinfo.pure_trace_distance(psi, phi) - formula), Q_TOL, k)
    return list(checks.values())


@_timed
def quantum_average_encoding(count: int = 500, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    c = Check("average encoding (quantum)")
    for k in range(count):
        e = qinfo.random_ensemble(rng, int(rng.integers(2, 5)), 2)
        cert = qinfo.q_average_encoding_certificate(e, [qinfo.purify(s) for s in e.states])
        c.record(cert.lhs - cert.rhs, 1e-6, k)
    return c


# Protocol transforms.

def random_reduce_instance(rng: np.random.Generator, zero_info: bool = False):
    nx, ny = (int(v) for v in rng.integers(1, 9, size=2))
    t = int(rng.integers(1, 4))
    lengths = tuple(int(v) for v in rng.integers(1, 3, size=t))
    g = proto.random_game(rng, nx, ny)
    d = proto.random_fraction_dist(rng, g.pairs(), 64, sparsity=0.3)
    coins = [int(2 ** rng.integers(0, 7)), int(2 ** rng.integers(0, 3))]
    p = proto.random_private_protocol(rng, g, proto.Schema(proto.A, lengths), *coins,
                                      input_free_first=zero_info)
    return p, g, d


@_timed
def round_reduce(count: int = 200, seed: int = 0) -> Check:
    """Round count, starter flip and the error bound of one round reduction."""
    rng = np.random.default_rng(seed)
    c = Check("round reduction")
    zero = Check("round reduction, zero information")
    for k in range(count):
        p, g, d = random_reduce_instance(rng, zero_info=(k % 4 == 3))
        red = elim.round_reduce(p, g, d)
        shape_ok = (red.q.schema.t == p.schema.t - 1
                    and red.q.schema.lengths == p.schema.lengths[1:]
                    and (red.q.schema.t == 0 or red.q.schema.starter == proto.B))
        residual = float(red.output_error) - red.bound
        c.record(residual if shape_ok else math.inf, TOL, k)
        if red.information <= 1e-12:
            zero.record(float(red.output_error - red.input_error), 1e-12, k)
    c.details["zero_information_instances"] = zero.checked
    c.details["zero_information_worst"] = zero.worst
    if zero.failures:
        c.failures.extend(("zero-info", f) for f in zero.failures)
    return c


def random_elimination_instance(rng: np.random.Generator):
    nx, ny = (int(v) for v in rng.integers(2, 5, size=2))
    n = int(rng.integers(1, 5))
    t = int(rng.integers(2, 4))
    l1 = int(rng.integers(1, 3))
    g = proto.random_game(rng, nx, ny)
    d = proto.random_fraction_dist(rng, g.pairs(), 32, sparsity=0.2)
    p = elim.random_lifted_protocol(rng, g, n, t, l1)
    return p, g, d, n


@_timed
def round_elimination(count: int = 50, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    c = Check("round elimination")
    info_gap = 0.0
    for k in range(count):
        p, g, d, n = random_elimination_instance(rng)
        rep = elim.eliminate_round(p, g, d, n)
        c.record(float(rep.achieved_error) - rep.bound, TOL, k)
        info_gap = max(info_gap, abs(rep.expected_information - rep.lifted_information / n))
    c.details["information_budget_residual"] = info_gap
    return c


# Reductions and structures.

@_timed
def reductions(seed: int = 0, sets_per_n: int = 10) -> Check:
    c = Check("reductions")
    small = games.par_lifted_a(2, 2, 2)
    maps = games.rankred1_transform(4, 2)
    for a, b in small.pairs():
        c.record(int(games.parity(maps.alice(a), maps.bob(b)) != small(a, b)), 0, ("rr1", a, b))
    small = games.par_lifted_b(2, 1, 2)
    maps = games.rankred2_transform(4, 2, 2)
    for a, b in small.pairs():
        c.record(int(games.parity(maps.alice(a), maps.bob(b)) != small(a, b)), 0, ("rr2", a, b))
    small = games.gt_lifted(2, 2)
    maps = games.gt_self_reduce(4, 2)
    for a, b in small.pairs():
        c.record(int((maps.alice(a) > maps.bob(b)) != small(a, b)), 0, ("gt", a, b))
    rng = random.Random(seed)
    for n in range(1, 9):
        sch = cp.pred_to_rankparity(cp.xfast_scheme(256, n, seed), cp.fks_rank_scheme(256, n, seed))
        for S in cp.random_sets(rng, 256, n, sets_per_n):
            table = sch.storage(S)
            bits = [format(y, "08b") for y in S]
            for x in range(256):
                got = cp.run_query(sch, S, x, table).answer
                want = games.par_eval(games.ParInstance(8, n, format(x, "08b"), frozenset(bits)))
                c.record(int(got != want), 0, ("parity", S, x))
    return c


@_timed
def predecessor_structures(seed: int = 0, sets_per_n: int = 100, max_m: int = 1024) -> Check:
    rng = random.Random(seed)
    c = Check("predecessor structures")
    worst_probes = {}
    m = 2
    while m <= max_m:
        for n in range(1, min(8, m) + 1):
            sets = cp.random_sets(rng, m, n, sets_per_n)
            for kind in ("sorted-array", "xfast"):
                sch = cp.build_predecessor_scheme(kind, m, n, seed)
                rep = cp.verify_scheme(sch, sets)
                c.record(float(rep.max_error), 0, (kind, m, n, rep.witness))
                key = (kind, m)
                worst_probes[key] = max(worst_probes.get(key, 0), rep.max_probes)
        m *= 2
    c.details["max_probes"] = {f"{k}@{m}": v for (k, m), v in sorted(worst_probes.items())}
    return c


@_timed
def fingerprint_exact(n: int = 4, rounds: int = 1) -> Check:
    fp = games.FingerprintProtocol(n, rounds)
    c = Check(f"GT fingerprint exact n={n} t'={rounds}")
    for (x, y), e in fp.exact_profile().items():
        c.record(float(e - Fraction(1, 3)), 0, (x, y))
    return c


SUITES = {
    "info": lambda seed, scale: [average_encoding(int(1000 * scale), seed), pinsker(
        int(1000 * scale), seed), chain_rules(int(1000 * scale), seed)],
    "qinfo": lambda seed, scale: quantum_facts(int(500 * scale), seed) + [
        quantum_average_encoding(int(500 * scale), seed)],
    "elim": lambda seed, scale: [round_reduce(max(1, int(200 * scale)), seed),
                                 round_elimination(max(1, int(50 * scale)), seed)],
    "games": lambda seed, scale: [reductions(seed, max(1, int(10 * scale))),
                                  fingerprint_exact()],
    "cellprobe": lambda seed, scale: [predecessor_structures(seed, max(1, int(100 * scale)))],
}


def run_suites(names=None, seed: int = 0, scale: float = 1.0) -> list:
    out = []
    for name in names or SUITES:
        for check in SUITES[name](seed, scale):
            check.details.setdefault("suite", name)
            out.append(check)
    return out
