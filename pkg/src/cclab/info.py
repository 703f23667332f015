"""Classical information measures on finite distributions.

Distances follow the l1 convention ``sum |P(x) - Q(x)|``, which is twice the
usual total variation distance.  The constants in the average encoding and
Pinsker bounds below are stated for that convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

TOL = 1e-9
_SUM_TOL = 1e-12
LN2 = math.log(2)


class DistributionError(ValueError):
    """Raised for malformed or mismatched distributions."""


def _check_probs(probs: Sequence[Real]) -> None:
    for p in probs:
        if p < 0:
            raise DistributionError(f"negative probability {p}")
    total = sum(probs)
    if abs(total - 1) > _SUM_TOL:
        raise DistributionError(f"probabilities sum to {float(total)!r}, not 1")


@dataclass(frozen=True)
class Dist:
    """Probability vector over an ordered list of hashable outcomes.

    ``probs`` may hold floats or :class:`fractions.Fraction` values; the
    protocol machinery keeps fractions exact, information measures convert
    to double precision.
    """

    outcomes: tuple
    probs: tuple

    def __init__(self, outcomes: Iterable[Hashable], probs: Iterable[Real]):
        outcomes = tuple(outcomes)
        probs = tuple(probs)
        if len(outcomes) != len(probs):
            raise DistributionError("outcomes and probs differ in length")
        if len(set(outcomes)) != len(outcomes):
            raise DistributionError("duplicate outcome labels")
        if not outcomes:
            raise DistributionError("empty outcome set")
        _check_probs(probs)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_index", {o: i for i, o in enumerate(outcomes)})

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable], exact: bool = True) -> "Dist":
        outcomes = tuple(outcomes)
        p = Fraction(1, len(outcomes)) if exact else 1.0 / len(outcomes)
        return cls(outcomes, [p] * len(outcomes))

    @classmethod
    def point(cls, outcomes: Iterable[Hashable], at: Hashable) -> "Dist":
        outcomes = tuple(outcomes)
        return cls(outcomes, [Fraction(int(o == at)) for o in outcomes])

    @classmethod
    def from_mapping(cls, weights: Mapping[Hashable, Real]) -> "Dist":
        return cls(weights.keys(), weights.values())

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self):
        return iter(zip(self.outcomes, self.probs))

    def prob(self, outcome: Hashable) -> Real:
        i = self._index.get(outcome)
        return 0 if i is None else self.probs[i]

    def support(self) -> list:
        return [o for o, p in zip(self.outcomes, self.probs) if p > 0]

    def items(self):
        """(outcome, prob) pairs with positive probability."""
        return [(o, p) for o, p in zip(self.outcomes, self.probs) if p > 0]

    @property
    def array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for p in self.probs)

    def aligned(self, other: "Dist") -> tuple[np.ndarray, np.ndarray]:
        """Float vectors of both distributions over a shared outcome order."""
        if set(self.outcomes) != set(other.outcomes):
            raise DistributionError("distributions have different outcome sets")
        return self.array, np.array([float(other.prob(o)) for o in self.outcomes])

    def to_json(self) -> dict:
        return {"outcomes": [_jsonable(o) for o in self.outcomes],
                "probs": [_prob_to_json(p) for p in self.probs]}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Dist":
        return cls([_frozen(o) for o in obj["outcomes"]],
                   [_prob_from_json(p) for p in obj["probs"]])


@dataclass(frozen=True)
class JointDist:
    """Joint law of a pair (X, M) as a |X| x |M| matrix."""

    rows: tuple
    cols: tuple
    matrix: np.ndarray

    def __init__(self, rows: Iterable[Hashable], cols: Iterable[Hashable], matrix):
        rows, cols = tuple(rows), tuple(cols)
        mat = np.array([[float(v) for v in r] for r in matrix], dtype=float).reshape(
            len(rows), len(cols))
        if (mat < 0).any():
            raise DistributionError("negative joint probability")
        if abs(mat.sum() - 1.0) > _SUM_TOL:
            raise DistributionError(f"joint sums to {mat.sum()!r}, not 1")
        mat.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_conditionals(cls, marginal: Dist, conditionals: Mapping[Hashable, Dist]):
        """Build p_x * Pi^x(m) from a marginal on X and per-x laws of M."""
        cols: list = []
        for x in marginal.outcomes:
            for m in conditionals[x].outcomes:
                if m not in cols:
                    cols.append(m)
        mat = [[float(px) * float(conditionals[x].prob(m)) for m in cols]
               for x, px in zip(marginal.outcomes, marginal.probs)]
        return cls(marginal.outcomes, cols, mat)

    def row_marginal(self) -> Dist:
        return Dist(self.rows, self.matrix.sum(axis=1))

    def col_marginal(self) -> Dist:
        return Dist(self.cols, self.matrix.sum(axis=0))

    def to_json(self) -> dict:
        return {"rows": [_jsonable(r) for r in self.rows],
                "cols": [_jsonable(c) for c in self.cols],
                "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "JointDist":
        return cls([_frozen(r) for r in obj["rows"]], [_frozen(c) for c in obj["cols"]],
                   obj["matrix"])


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=float)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def entropy_of(p) -> float:
    """Shannon entropy in bits of an array of probabilities (any shape)."""
    return float(-_xlogx(np.asarray(p, dtype=float)).sum())


def entropy(d: Dist) -> float:
    return max(entropy_of(d.array), 0.0)


def mutual_information(j: JointDist) -> float:
    m = j.matrix
    return entropy_of(m.sum(axis=1)) + entropy_of(m.sum(axis=0)) - entropy_of(m)


def mutual_information_nd(p, a_axes: Sequence[int], b_axes: Sequence[int]) -> float:
    """I(A:B) for groups of axes of a joint probability array.

    Axes not named in either group are summed out first.
    """
    p = np.asarray(p, dtype=float)
    keep = tuple(sorted(set(a_axes) | set(b_axes)))
    drop = tuple(ax for ax in range(p.ndim) if ax not in keep)
    q = p.sum(axis=drop) if drop else p
    remap = {ax: i for i, ax in enumerate(keep)}
    a = tuple(remap[ax] for ax in a_axes)
    b = tuple(remap[ax] for ax in b_axes)
    pa = q.sum(axis=b)
    pb = q.sum(axis=a)
    return entropy_of(pa) + entropy_of(pb) - entropy_of(q)


def conditional_mutual_information(p, a_axes, b_axes, c_axes) -> float:
    """I(A:B | C) = E_c I((A:B) | C=c), computed slice by slice."""
    p = np.asarray(p, dtype=float)
    c_axes = tuple(c_axes)
    others = [ax for ax in range(p.ndim) if ax not in c_axes]
    moved = np.moveaxis(p, c_axes, range(len(c_axes)))
    flat = moved.reshape((-1,) + moved.shape[len(c_axes):])
    remap = {ax: i for i, ax in enumerate(others)}
    a = [remap[ax] for ax in a_axes]
    b = [remap[ax] for ax in b_axes]
    total = 0.0
    for block in flat:
        w = block.sum()
        if w > 0:
            total += w * mutual_information_nd(block / w, a, b)
    return total


def relative_entropy(p: Dist, q: Dist) -> float:
    """Kullback-Leibler divergence S(p||q) in bits; +inf on support violation."""
    pa, qa = p.aligned(q)
    nz = pa > 0
    if (qa[nz] == 0).any():
        return math.inf
    return max(float(np.sum(pa[nz] * np.log2(pa[nz] / qa[nz]))), 0.0)


def l1_distance(p: Dist, q: Dist) -> float:
    pa, qa = p.aligned(q)
    return float(np.abs(pa - qa).sum())


@dataclass(frozen=True)
class EncodingGap:
    lhs: float
    rhs: float
    holds: bool


def average_encoding_gap(j: JointDist) -> EncodingGap:
    """Compare sum_x p_x |Pi^x - Pi|_1 against sqrt((2 ln 2) I(X:M))."""
    m = j.matrix
    px = m.sum(axis=1)
    pi = m.sum(axis=0)
    lhs = 0.0
    for x in range(len(j.rows)):
        if px[x] > 0:
            lhs += px[x] * np.abs(m[x] / px[x] - pi).sum()
    rhs = math.sqrt(2 * LN2 * max(mutual_information(j), 0.0))
    return EncodingGap(float(lhs), rhs, bool(lhs <= rhs + TOL))


def pinsker_bound(p: Dist, q: Dist) -> float:
    """Right-hand side sqrt((2 ln 2) S(p||q)) of Pinsker's inequality (l1 form)."""
    return math.sqrt(2 * LN2 * relative_entropy(p, q))


def random_dist(rng: np.random.Generator, outcomes, alpha: float = 1.0,
                sparsity: float = 0.0) -> Dist:
    """Dirichlet-distributed law; ``sparsity`` zeroes a random share of entries."""
    outcomes = tuple(outcomes)
    w = rng.dirichlet([alpha] * len(outcomes))
    if sparsity > 0:
        mask = rng.random(len(outcomes)) < sparsity
        mask[rng.integers(len(outcomes))] = False
        w = np.where(mask, 0.0, w)
        w = w / w.sum()
    return Dist(outcomes, w)


def random_joint(rng: np.random.Generator, nx: int, nm: int,
                 sparsity: float = 0.0) -> JointDist:
    w = rng.dirichlet([1.0] * (nx * nm))
    if sparsity > 0:
        mask = rng.random(nx * nm) < sparsity
        mask[rng.integers(nx * nm)] = False
        w = np.where(mask, 0.0, w)
        w = w / w.sum()
    return JointDist(range(nx), range(nm), w.reshape(nx, nm))


# JSON helpers shared by the serializers of every module.

def _jsonable(v):
    if isinstance(v, (tuple, list)):
        return [_jsonable(u) for u in v]
    if isinstance(v, frozenset):
        return sorted(_jsonable(u) for u in v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _frozen(v):
    if isinstance(v, list):
        return tuple(_frozen(u) for u in v)
    return v


def _prob_to_json(p):
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}"
    return float(p)


def _prob_from_json(p):
    if isinstance(p, str):
        return Fraction(p)
    return p
