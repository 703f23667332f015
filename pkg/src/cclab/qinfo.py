"""Small-dimension density matrix numerics.

Everything here works on dense complex matrices of dimension at most
``MAX_DIM`` and routes spectral work through Hermitian eigendecompositions
with eigenvalues below ``EIG_CLAMP`` treated as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .info import LN2, Dist

MAX_DIM = 16
EIG_CLAMP = 1e-12
HERM_TOL = 1e-10
POVM_TOL = 1e-9
PURIFY_TOL = 1e-8


class QuantumStateError(ValueError):
    pass


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise QuantumStateError(f"expected a square matrix, got shape {m.shape}")
    return m


def _eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    vals = np.where(vals < EIG_CLAMP, 0.0, vals)
    return vals, vecs


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = _eigh(m)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def _trace_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(m, compute_uv=False).sum())


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, check: bool = True):
        m = _as_matrix(matrix)
        if check:
            d = m.shape[0]
            if not 1 <= d <= MAX_DIM:
                raise QuantumStateError(f"dimension {d} outside [1, {MAX_DIM}]")
            if np.abs(m - m.conj().T).max() > HERM_TOL:
                raise QuantumStateError("matrix is not Hermitian")
            if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -HERM_TOL:
                raise QuantumStateError("matrix is not positive semidefinite")
            if abs(np.trace(m) - 1) > HERM_TOL:
                raise QuantumStateError(f"trace {np.trace(m).real:.3g} != 1")
        m = m.copy()
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, amplitudes) -> "DensityMatrix":
        v = PureState(amplitudes).vector
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    @classmethod
    def basis(cls, dim: int, k: int) -> "DensityMatrix":
        v = np.zeros(dim)
        v[k] = 1
        return cls.pure(v)

    def eigh(self):
        return _eigh(self.matrix)

    def sqrt(self) -> np.ndarray:
        return _psd_sqrt(self.matrix)

    def to_json(self) -> list:
        return matrix_to_json(self.matrix)

    @classmethod
    def from_json(cls, rows) -> "DensityMatrix":
        return cls(matrix_from_json(rows))

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


class PureState:
    __slots__ = ("vector",)

    def __init__(self, amplitudes):
        v = np.asarray(amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(v) - 1) > HERM_TOL:
            raise QuantumStateError(f"state norm {np.linalg.norm(v):.6g} != 1")
        v = v.copy()
        v.setflags(write=False)
        self.vector = v

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def density(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.vector, other.vector))

    def reduced(self, system_dim: int) -> np.ndarray:
        """Partial trace over the ancilla (second) tensor factor."""
        a = self.vector.reshape(system_dim, -1)
        return a @ a.conj().T


class POVM:
    """List of PSD effects summing to the identity."""

    def __init__(self, elements: Sequence):
        els = [_as_matrix(e) for e in elements]
        if not els:
            raise QuantumStateError("empty POVM")
        d = els[0].shape[0]
        for e in els:
            if e.shape != (d, d):
                raise QuantumStateError("POVM elements differ in dimension")
            if np.abs(e - e.conj().T).max() > HERM_TOL:
                raise QuantumStateError("POVM element is not Hermitian")
            if np.linalg.eigvalsh((e + e.conj().T) / 2).min() < -HERM_TOL:
                raise QuantumStateError("POVM element is not PSD")
        if np.abs(sum(els) - np.eye(d)).max() > POVM_TOL:
            raise QuantumStateError("POVM elements do not sum to identity")
        self.elements = tuple(els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @classmethod
    def computational(cls, dim: int) -> "POVM":
        return cls.von_neumann(np.eye(dim))

    @classmethod
    def von_neumann(cls, basis) -> "POVM":
        """Projective measurement onto the columns of a unitary."""
        u = np.asarray(basis, dtype=complex)
        return cls([np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])])


@dataclass(frozen=True)
class CQEnsemble:
    """Classical label x with probability p_x and conditional state rho^x."""

    labels: tuple
    probs: tuple
    states: tuple

    def __post_init__(self):
        if not (len(self.labels) == len(self.probs) == len(self.states)):
            raise QuantumStateError("ensemble fields differ in length")
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1) > 1e-12:
            raise QuantumStateError("ensemble probabilities are not a distribution")
        if len({s.dim for s in self.states}) != 1:
            raise QuantumStateError("ensemble states differ in dimension")

    def average(self) -> DensityMatrix:
        return DensityMatrix(sum(p * s.matrix for p, s in zip(self.probs, self.states)))


def _same_dim(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dim != sigma.dim:
        raise QuantumStateError(f"dimension mismatch {rho.dim} vs {sigma.dim}")


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Trace norm of sqrt(rho) sqrt(sigma); 1 for equal states, 0 for orthogonal."""
    _same_dim(rho, sigma)
    return _trace_norm(rho.sqrt() @ sigma.sqrt())


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Sum of singular values of rho - sigma (range [0, 2])."""
    _same_dim(rho, sigma)
    return _trace_norm(rho.matrix - sigma.matrix)


def pure_trace_distance(psi: PureState, phi: PureState) -> float:
    return _trace_norm(psi.density() - phi.density())


def q_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr rho (log2 rho - log2 sigma); +inf if supp(rho) is not inside supp(sigma)."""
    _same_dim(rho, sigma)
    lam, u = rho.eigh()
    mu, v = sigma.eigh()
    overlap = np.abs(u.conj().T @ v) ** 2  # [i, j] = |<u_i|v_j>|^2
    weight = lam @ overlap  # <v_j| rho |v_j>
    if (weight[mu == 0] > EIG_CLAMP).any():
        return math.inf
    pos = lam > 0
    first = float(np.sum(lam[pos] * np.log2(lam[pos])))
    supp = mu > 0
    second = float(np.sum(weight[supp] * np.log2(mu[supp])))
    return max(first - second, 0.0)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    lam, _ = rho.eigh()
    lam = lam[lam > 0]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def cq_mutual_information(e: CQEnsemble) -> float:
    """I(X:M) = sum_x p_x S(rho^x || rho)."""
    rho = e.average()
    return float(sum(p * q_relative_entropy(s, rho)
                     for p, s in zip(e.probs, e.states) if p > 0))


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            out[:, k] = col * (abs(col[nz[0]]) / col[nz[0]])
    return out


def purify(rho: DensityMatrix) -> PureState:
    """Canonical purification sum_i sqrt(l_i) |u_i>|i> on C^d (x) C^d.

    Eigenvalues are taken in descending order and each eigenvector is
    rotated so its first nonzero amplitude is real and positive.
    """
    lam, vecs = rho.eigh()
    order = np.argsort(-lam, kind="stable")
    lam, vecs = lam[order], _phase_fix(vecs[:, order])
    d = rho.dim
    a = vecs * np.sqrt(lam)  # column i is sqrt(l_i) u_i
    psi = a.reshape(d, d)  # psi[s, k]: amplitude of |s>|k>
    v = psi.ravel()
    return PureState(v / np.linalg.norm(v))


def schmidt_coefficients(psi: PureState, system_dim: int) -> np.ndarray:
    return np.linalg.svd(psi.vector.reshape(system_dim, -1), compute_uv=False)


def check_purifies(psi: PureState, rho: DensityMatrix, tol: float = PURIFY_TOL) -> None:
    if psi.dim % rho.dim:
        raise QuantumStateError("purification dimension is not a multiple of dim(rho)")
    residual = _trace_norm(psi.reduced(rho.dim) - rho.matrix)
    if residual > tol:
        raise QuantumStateError(f"state does not purify rho (residual {residual:.3g})")


def align_purifications(psi: PureState, sigma: DensityMatrix) -> PureState:
    """Purification phi of sigma maximizing |<psi|phi>|, which then equals the fidelity.

    With psi reshaped to A (system x ancilla), A = sqrt(rho) W for a
    co-isometry W.  Writing sqrt(rho) sqrt(sigma) = U S V^dagger, the state
    B = sqrt(sigma) V U^dagger W gives Tr(A^dagger B) = Tr S.  Any other
    purification of sigma differs from B by a unitary on the ancilla.
    """
    rho_dim = sigma.dim
    if psi.dim % rho_dim:
        raise QuantumStateError("purification dimension is not a multiple of dim(rho)")
    anc = psi.dim // rho_dim
    if anc < rho_dim:
        raise QuantumStateError(f"ancilla dimension {anc} smaller than system {rho_dim}")
    a = psi.vector.reshape(rho_dim, anc)
    p, s, qh = np.linalg.svd(a, full_matrices=False)
    w = p @ qh  # co-isometry, a = (p diag(s) p^dagger) w
    sqrt_rho = (p * s) @ p.conj().T
    u, _, vh = np.linalg.svd(sqrt_rho @ sigma.sqrt())
    b = sigma.sqrt() @ vh.conj().T @ u.conj().T @ w
    v = b.ravel()
    return PureState(v / np.linalg.norm(v))


def measure(rho: DensityMatrix, m: POVM) -> Dist:
    if m.dim != rho.dim:
        raise QuantumStateError("POVM and state dimensions differ")
    probs = np.array([np.trace(e @ rho.matrix).real for e in m.elements])
    probs = np.clip(probs, 0.0, None)
    return Dist(range(len(probs)), probs / probs.sum())


def bhattacharyya(p: Dist, q: Dist) -> float:
    pa, qa = p.aligned(q)
    return float(np.sqrt(pa * qa).sum())


def fuchs_caves_measurement(rho: DensityMatrix, sigma: DensityMatrix) -> POVM:
    """Von Neumann measurement whose outcome fidelity equals fidelity(rho, sigma).

    Eigenbasis of sigma^{-1/2} (sqrt(sigma) rho sqrt(sigma))^{1/2} sigma^{-1/2};
    sigma must have full support.
    """
    _same_dim(rho, sigma)
    mu, v = sigma.eigh()
    if (mu <= 0).any():
        raise QuantumStateError("sigma must have full support")
    inv_sqrt = (v / np.sqrt(mu)) @ v.conj().T
    ss = sigma.sqrt()
    g = _psd_sqrt(ss @ rho.matrix @ ss)
    op = inv_sqrt @ g @ inv_sqrt
    _, basis = np.linalg.eigh((op + op.conj().T) / 2)
    return POVM.von_neumann(basis)


@dataclass(frozen=True)
class QEncodingCertificate:
    phis: tuple
    lhs: float
    rhs: float
    holds: bool


def q_average_encoding_certificate(e: CQEnsemble,
                                   psis: Sequence[PureState]) -> QEncodingCertificate:
    """Purifications phi^x of the average state close on average to the given psi^x."""
    if len(psis) != len(e.states):
        raise QuantumStateError("one purification per ensemble member required")
    for psi, rho_x in zip(psis, e.states):
        check_purifies(psi, rho_x)
    rho = e.average()
    phis = tuple(align_purifications(psi, rho) for psi in psis)
    lhs = float(sum(p * pure_trace_distance(psi, phi)
                    for p, psi, phi in zip(e.probs, psis, phis)))
    rhs = math.sqrt(4 * LN2 * cq_mutual_information(e))
    return QEncodingCertificate(phis, lhs, rhs, bool(lhs <= rhs + 1e-6))


# Random instances and serialization.

def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure(rng: np.random.Generator, dim: int) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_povm(rng: np.random.Generator, dim: int, outcomes: int) -> POVM:
    raw = []
    for _ in range(outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
    els = [inv_sqrt @ a @ inv_sqrt for a in raw]
    return POVM([(e + e.conj().T) / 2 for e in els])


def random_ensemble(rng: np.random.Generator, labels: int, dim: int) -> CQEnsemble:
    p = rng.dirichlet([1.0] * labels)
    states = tuple(random_density(rng, dim, rank=int(rng.integers(1, dim + 1)))
                   for _ in range(labels))
    return CQEnsemble(tuple(range(labels)), tuple(float(x) for x in p), states)


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])
