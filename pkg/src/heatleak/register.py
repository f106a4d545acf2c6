"""Exact linear-algebra substrate for small qubit registers.

Dense complex matrices throughout; registers are capped at MAX_QUBITS.
Conventions (fixed, relied upon by every other module):

* qubit 0 is the leftmost tensor factor,
* basis index bit of qubit k is bit (n-1-k) of the integer index, i.e.
  qubit 0 is the most significant bit of the computational-basis label,
* energies are dimensionless, E0 = 0 and E1 = 1 per qubit.
"""

from __future__ import annotations

import math

import numpy as np

MAX_QUBITS = 10

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = -1e-10
UNITARITY_TOL = 1e-12


class RegisterError(ValueError):
    """Invalid state, operator or qubit addressing."""


def _square_complex(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise RegisterError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise RegisterError("matrix entries must be finite")
    return m


def _num_qubits_for_dim(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim != 2**n:
        raise RegisterError(f"matrix dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise RegisterError(f"register of {n} qubits exceeds cap of {MAX_QUBITS}")
    return n


class DensityOperator:
    """Exact mixed state of an n-qubit register: Hermitian, trace-1, PSD matrix."""

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, matrix):
        m = _square_complex(matrix)
        n = _num_qubits_for_dim(m.shape[0])
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise RegisterError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise RegisterError(f"density matrix trace {np.trace(m)} != 1")
        if np.linalg.eigvalsh(m).min() < EIGENVALUE_TOL:
            raise RegisterError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityOperator(num_qubits={self.num_qubits})"


class UnitaryOperator:
    """Unitary on an n-qubit register (U U^dagger = 1 within UNITARITY_TOL)."""

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, matrix):
        m = _square_complex(matrix)
        n = _num_qubits_for_dim(m.shape[0])
        if np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > UNITARITY_TOL:
            raise RegisterError("matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("UnitaryOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"UnitaryOperator(num_qubits={self.num_qubits})"


def thermal_qubit(beta: float) -> DensityOperator:
    """Single-qubit thermal state diag(p0, 1-p0) with p0 = 1/(1 + e^(-beta)).

    beta = +inf gives the pure ground state, beta = -inf the pure excited
    state; both are handled exactly to avoid overflow in the exponential.
    """
    if math.isnan(beta):
        raise RegisterError("inverse temperature must not be NaN")
    if beta == math.inf:
        p0 = 1.0
    elif beta == -math.inf:
        p0 = 0.0
    elif beta >= 0:
        p0 = 1.0 / (1.0 + math.exp(-beta))
    else:
        # rewritten to keep the exponential argument non-positive
        p0 = math.exp(beta) / (1.0 + math.exp(beta))
    return DensityOperator(np.diag([p0, 1.0 - p0]))


def beta_from_ground_pop(p0: float) -> float:
    """Inverse temperature ln(p0 / (1 - p0)) of a two-level thermal state."""
    if math.isnan(p0) or not 0.0 <= p0 <= 1.0:
        raise RegisterError(f"ground population {p0} outside [0, 1]")
    if p0 == 1.0:
        return math.inf
    if p0 == 0.0:
        return -math.inf
    return math.log(p0 / (1.0 - p0))


def tensor(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Kronecker product a (x) b; qubit indices of b follow those of a."""
    if a.num_qubits + b.num_qubits > MAX_QUBITS:
        raise RegisterError("tensor product exceeds register cap")
    return DensityOperator(np.kron(a.matrix, b.matrix))


def _check_targets(targets, arity: int, num_qubits: int) -> tuple[int, ...]:
    t = tuple(int(q) for q in targets)
    if len(t) != arity:
        raise RegisterError(f"gate acts on {arity} qubits, got targets {t}")
    if len(set(t)) != len(t):
        raise RegisterError(f"duplicate target qubits {t}")
    if any(q < 0 or q >= num_qubits for q in t):
        raise RegisterError(f"targets {t} outside register of {num_qubits} qubits")
    return t


def embed_unitary(u: UnitaryOperator, targets, num_qubits: int) -> np.ndarray:
    """Full-register matrix acting as u on targets and identity elsewhere.

    The first listed target becomes the most significant bit of u's own
    basis index.
    """
    t = _check_targets(targets, u.num_qubits, num_qubits)
    dim = 2**num_qubits
    idx = np.arange(dim)
    sub = np.zeros(dim, dtype=np.int64)
    rest = idx.copy()
    for q in t:
        bit = (idx >> (num_qubits - 1 - q)) & 1
        sub = (sub << 1) | bit
        rest = rest & ~(1 << (num_qubits - 1 - q))
    full = u.matrix[sub[:, None], sub[None, :]] * (rest[:, None] == rest[None, :])
    return full


def apply_unitary(state: DensityOperator, u: UnitaryOperator, targets) -> DensityOperator:
    """Conjugate the state by u embedded on the given target qubits."""
    full = embed_unitary(u, targets, state.num_qubits)
    return DensityOperator(full @ state.matrix @ full.conj().T)


def mixture_channel(state: DensityOperator, terms) -> DensityOperator:
    """Apply sum_k p_k U_k rho U_k^dagger for terms (p_k, U_k, targets_k).

    Probabilities must be non-negative and sum to 1 within 1e-12; the
    resulting channel is unital (the maximally mixed state is a fixed point).
    """
    terms = list(terms)
    probs = np.array([p for p, _, _ in terms], dtype=float)
    if np.any(probs < 0):
        raise RegisterError("mixture probabilities must be non-negative")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise RegisterError(f"mixture probabilities sum to {probs.sum()}, not 1")
    out = np.zeros_like(state.matrix)
    for p, u, targets in terms:
        full = embed_unitary(u, targets, state.num_qubits)
        out = out + p * (full @ state.matrix @ full.conj().T)
    return DensityOperator(out)


def partial_trace(state: DensityOperator, keep) -> DensityOperator:
    """Reduced state on the kept qubits (register order); empty keep gives
    the 0-qubit scalar state [[1]]."""
    kept = sorted(set(int(q) for q in keep))
    if any(q < 0 or q >= state.num_qubits for q in kept):
        raise RegisterError(f"keep set {kept} outside register")
    n = state.num_qubits
    traced = [q for q in range(n) if q not in kept]
    t = state.matrix.reshape((2,) * (2 * n))
    # trace highest-numbered qubits first so lower axis numbers stay valid
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    d = 2 ** len(kept)
    return DensityOperator(t.reshape((d, d)))


def measure_distribution(state: DensityOperator, qubits) -> np.ndarray:
    """Computational-basis outcome probabilities of the listed qubits.

    Outcomes are ordered by binary index with the first listed qubit as the
    most significant bit.  Tiny negative diagonal entries from rounding are
    clipped and the vector is renormalized.
    """
    q = list(int(x) for x in qubits)
    if len(set(q)) != len(q):
        raise RegisterError(f"duplicate qubits {q}")
    if any(x < 0 or x >= state.num_qubits for x in q):
        raise RegisterError(f"qubits {q} outside register")
    n = state.num_qubits
    diag = np.real(np.diagonal(state.matrix)).reshape((2,) * n if n else (1,))
    if n == 0:
        return np.array([1.0])
    summed = diag.sum(axis=tuple(a for a in range(n) if a not in q)) if len(q) < n else diag
    kept_order = sorted(q)
    marg = summed.transpose([kept_order.index(x) for x in q]).reshape(-1)
    if marg.min() < -1e-12:
        raise RegisterError(f"negative outcome probability {marg.min()}")
    marg = np.clip(marg, 0.0, 1.0)
    return marg / marg.sum()


def expectation(distribution, observable_values) -> float:
    """Dot product of an outcome distribution with per-outcome values."""
    p = np.asarray(distribution, dtype=float)
    v = np.asarray(observable_values, dtype=float)
    if p.shape != v.shape:
        raise RegisterError(f"length mismatch: {p.shape} vs {v.shape}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise RegisterError(f"distribution sums to {p.sum()}, not 1")
    return float(np.dot(p, v))
