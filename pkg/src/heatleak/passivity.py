"""Passivity-based inequality tests for heat-leak detection.

The observed register starts in a product of thermal states, so the diagonal
operator ``sum_j beta_j H_j`` shares its eigenbasis with the initial state
and is anti-ordered with it.  Shifting it to strictly positive eigenvalues
(minimum exactly epsilon) yields the globally passive operator B whose power
family ``sgn(alpha) * B^alpha`` must have non-decreasing expectation under
any mixture of unitaries.  A strictly negative change certifies a coupling
to unobserved degrees of freedom.

Deforming B by ``xi * A`` for a commuting observable A preserves passivity
as long as the eigenvalue ordering of B is inherited, which holds exactly on
an interval [xi_min, xi_max] computed here from pairwise ordering
constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class PassivityError(ValueError):
    """Invalid inputs to a passivity test."""


def energy_basis_values(num_qubits: int, qubit: int) -> np.ndarray:
    """Diagonal of H_qubit = |1><1| on the outcome space of num_qubits qubits.

    Outcome index bit of the first qubit is the most significant bit.
    """
    if qubit < 0 or qubit >= num_qubits:
        raise PassivityError(f"qubit {qubit} outside {num_qubits}-qubit outcome space")
    idx = np.arange(2**num_qubits)
    return ((idx >> (num_qubits - 1 - qubit)) & 1).astype(float)


@dataclass(frozen=True)
class GlobalPassivityOperator:
    """Diagonal globally passive operator built from inverse temperatures.

    basis_values[k] = sum_j beta_j * E_j(k) - d with the shift d chosen so
    that min(basis_values) is exactly epsilon > 0.
    """

    betas: dict[str, float]
    epsilon: float
    d: float
    basis_values: np.ndarray

    @property
    def num_outcomes(self) -> int:
        return len(self.basis_values)


def build_B(betas, epsilon: float) -> GlobalPassivityOperator:
    """Construct the shifted operator; betas maps qubit label -> beta.

    The shift is d = min_k(sum_j beta_j E_j(k)) - epsilon, which makes every
    eigenvalue positive with minimum exactly epsilon (a negative minimum
    would break non-integer powers).
    """
    betas = dict(betas)
    if not betas:
        raise PassivityError("at least one qubit required")
    if epsilon <= 0 or not math.isfinite(epsilon):
        raise PassivityError(f"epsilon must be positive and finite, got {epsilon}")
    for label, beta in betas.items():
        if not math.isfinite(beta):
            raise PassivityError(f"beta[{label!r}] must be finite, got {beta}")
    n = len(betas)
    raw = np.zeros(2**n)
    for pos, (label, beta) in enumerate(betas.items()):
        raw += beta * energy_basis_values(n, pos)
    d = float(raw.min()) - epsilon
    values = raw - d
    values.setflags(write=False)
    return GlobalPassivityOperator(betas=betas, epsilon=epsilon, d=d, basis_values=values)


def b_alpha_values(B: GlobalPassivityOperator, alpha: float) -> np.ndarray:
    """Per-outcome eigenvalues of sgn(alpha) * B^alpha.

    The map is monotonically increasing in the eigenvalues of B for every
    alpha != 0, which is what grants passivity of the whole family.
    """
    if alpha == 0:
        raise PassivityError("alpha = 0 gives a constant observable; rejected")
    return float(np.sign(alpha)) * B.basis_values**alpha


def delta_B_alpha(initial, final, B: GlobalPassivityOperator, alpha: float) -> float:
    """<B^alpha>_final - <B^alpha>_initial; strictly negative certifies a leak."""
    p0 = np.asarray(initial, dtype=float)
    pf = np.asarray(final, dtype=float)
    if p0.shape != (B.num_outcomes,) or pf.shape != (B.num_outcomes,):
        raise PassivityError(
            f"distributions must have {B.num_outcomes} outcomes, "
            f"got {p0.shape} and {pf.shape}"
        )
    v = b_alpha_values(B, alpha)
    return float(np.dot(pf - p0, v))


def second_law_delta(initial, final, betas) -> float:
    """sum_j beta_j * (change of <H_j>); identical to delta_B_alpha at alpha=1
    because the constant shift cancels in the difference."""
    betas = dict(betas)
    n = len(betas)
    p0 = np.asarray(initial, dtype=float)
    pf = np.asarray(final, dtype=float)
    if p0.shape != (2**n,) or pf.shape != (2**n,):
        raise PassivityError("distribution length does not match beta count")
    total = 0.0
    for pos, (label, beta) in enumerate(betas.items()):
        h = energy_basis_values(n, pos)
        total += beta * float(np.dot(pf - p0, h))
    return total


def generic_F_delta(initial, final, F_values) -> float:
    """Expectation change of an observable anti-ordered with the initial state.

    F must not increase where the initial probability increases (ties are
    free); under that precondition the change is non-negative for any unital
    evolution of the initial distribution.
    """
    p0 = np.asarray(initial, dtype=float)
    pf = np.asarray(final, dtype=float)
    F = np.asarray(F_values, dtype=float)
    if not (p0.shape == pf.shape == F.shape):
        raise PassivityError("initial, final and F must have equal lengths")
    # tolerances absorb last-ulp noise in probabilities computed different ways
    tol_p = 1e-12
    tol_f = 1e-12 * max(1.0, float(np.max(np.abs(F))))
    offending = []
    for i in range(len(p0)):
        for j in range(len(p0)):
            if p0[i] > p0[j] + tol_p and F[i] > F[j] + tol_f:
                offending.append((i, j))
    if offending:
        raise PassivityError(
            "F is not anti-ordered with the initial distribution; offending "
            f"(larger-p, smaller-p) index pairs: {offending}"
        )
    return float(np.dot(pf - p0, F))


def check_ordering_inherited(b_values, a_values, xi: float) -> bool:
    """True iff b + xi*a preserves the strict ordering of b.

    Pairs with equal b impose no constraint: equal initial eigenvalues admit
    either order.  A small relative tolerance absorbs rounding at the exact
    endpoints of the admissible interval.
    """
    b = np.asarray(b_values, dtype=float)
    a = np.asarray(a_values, dtype=float)
    if b.shape != a.shape:
        raise PassivityError("b and a must have equal lengths")
    scale = max(1.0, float(np.max(np.abs(b))), abs(xi) * float(np.max(np.abs(a))))
    tol = 1e-12 * scale
    for i in range(len(b)):
        for j in range(len(b)):
            if b[i] < b[j] and (b[j] + xi * a[j]) - (b[i] + xi * a[i]) < -tol:
                return False
    return True


@dataclass(frozen=True)
class DeformationBounds:
    """Admissible deformation interval and the constraint pairs that set it.

    binding_pairs["xi_min"] / ["xi_max"] list the (i, j) outcome pairs whose
    ordering constraint is active at the respective endpoint; empty when the
    side is unbounded.
    """

    xi_min: float
    xi_max: float
    binding_pairs: dict[str, list[tuple[int, int]]] = field(default_factory=dict)


def deformation_bounds(b_values, a_values) -> DeformationBounds:
    """Largest interval [xi_min, xi_max] on which b + xi*a inherits b's order.

    Each pair with b_i < b_j requires (b_j - b_i) + xi*(a_j - a_i) >= 0:
    pairs with a_i > a_j cap xi from above, pairs with a_i < a_j from below,
    co-valued pairs never constrain.  xi = 0 is always admissible.
    """
    b = np.asarray(b_values, dtype=float)
    a = np.asarray(a_values, dtype=float)
    if b.shape != a.shape:
        raise PassivityError("b and a must have equal lengths")
    xi_min, xi_max = -math.inf, math.inf
    min_pairs: list[tuple[int, int]] = []
    max_pairs: list[tuple[int, int]] = []
    for i in range(len(b)):
        for j in range(len(b)):
            if b[i] >= b[j]:
                continue
            if a[i] == a[j]:
                continue
            ratio = (b[j] - b[i]) / (a[i] - a[j])
            if a[i] > a[j]:  # upper bound
                if math.isclose(ratio, xi_max, rel_tol=1e-12, abs_tol=1e-15):
                    max_pairs.append((i, j))
                elif ratio < xi_max:
                    xi_max, max_pairs = ratio, [(i, j)]
            else:  # lower bound (ratio is negative here)
                if math.isclose(ratio, xi_min, rel_tol=1e-12, abs_tol=1e-15):
                    min_pairs.append((i, j))
                elif ratio > xi_min:
                    xi_min, min_pairs = ratio, [(i, j)]
    return DeformationBounds(
        xi_min=xi_min,
        xi_max=xi_max,
        binding_pairs={"xi_min": min_pairs, "xi_max": max_pairs},
    )


@dataclass
class SweepResult:
    """Inequality sides tabulated over a parameter grid.

    For alpha sweeps lhs is the expectation change of B^alpha and rhs is 0;
    for xi sweeps lhs is the (constant) change of <H_c> and rhs the
    xi-dependent bound.  A grid point is violated iff lhs < rhs.  thresholds
    lists (crossing location, uncertainty) pairs; exact sweeps carry zero
    uncertainty.
    """

    parameter_name: str
    grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ci_low: np.ndarray | None = None
    ci_high: np.ndarray | None = None
    thresholds: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.grid)
        for name in ("lhs", "rhs", "ci_low", "ci_high"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise PassivityError(f"{name} length {len(arr)} != grid length {n}")

    @property
    def violated(self) -> np.ndarray:
        return self.lhs < self.rhs


def _bisect_crossing(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Sign-change location of f on [lo, hi] by plain bisection."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(200):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def _grid_crossings(f, grid, values) -> list[float]:
    """Refine every sign change along the grid by bisection.

    Exact zeros at grid points are skipped when pairing signs, so an
    all-zero sweep (identity evolution) reports no crossings while a
    -,0,+ pattern still yields the single crossing at the touching point.
    """
    crossings = []
    prev = None
    for k in range(len(grid)):
        if values[k] == 0.0:
            continue
        if prev is not None and values[prev] * values[k] < 0:
            lo, hi = float(grid[prev]), float(grid[k])
            if lo < 0.0 < hi:
                # bracket spans the excluded alpha = 0 point; refine on the
                # half that actually changes sign (f -> 0 at alpha -> 0)
                for sub in ((lo, -1e-12), (1e-12, hi)):
                    if f(sub[0]) * f(sub[1]) < 0:
                        crossings.append(_bisect_crossing(f, *sub))
                        break
                else:
                    crossings.append(0.0)
            else:
                crossings.append(_bisect_crossing(f, lo, hi))
        prev = k
    return crossings


def alpha_sweep(initial, final, B: GlobalPassivityOperator, grid) -> SweepResult:
    """delta<B^alpha> over an alpha grid with bisection-refined zero crossings."""
    grid = np.asarray(grid, dtype=float)
    if np.any(grid == 0.0):
        raise PassivityError("alpha grid must exclude 0")
    p0 = np.asarray(initial, dtype=float)
    pf = np.asarray(final, dtype=float)
    diff = pf - p0
    # (outcomes, grid) power table evaluated in one shot
    values = np.sign(grid) * (diff @ (B.basis_values[:, None] ** grid[None, :]))

    def f(alpha):
        if alpha == 0.0:
            return 0.0
        return float(np.dot(diff, np.sign(alpha) * B.basis_values**alpha))

    crossings = _grid_crossings(f, grid, values)
    return SweepResult(
        parameter_name="alpha",
        grid=grid,
        lhs=values,
        rhs=np.zeros_like(values),
        thresholds=[(c, 0.0) for c in crossings],
    )


def deformation_sweep(
    initial, final, B: GlobalPassivityOperator, a_values, grid
) -> SweepResult:
    """Deformed inequality over a xi grid inside the admissible interval.

    lhs is the change of <H_c> (constant in xi); rhs is
    -((beta_h + xi)/beta_c) times the change of <H_h>.  lhs < rhs is
    equivalent to the raw form delta<B> + xi*delta<A> < 0 for beta_c > 0.
    Requires B built on exactly the two qubits c and h with A = H on one of
    them (any commuting diagonal A is accepted for the raw form).
    """
    if set(B.betas) != {"c", "h"}:
        raise PassivityError("deformation sweep requires B on qubits c and h")
    beta_c, beta_h = B.betas["c"], B.betas["h"]
    if beta_c <= 0:
        raise PassivityError("the normal form divides by beta_c; need beta_c > 0")
    a = np.asarray(a_values, dtype=float)
    bounds = deformation_bounds(B.basis_values, a)
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise PassivityError("xi grid must be finite")
    finite = [abs(x) for x in (bounds.xi_min, bounds.xi_max) if math.isfinite(x)]
    slack = 1e-12 * max([1.0, *finite])
    if np.any(grid < bounds.xi_min - slack) or np.any(grid > bounds.xi_max + slack):
        raise PassivityError(
            f"xi grid leaves the admissible interval "
            f"[{bounds.xi_min}, {bounds.xi_max}]"
        )
    p0 = np.asarray(initial, dtype=float)
    pf = np.asarray(final, dtype=float)
    diff = pf - p0
    d_hc = float(np.dot(diff, energy_basis_values(2, 0)))
    d_hh = float(np.dot(diff, energy_basis_values(2, 1)))
    lhs = np.full_like(grid, d_hc)
    rhs = -((beta_h + grid) / beta_c) * d_hh

    def g(xi):
        return d_hc + ((beta_h + xi) / beta_c) * d_hh

    crossings = _grid_crossings(g, grid, lhs - rhs)
    return SweepResult(
        parameter_name="xi",
        grid=grid,
        lhs=lhs,
        rhs=rhs,
        thresholds=[(c, 0.0) for c in crossings],
    )


def deformation_raw_values(
    initial, final, B: GlobalPassivityOperator, a_values, grid
) -> np.ndarray:
    """Raw deformed form delta<B> + xi*delta<A> per grid point."""
    p0 = np.asarray(initial, dtype=float)
    pf = np.asarray(final, dtype=float)
    diff = pf - p0
    d_b = float(np.dot(diff, B.basis_values))
    d_a = float(np.dot(diff, np.asarray(a_values, dtype=float)))
    return d_b + np.asarray(grid, dtype=float) * d_a
