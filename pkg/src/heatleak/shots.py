"""Finite-statistics layer: shot sampling, SPAM, bootstrap, thresholds.

All randomness goes through NumPy's PCG64 generator (``np.random.default_rng``)
with integer seeds derived via ``SeedSequence`` so that records, bootstrap
channels and threshold uncertainties are bit-reproducible from a single root
seed, independently of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ShotsError(ValueError):
    """Invalid shot record or statistics configuration."""


def derive_seed(root: int, *path: int) -> int:
    """Deterministic integer sub-seed for a role identified by an int path."""
    ss = np.random.SeedSequence([int(root), *[int(p) for p in path]])
    return int(ss.generate_state(1, np.uint64)[0])


def outcome_labels(num_qubits: int) -> tuple[str, ...]:
    """Bitstring labels in binary-index order, e.g. ('00','01','10','11')."""
    return tuple(format(k, f"0{num_qubits}b") for k in range(2**num_qubits))


@dataclass(frozen=True)
class ShotRecord:
    """Counts per computational-basis outcome of the measured qubits.

    counts maps bitstring labels (first measured qubit = leftmost bit) to
    non-negative integers summing to shots.
    """

    stage: str
    counts: dict[str, int]
    shots: int
    qubits: tuple[str, ...] | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.shots <= 0:
            raise ShotsError("a record needs at least one shot")
        lengths = {len(k) for k in self.counts}
        if len(lengths) != 1:
            raise ShotsError(f"inconsistent outcome label lengths {lengths}")
        m = lengths.pop()
        valid = set(outcome_labels(m))
        bad = set(self.counts) - valid
        if bad:
            raise ShotsError(f"invalid outcome labels {sorted(bad)}")
        if any(c < 0 or c != int(c) for c in self.counts.values()):
            raise ShotsError("counts must be non-negative integers")
        total = sum(self.counts.values())
        if total != self.shots:
            raise ShotsError(f"counts sum to {total}, expected {self.shots}")
        if self.qubits is not None and len(self.qubits) != m:
            raise ShotsError("qubit labels do not match outcome width")

    @property
    def num_measured(self) -> int:
        return len(next(iter(self.counts)))

    def counts_array(self) -> np.ndarray:
        labels = outcome_labels(self.num_measured)
        return np.array([self.counts.get(lbl, 0) for lbl in labels], dtype=np.int64)

    def probabilities(self) -> np.ndarray:
        return self.counts_array() / self.shots

    def with_counts(self, counts_array) -> "ShotRecord":
        labels = outcome_labels(self.num_measured)
        counts = {lbl: int(c) for lbl, c in zip(labels, counts_array)}
        return ShotRecord(
            stage=self.stage,
            counts=counts,
            shots=self.shots,
            qubits=self.qubits,
            seed=None,
            meta=self.meta,
        )


@dataclass(frozen=True)
class SpamModel:
    """Independent per-qubit readout confusion: 0->1 and 1->0 flip rates."""

    flip_0_to_1: float = 0.0
    flip_1_to_0: float = 0.0

    def __post_init__(self):
        for name in ("flip_0_to_1", "flip_1_to_0"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ShotsError(f"{name} = {p} outside [0, 1]")

    @property
    def is_identity(self) -> bool:
        return self.flip_0_to_1 == 0.0 and self.flip_1_to_0 == 0.0


def apply_spam(distribution, model: SpamModel) -> np.ndarray:
    """Push outcome probabilities through the per-qubit confusion model."""
    p = np.asarray(distribution, dtype=float)
    n = len(p).bit_length() - 1
    if len(p) != 2**n:
        raise ShotsError(f"distribution length {len(p)} is not a power of two")
    # column-stochastic single-qubit confusion matrix, rows = observed bit
    m1 = np.array(
        [
            [1.0 - model.flip_0_to_1, model.flip_1_to_0],
            [model.flip_0_to_1, 1.0 - model.flip_1_to_0],
        ]
    )
    confusion = np.array([[1.0]])
    for _ in range(n):
        confusion = np.kron(confusion, m1)
    out = confusion @ p
    return out / out.sum()


@dataclass(frozen=True)
class BootstrapConfig:
    """Resampling setup; confidence defaults to two-sided one sigma."""

    resamples: int = 2000
    confidence: float = 0.6827
    seed: int = 0

    def __post_init__(self):
        if self.resamples < 100:
            raise ShotsError("at least 100 resamples required for reported CIs")
        if not 0.0 < self.confidence < 1.0:
            raise ShotsError(f"confidence {self.confidence} outside (0, 1)")


@dataclass(frozen=True)
class EstimateWithCI:
    value: float
    ci_low: float
    ci_high: float
    std_error: float


def sample_shots(distribution, n: int, seed: int, stage: str = "i",
                 qubits=None, meta=None) -> ShotRecord:
    """One multinomial draw of n shots, bit-reproducible from the seed."""
    if n <= 0:
        raise ShotsError("shot count must be positive")
    p = np.asarray(distribution, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ShotsError(f"distribution sums to {p.sum()}, not 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, p / p.sum())
    m = len(p).bit_length() - 1
    labels = outcome_labels(m)
    return ShotRecord(
        stage=stage,
        counts={lbl: int(c) for lbl, c in zip(labels, counts)},
        shots=n,
        qubits=tuple(qubits) if qubits is not None else None,
        seed=seed,
        meta=dict(meta) if meta else {},
    )


def estimate_expectation(record: ShotRecord, observable_values) -> float:
    """Sample average sum_k counts_k * v_k / shots."""
    v = np.asarray(observable_values, dtype=float)
    if len(v) != 2**record.num_measured:
        raise ShotsError(
            f"observable has {len(v)} values for {2**record.num_measured} outcomes"
        )
    return float(np.dot(record.counts_array(), v) / record.shots)


def _resample_matrices(records, config: BootstrapConfig) -> list[np.ndarray]:
    """Per record: (resamples, outcomes) multinomial redraws of its counts.

    Each record gets its own seed-derived stream, so results do not depend
    on the order resamples are consumed in.
    """
    draws = []
    for j, rec in enumerate(records):
        rng = np.random.default_rng(derive_seed(config.seed, j))
        draws.append(rng.multinomial(rec.shots, rec.probabilities(),
                                     size=config.resamples))
    return draws


def bootstrap_statistic(records, statistic, config: BootstrapConfig) -> list[EstimateWithCI]:
    """Non-parametric bootstrap of a vector statistic of shot records.

    Every resample redraws each record's counts from a multinomial with its
    empirical rates and the same shot total, then recomputes the statistic.
    CIs are empirical quantiles at (1 +- confidence)/2 (widened to enclose
    the point estimate if needed); std_error is the resample standard
    deviation.
    """
    records = list(records)
    if not records:
        raise ShotsError("at least one record required")
    point = np.atleast_1d(np.asarray(statistic(records), dtype=float))
    draws = _resample_matrices(records, config)
    stats = np.empty((config.resamples, len(point)))
    for r in range(config.resamples):
        resampled = [rec.with_counts(draws[j][r]) for j, rec in enumerate(records)]
        try:
            stats[r] = np.atleast_1d(np.asarray(statistic(resampled), dtype=float))
        except Exception as exc:
            raise ShotsError(
                f"statistic failed on resample {r}: {exc!r}; "
                f"counts={[d[r].tolist() for d in draws]}"
            ) from exc
    lo_q = (1.0 - config.confidence) / 2.0
    ci_low = np.quantile(stats, lo_q, axis=0)
    ci_high = np.quantile(stats, 1.0 - lo_q, axis=0)
    std = stats.std(axis=0, ddof=1)
    return [
        EstimateWithCI(
            value=float(point[k]),
            ci_low=float(min(ci_low[k], point[k])),
            ci_high=float(max(ci_high[k], point[k])),
            std_error=float(std[k]),
        )
        for k in range(len(point))
    ]


@dataclass(frozen=True)
class ThresholdResult:
    """Crossing location with bootstrap uncertainty.

    found is False when the point-estimate sweep has no sign change (an
    explicit no-threshold outcome, not an error).  no_crossing_resamples
    counts resamples whose sweep had no crossing; they do not enter the CI.
    """

    found: bool
    estimate: EstimateWithCI | None
    resamples: int
    no_crossing_resamples: int


def threshold_with_uncertainty(
    initial_record: ShotRecord,
    final_record: ShotRecord,
    sweep_builder,
    config: BootstrapConfig,
) -> ThresholdResult:
    """Locate the sweep's sign crossing and bootstrap its uncertainty.

    sweep_builder(initial_record, final_record) must return a SweepResult;
    its point estimate must have exactly one crossing.  Resampled sweeps
    with several crossings contribute the one nearest the point estimate.
    """
    point_sweep = sweep_builder(initial_record, final_record)
    point_crossings = [loc for loc, _ in point_sweep.thresholds]
    if not point_crossings:
        return ThresholdResult(
            found=False, estimate=None,
            resamples=config.resamples, no_crossing_resamples=0,
        )
    if len(point_crossings) > 1:
        raise ShotsError(
            f"point-estimate sweep has {len(point_crossings)} sign crossings "
            f"at {point_crossings}; threshold is ambiguous"
        )
    center = point_crossings[0]
    draws = _resample_matrices([initial_record, final_record], config)
    locations = []
    missing = 0
    for r in range(config.resamples):
        sweep = sweep_builder(
            initial_record.with_counts(draws[0][r]),
            final_record.with_counts(draws[1][r]),
        )
        if sweep.thresholds:
            locations.append(
                min((loc for loc, _ in sweep.thresholds),
                    key=lambda x: abs(x - center))
            )
        else:
            missing += 1
    if not locations:
        return ThresholdResult(
            found=True,
            estimate=EstimateWithCI(center, center, center, math.nan),
            resamples=config.resamples,
            no_crossing_resamples=missing,
        )
    locs = np.array(locations)
    lo_q = (1.0 - config.confidence) / 2.0
    ci_low = float(np.quantile(locs, lo_q))
    ci_high = float(np.quantile(locs, 1.0 - lo_q))
    std = float(locs.std(ddof=1)) if len(locs) > 1 else 0.0
    return ThresholdResult(
        found=True,
        estimate=EstimateWithCI(
            value=float(center),
            ci_low=min(ci_low, center),
            ci_high=max(ci_high, center),
            std_error=std,
        ),
        resamples=config.resamples,
        no_crossing_resamples=missing,
    )
