"""Experiment configuration: defaults, JSON loading and flag overrides.

A config file is a single JSON document; every field has a default, and CLI
flags override fields one-for-one.  The default alpha grid is 121 uniform
points on [-3, 3] with 0 removed (a constant observable tests nothing).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .circuits import ProtocolConfig
from .passivity import build_B, deformation_bounds, energy_basis_values
from .shots import BootstrapConfig, ShotsError, SpamModel

REFERENCE_PARAMS = {
    # reference operating points of the two bundled protocols
    "A": {"beta_c": 2.23, "beta_h": 0.43, "beta_e": 2.02},
    "B": {"beta_c": 1.627, "beta_h": 1.099, "beta_e": 2.232},
}


def reference_protocol(variant: str, include_env_swap: bool = True) -> ProtocolConfig:
    """Protocol config at the reference operating point of a variant."""
    if variant not in REFERENCE_PARAMS:
        raise ShotsError(f"unknown protocol variant {variant!r}")
    return ProtocolConfig(
        variant=variant,
        include_env_swap=include_env_swap,
        **REFERENCE_PARAMS[variant],
    )


def default_alpha_grid() -> list[float]:
    return [float(a) for a in np.linspace(-3.0, 3.0, 121) if a != 0.0]


DEFAULT_XI_POINTS = 41


@dataclass
class ExperimentConfig:
    protocol: ProtocolConfig = field(default_factory=lambda: reference_protocol("A"))
    shots_per_stage: int = 6700
    seed: int = 1
    epsilon: float = 1e-3
    alpha_grid: list[float] = field(default_factory=default_alpha_grid)
    xi_grid: list[float] | str | None = None  # explicit list, "auto", or None
    spam: SpamModel = field(default_factory=SpamModel)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    significance: float = 3.0

    def __post_init__(self):
        if self.shots_per_stage <= 0:
            raise ShotsError("shots_per_stage must be positive")
        if self.epsilon <= 0 or not math.isfinite(self.epsilon):
            raise ShotsError("epsilon must be positive and finite")
        if any(a == 0.0 for a in self.alpha_grid):
            raise ShotsError("alpha grid must exclude 0")
        if isinstance(self.xi_grid, str) and self.xi_grid != "auto":
            raise ShotsError(f'xi_grid must be a list, "auto" or null')
        if isinstance(self.xi_grid, list):
            self._check_explicit_xi_grid()
        if self.significance <= 0:
            raise ShotsError("significance must be positive")

    def _check_explicit_xi_grid(self):
        B = build_B(
            {"c": self.protocol.beta_c, "h": self.protocol.beta_h}, self.epsilon
        )
        bounds = deformation_bounds(B.basis_values, energy_basis_values(2, 1))
        slack = 1e-12 * max(1.0, abs(bounds.xi_min), abs(bounds.xi_max))
        for xi in self.xi_grid:
            if xi < bounds.xi_min - slack or xi > bounds.xi_max + slack:
                raise ShotsError(
                    f"xi grid point {xi} outside the admissible interval "
                    f"[{bounds.xi_min}, {bounds.xi_max}]"
                )

    def wants_deformation(self) -> bool:
        """Deformation tests run for variant B by default, or when a xi grid
        is configured explicitly."""
        return self.xi_grid is not None or self.protocol.variant == "B"

    def resolve_xi_grid(self, xi_min: float, xi_max: float) -> np.ndarray:
        """Materialize the xi grid; "auto"/None fill the admissible interval."""
        if isinstance(self.xi_grid, list):
            return np.asarray(self.xi_grid, dtype=float)
        if not (math.isfinite(xi_min) and math.isfinite(xi_max)):
            raise ShotsError(
                "cannot auto-fill an unbounded deformation interval; "
                "provide an explicit xi grid"
            )
        return np.linspace(xi_min, xi_max, DEFAULT_XI_POINTS)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["protocol"] = asdict(self.protocol)
        d["spam"] = asdict(self.spam)
        d["bootstrap"] = asdict(self.bootstrap)
        return d


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    kwargs = {}
    if "protocol" in data:
        kwargs["protocol"] = ProtocolConfig(**data.pop("protocol"))
    if "spam" in data:
        kwargs["spam"] = SpamModel(**data.pop("spam"))
    if "bootstrap" in data:
        kwargs["bootstrap"] = BootstrapConfig(**data.pop("bootstrap"))
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ShotsError(f"unknown config fields {sorted(unknown)}")
    kwargs.update(data)
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ShotsError(f"config {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ShotsError(f"config {path}: expected a JSON object")
    return config_from_dict(data)
