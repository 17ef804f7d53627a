"""Experiment configuration objects."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..combiner import DEFAULT_DELTA, DEFAULT_FORGET, SOFTMAX_RULES
from ..errors import ContractError
from ..filters import FilterParams
from ..schedule import POLICY_KINDS, SchedulePolicy
from ..sim import Scenario

COMBINER_KINDS = ("none", "grad", "rls2", "softmax")


@dataclass(frozen=True)
class CombinerSpec:
    kind: str = "none"
    mu_c: float = 3000.0
    beta_f: float = DEFAULT_FORGET
    lambda_f: float = DEFAULT_FORGET
    delta: float = DEFAULT_DELTA
    rule: str = "per_filter"

    def __post_init__(self):
        if self.kind not in COMBINER_KINDS:
            raise ContractError(f"unknown combiner kind {self.kind!r}")
        if self.rule not in SOFTMAX_RULES:
            raise ContractError(f"unknown softmax rule {self.rule!r}")
        if not self.mu_c > 0:
            raise ContractError("mu_c must be > 0")
        for name in ("beta_f", "lambda_f"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ContractError(f"{name} must be in (0, 1], got {v}")
        if not self.delta > 0:
            raise ContractError("delta must be > 0")

    @property
    def forget(self) -> float:
        return self.lambda_f if self.kind == "softmax" else self.beta_f


@dataclass(frozen=True)
class SweepSpec:
    """Log-spaced kappa grid crossed with a list of fixed SNRs."""

    kappa_min: float
    kappa_max: float
    points: int
    snrs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "snrs", tuple(float(s) for s in self.snrs))
        if self.points < 1 or not self.snrs:
            raise ContractError("sweep grid must be non-empty")
        if not 0 < self.kappa_min <= self.kappa_max:
            raise ContractError("need 0 < kappa_min <= kappa_max")

    def kappa_grid(self) -> np.ndarray:
        return np.geomspace(self.kappa_min, self.kappa_max, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    filters: tuple[FilterParams, ...]
    policy: str = "full"
    combiner: CombinerSpec = CombinerSpec()
    runs: int = 100
    base_seed: int = 0
    steady_window: float = 0.1
    exclude_divergent: bool = False
    sweep: SweepSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        M = len(self.filters)
        if M < 1:
            raise ContractError("at least one filter is required")
        if self.policy not in POLICY_KINDS:
            raise ContractError(f"unknown schedule policy {self.policy!r}")
        kind = self.combiner.kind
        if kind in ("grad", "rls2") and M != 2:
            raise ContractError(f"combiner '{kind}' needs exactly 2 filters, got {M}")
        if kind == "softmax" and M < 2:
            raise ContractError("softmax combiner needs at least 2 filters")
        if self.runs < 1:
            raise ContractError(f"runs must be >= 1, got {self.runs}")
        if not 0 < self.steady_window < 1:
            raise ContractError(f"steady_window must be in (0, 1), got {self.steady_window}")
        if M > self.scenario.length:
            raise ContractError("more filters than taps")

    @property
    def M(self) -> int:
        return len(self.filters)

    @property
    def schedule(self) -> SchedulePolicy:
        return SchedulePolicy(self.policy, self.M, self.scenario.length)
