"""Synthetic two-group cohorts and the omitted-confounder gap decomposition.

A cohort has a reference group (indicator 0) and a comparison group
(indicator 1), confounder columns drawn Normal(group mean, sigma), and a
linear outcome. Regressing the outcome on the group indicator alone gives
the unadjusted gap; adding the confounders gives the adjusted gap. With a
single omitted confounder the expected difference between the two gaps is
beta * (mean_f - mean_m), the classic omitted-variable bias.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .numerics import std_normal_quantile

__all__ = [
    "Pcg32",
    "Confounder",
    "CohortConfig",
    "Cohort",
    "OlsFit",
    "GapReport",
    "RankDeficiencyError",
    "generate_cohort",
    "ols_fit",
    "gap_decomposition",
    "gap_over_seeds",
]


class Pcg32:
    """PCG-XSH-RR 32-bit generator (M.E. O'Neill), 64-bit state.

    Self-contained so simulated cohorts replay bit-identically on any
    platform or language. Uniform doubles come from (u32 + 0.5) / 2^32,
    which never produces 0 or 1; normals use the inverse-CDF method via
    std_normal_quantile, keeping the whole chain reproducible.
    """

    _MULT = 6364136223846793005
    _MASK = (1 << 64) - 1
    _DEFAULT_STREAM = 1442695040888963407

    def __init__(self, seed: int, stream: int = _DEFAULT_STREAM) -> None:
        self._inc = ((stream << 1) | 1) & self._MASK
        self._state = 0
        self.next_uint32()
        self._state = (self._state + (seed & self._MASK)) & self._MASK
        self.next_uint32()

    def next_uint32(self) -> int:
        old = self._state
        self._state = (old * self._MULT + self._inc) & self._MASK
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def random(self) -> float:
        """Uniform double in the open interval (0, 1)."""
        return (self.next_uint32() + 0.5) / 4294967296.0

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        return mu + sigma * std_normal_quantile(self.random())


@dataclass(frozen=True)
class Confounder:
    """One confounder column: outcome coefficient and per-group means."""

    beta: float
    mean_f: float
    mean_m: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError(f"confounder sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class CohortConfig:
    n_per_group: int
    beta0: float
    beta1: float
    confounders: tuple[Confounder, ...] = ()
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_per_group < 2 + len(self.confounders):
            raise ValueError(
                "n_per_group must be at least 2 + number of confounders "
                "for the model to be identifiable"
            )
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        object.__setattr__(self, "confounders", tuple(self.confounders))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CohortConfig":
        known = {"n_per_group", "beta0", "beta1", "confounders", "noise_sigma", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown cohort config field(s): {', '.join(sorted(unknown))}")
        confs = tuple(Confounder(**c) for c in d.get("confounders", ()))
        return cls(
            n_per_group=int(d["n_per_group"]),
            beta0=float(d["beta0"]),
            beta1=float(d["beta1"]),
            confounders=confs,
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, text: str | bytes) -> "CohortConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_per_group": self.n_per_group,
            "beta0": self.beta0,
            "beta1": self.beta1,
            "confounders": [
                {"beta": c.beta, "mean_f": c.mean_f, "mean_m": c.mean_m, "sigma": c.sigma}
                for c in self.confounders
            ],
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    def with_seed(self, seed: int) -> "CohortConfig":
        return CohortConfig(
            n_per_group=self.n_per_group,
            beta0=self.beta0,
            beta1=self.beta1,
            confounders=self.confounders,
            noise_sigma=self.noise_sigma,
            seed=seed,
        )


@dataclass(frozen=True)
class Cohort:
    """Design matrix (intercept, group indicator, confounders) and outcomes."""

    x: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...]


class RankDeficiencyError(ValueError):
    """Design matrix columns are linearly dependent."""


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    residual_sd: float


@dataclass(frozen=True)
class GapReport:
    gap_unadjusted: float
    gap_adjusted: float
    coefficients: tuple[float, ...]
    residual_sd: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "gap_unadjusted": self.gap_unadjusted,
            "gap_adjusted": self.gap_adjusted,
            "coefficients": list(self.coefficients),
            "residual_sd": self.residual_sd,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GapReport":
        return cls(
            gap_unadjusted=float(d["gap_unadjusted"]),
            gap_adjusted=float(d["gap_adjusted"]),
            coefficients=tuple(float(v) for v in d["coefficients"]),
            residual_sd=float(d["residual_sd"]),
        )


def generate_cohort(config: CohortConfig) -> Cohort:
    """Deterministically generate a cohort for the configured model.

    Rows are the reference group (indicator 0) first, then the comparison
    group (indicator 1). Draw order is fixed (per subject: confounders in
    declared order, then the noise term), so a given seed always yields a
    byte-identical data set.
    """
    rng = Pcg32(config.seed)
    n = config.n_per_group
    k = len(config.confounders)
    x = np.empty((2 * n, 2 + k), dtype=float)
    eps = np.zeros(2 * n, dtype=float)
    row = 0
    for group in (0.0, 1.0):
        for _ in range(n):
            x[row, 0] = 1.0
            x[row, 1] = group
            for j, conf in enumerate(config.confounders):
                mean = conf.mean_f if group == 1.0 else conf.mean_m
                x[row, 2 + j] = rng.normal(mean, conf.sigma)
            if config.noise_sigma > 0.0:
                eps[row] = rng.normal(0.0, config.noise_sigma)
            row += 1
    betas = np.array(
        [config.beta0, config.beta1] + [c.beta for c in config.confounders], dtype=float
    )
    y = x @ betas + eps
    columns = ("intercept", "group") + tuple(f"x{j + 2}" for j in range(k))
    return Cohort(x=x, y=y, columns=columns)


def ols_fit(x: np.ndarray, y: np.ndarray) -> OlsFit:
    """Least squares via QR decomposition.

    Rank deficiency raises rather than being silently regularized away.
    residual_sd is the degrees-of-freedom adjusted root mean squared
    residual, sqrt(RSS / (rows - cols)).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise ValueError("design matrix must be 2-dimensional")
    rows, cols = x.shape
    if y.shape != (rows,):
        raise ValueError(f"outcome length {y.shape} does not match {rows} rows")
    if rows < cols:
        raise ValueError(f"need at least as many rows ({rows}) as columns ({cols})")
    if np.linalg.matrix_rank(x) < cols:
        raise RankDeficiencyError("design matrix columns are linearly dependent")
    q, r = np.linalg.qr(x)
    beta = np.linalg.solve(r, q.T @ y)
    residuals = y - x @ beta
    dof = rows - cols
    rss = float(residuals @ residuals)
    residual_sd = math.sqrt(rss / dof) if dof > 0 else 0.0
    return OlsFit(coefficients=beta, residuals=residuals, residual_sd=residual_sd)


def gap_decomposition(config: CohortConfig) -> GapReport:
    """Unadjusted vs. adjusted group gap for one generated cohort.

    The unadjusted gap is the group coefficient when the outcome is
    regressed on the indicator alone (the difference of group means); the
    adjusted gap is the group coefficient with every configured confounder
    in the model.
    """
    cohort = generate_cohort(config)
    unadjusted = ols_fit(cohort.x[:, :2], cohort.y)
    adjusted = ols_fit(cohort.x, cohort.y)
    return GapReport(
        gap_unadjusted=float(unadjusted.coefficients[1]),
        gap_adjusted=float(adjusted.coefficients[1]),
        coefficients=tuple(float(b) for b in adjusted.coefficients),
        residual_sd=adjusted.residual_sd,
    )


def gap_over_seeds(config: CohortConfig, seeds: Sequence[int]) -> list[GapReport]:
    """Gap decomposition replicated across seeds (for mean +- sd reporting)."""
    return [gap_decomposition(config.with_seed(s)) for s in seeds]
