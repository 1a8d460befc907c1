"""Global band gaps: closed-form prediction, numerical detection and mu_c sweeps.

A global gap is a frequency interval reached by none of the nine branches.
For lambda_e, lambda_h > 0 the acoustic branches saturate at omega_l and
omega_t (omega_l > omega_t) while every optic branch starts at a cutoff and
grows, so a gap opens exactly when both omega_s and omega_r exceed omega_l.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dispersion import (
    DEFAULT_ASYMPTOTE_TOLERANCE,
    DEFAULT_SAMPLES,
    DispersionBranch,
    default_k_grid,
    sample_branches,
)
from .errors import CeilingTooLow, IndefiniteParameters, OutsideStatedRegime
from .material import (
    CharacteristicScales,
    MaterialParameters,
    characteristic_scales,
    failed_conditions,
)

CEILING_FACTOR = 1.5
MIN_WIDTH_FRACTION = 1e-6


@dataclass(frozen=True)
class GapInterval:
    low: float
    high: float
    source: str

    def __post_init__(self):
        if not 0.0 <= self.low < self.high:
            raise ValueError(f"invalid gap ({self.low!r}, {self.high!r})")
        if self.source not in ("analytic", "numeric"):
            raise ValueError(f"unknown gap source {self.source!r}")

    @property
    def width(self) -> float:
        return self.high - self.low


@dataclass(frozen=True)
class GapCondition:
    threshold: float
    clauses: tuple[tuple[str, bool], ...]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.clauses)


def gap_condition(params: MaterialParameters) -> GapCondition:
    """Threshold mu_c0 = (lambda_h + 2 mu_h)/2 and the three gap clauses.

    Only defined for strictly positive lambda_e and lambda_h; with negative
    values the ordering of the asymptotes is no longer fixed.
    """
    p = params
    if p.lambda_e <= 0.0 or p.lambda_h <= 0.0:
        raise OutsideStatedRegime(
            f"gap condition needs lambda_e > 0 and lambda_h > 0, got {p.lambda_e!r}, {p.lambda_h!r}"
        )
    threshold = (p.lambda_h + 2.0 * p.mu_h) / 2.0
    clauses = (
        ("0 < mu_e < inf", bool(0.0 < p.mu_e < float("inf"))),
        ("0 < lambda_h < 2*mu_e", bool(0.0 < p.lambda_h < 2.0 * p.mu_e)),
        ("mu_c > mu_c0", bool(p.mu_c > threshold)),
    )
    return GapCondition(threshold, clauses)


def analytic_gap(scales: CharacteristicScales, clauses_pass: bool) -> GapInterval | None:
    if not clauses_pass:
        return None
    # max over both acoustic asymptotes; reduces to omega_l when lambda_h > 0
    low = max(scales.omega_l, scales.omega_t)
    high = min(scales.omega_s, scales.omega_r, scales.omega_p)
    if not low < high:
        return None
    return GapInterval(low, high, "analytic")


def branch_coverage(branch: DispersionBranch, omega_ceiling: float) -> tuple[float, float]:
    """Frequency interval swept by one branch, capped at ``omega_ceiling``."""
    lo = float(branch.omega.min())
    hi = float(branch.omega.max())
    if branch.asymptote is not None:
        lo = min(lo, branch.asymptote)
        hi = max(hi, branch.asymptote)
    else:
        if branch.omega[-1] < omega_ceiling:
            raise CeilingTooLow(
                f"{branch.label} is not saturating but ends at {branch.omega[-1]:.6g} rad/s, "
                f"below omega_ceiling {omega_ceiling:.6g}; extend k_max or lower the ceiling"
            )
        hi = max(hi, omega_ceiling)
    return lo, min(hi, omega_ceiling)


def numeric_gaps(
    branches: Iterable[DispersionBranch], omega_ceiling: float, min_width: float
) -> list[GapInterval]:
    branches = list(branches)
    if not branches:
        return [GapInterval(0.0, omega_ceiling, "numeric")] if omega_ceiling > min_width else []
    top_cutoff = max(b.cutoff for b in branches)
    if omega_ceiling < top_cutoff:
        raise CeilingTooLow(f"omega_ceiling {omega_ceiling:.6g} is below the cutoff {top_cutoff:.6g}")

    covered = sorted(branch_coverage(b, omega_ceiling) for b in branches)
    gaps = []
    cursor = 0.0
    for lo, hi in covered:
        if lo > cursor and lo - cursor >= min_width:
            gaps.append(GapInterval(cursor, lo, "numeric"))
        cursor = max(cursor, hi)
    if omega_ceiling > cursor and omega_ceiling - cursor >= min_width:
        gaps.append(GapInterval(cursor, omega_ceiling, "numeric"))
    return gaps


def gap_agreement(analytic: GapInterval | None, numeric: Sequence[GapInterval]) -> float | None:
    """Largest relative edge mismatch against the best-overlapping numeric gap."""
    if analytic is None or not numeric:
        return None

    def overlap(g):
        return min(g.high, analytic.high) - max(g.low, analytic.low)

    best = max(numeric, key=overlap)
    return max(
        abs(best.low - analytic.low) / analytic.low,
        abs(best.high - analytic.high) / analytic.high,
    )


@dataclass
class BandGapReport:
    params: MaterialParameters
    scales: CharacteristicScales
    condition: GapCondition | None
    analytic_gap: GapInterval | None
    numeric_gaps: list[GapInterval]
    agreement: float | None
    omega_ceiling: float
    min_width: float
    k_max: float
    samples: int
    branches: list[DispersionBranch] = field(default_factory=list, repr=False)

    @property
    def mu_c_threshold(self) -> float | None:
        return None if self.condition is None else self.condition.threshold

    @property
    def has_gap(self) -> bool:
        return self.analytic_gap is not None or bool(self.numeric_gaps)


def default_ceiling(scales: CharacteristicScales) -> float:
    return CEILING_FACTOR * max(scales.omega_p, scales.omega_s, scales.omega_r)


def require_definite(params: MaterialParameters) -> None:
    failed = failed_conditions(params)
    if failed:
        names = ", ".join(c.name for c in failed)
        raise IndefiniteParameters(f"strain energy is not positive definite: {names} violated")


def analyze(
    params: MaterialParameters,
    *,
    samples: int = DEFAULT_SAMPLES,
    k_max: float | None = None,
    omega_ceiling: float | None = None,
    min_width: float | None = None,
    asymptote_tolerance: float = DEFAULT_ASYMPTOTE_TOLERANCE,
    executor: Executor | None = None,
) -> BandGapReport:
    """Run the full pipeline for one parameter set.

    Outside lambda_e, lambda_h > 0 there is no closed-form prediction; the
    report then carries ``condition=None`` and numerical gaps only.
    """
    require_definite(params)
    scales = characteristic_scales(params)
    grid = default_k_grid(scales, samples, k_max)
    branches = sample_branches(
        params, scales, grid, asymptote_tolerance=asymptote_tolerance, executor=executor
    )
    if omega_ceiling is None:
        omega_ceiling = default_ceiling(scales)
    if min_width is None:
        min_width = MIN_WIDTH_FRACTION * omega_ceiling

    try:
        condition = gap_condition(params)
    except OutsideStatedRegime:
        condition = None
    predicted = None if condition is None else analytic_gap(scales, condition.passed)
    found = numeric_gaps(branches, omega_ceiling, min_width)
    return BandGapReport(
        params=params,
        scales=scales,
        condition=condition,
        analytic_gap=predicted,
        numeric_gaps=found,
        agreement=gap_agreement(predicted, found),
        omega_ceiling=float(omega_ceiling),
        min_width=float(min_width),
        k_max=float(grid[-1]),
        samples=int(grid.size),
        branches=branches,
    )


@dataclass(frozen=True)
class SweepCase:
    factor: float | None
    mu_c: float
    report: BandGapReport


def _run_cases(base, mu_cs, factors, executor, options) -> list[SweepCase]:
    def one(pair):
        factor, mu_c = pair
        return SweepCase(factor, mu_c, analyze(base.with_mu_c(mu_c), **options))

    pairs = list(zip(factors, mu_cs))
    if executor is None:
        return [one(pair) for pair in pairs]
    return list(executor.map(one, pairs))


def sweep_mu_c(
    base: MaterialParameters,
    factors: Sequence[float],
    *,
    executor: Executor | None = None,
    **options,
) -> list[SweepCase]:
    """Analyze ``base`` with mu_c = f * mu_c0 for each factor, in input order."""
    factors = [float(f) for f in factors]
    if any(not f > 0 for f in factors):
        raise ValueError(f"factors must be > 0, got {factors}")
    if not factors:
        return []
    require_definite(base)
    threshold = gap_condition(base).threshold
    mu_cs = [f * threshold for f in factors]
    return _run_cases(base, mu_cs, factors, executor, options)


def sweep_mu_c_values(
    base: MaterialParameters,
    values: Sequence[float],
    *,
    executor: Executor | None = None,
    **options,
) -> list[SweepCase]:
    """Same as :func:`sweep_mu_c` with absolute mu_c values in Pa."""
    values = [float(v) for v in values]
    if any(v < 0 for v in values):
        raise ValueError(f"mu_c values must be >= 0, got {values}")
    try:
        threshold = gap_condition(base).threshold
        factors = [v / threshold for v in values]
    except OutsideStatedRegime:
        factors = [None] * len(values)
    return _run_cases(base, values, factors, executor, options)

