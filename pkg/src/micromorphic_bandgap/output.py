"""CSV and JSON writers for dispersion curves and gap reports."""

from __future__ import annotations

import io
import json
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO

from .bandgap import BandGapReport, GapInterval, SweepCase
from .dispersion import DispersionBranch
from .material import validate_definiteness

CURVE_HEADER = ("branch", "multiplicity", "k_rad_per_m", "omega_rad_per_s", "frequency_hz")

TWO_PI = 2.0 * math.pi


def to_hz(omega: float) -> float:
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return omega / TWO_PI


def format_float(x: float) -> str:
    """Shortest round-trip decimal; integral values lose the trailing '.0'."""
    x = float(x)
    if x == 0.0:
        return "0"
    text = repr(x)
    return text[:-2] if text.endswith(".0") else text


@contextmanager
def _open_text(destination):
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            yield fh
    else:
        yield destination


def emit_curves(branches: Iterable[DispersionBranch], destination: str | Path | TextIO) -> int:
    """Write all branches as one CSV table; returns the number of data rows."""
    branches = sorted(branches, key=lambda b: str(b.label))
    if not branches:
        raise ValueError("no branches to write")
    buf = io.StringIO()
    buf.write(",".join(CURVE_HEADER) + "\n")
    rows = 0
    for branch in branches:
        label, mult = str(branch.label), str(branch.multiplicity)
        for k, omega in zip(branch.k, branch.omega):
            buf.write(f"{label},{mult},{format_float(k)},{format_float(omega)},{format_float(to_hz(omega))}\n")
            rows += 1
    with _open_text(destination) as fh:
        fh.write(buf.getvalue())
    return rows


def gap_to_dict(gap: GapInterval) -> dict[str, Any]:
    return {
        "source": gap.source,
        "low_rad_per_s": gap.low,
        "high_rad_per_s": gap.high,
        "low_hz": to_hz(gap.low),
        "high_hz": to_hz(gap.high),
        "width_rad_per_s": gap.width,
    }


def report_to_dict(report: BandGapReport) -> dict[str, Any]:
    condition = None
    if report.condition is not None:
        condition = {
            "passed": report.condition.passed,
            "clauses": {name: ok for name, ok in report.condition.clauses},
        }
    return {
        "mu_c_pa": report.params.mu_c,
        "mu_c_threshold_pa": report.mu_c_threshold,
        "gap_condition": condition,
        "analytic_gap": None if report.analytic_gap is None else gap_to_dict(report.analytic_gap),
        "numeric_gaps": [gap_to_dict(g) for g in report.numeric_gaps],
        "agreement": report.agreement,
        "has_gap": report.has_gap,
        "definiteness": [
            {"condition": c.name, "margin": c.margin, "passed": c.passed}
            for c in validate_definiteness(report.params)
        ],
        "parameters": report.params.as_dict(),
        "scales": report.scales.as_dict(),
        "grid": {"k_max_rad_per_m": report.k_max, "samples": report.samples},
        "omega_ceiling_rad_per_s": report.omega_ceiling,
        "min_width_rad_per_s": report.min_width,
    }


def sweep_to_list(cases: Sequence[SweepCase]) -> list[dict[str, Any]]:
    out = []
    for case in cases:
        entry = report_to_dict(case.report)
        entry["factor"] = case.factor
        out.append(entry)
    return out


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit_gap_report(
    report: BandGapReport | Sequence[SweepCase], destination: str | Path | TextIO
) -> None:
    doc = report_to_dict(report) if isinstance(report, BandGapReport) else sweep_to_list(report)
    text = dumps(doc)
    with _open_text(destination) as fh:
        fh.write(text)
