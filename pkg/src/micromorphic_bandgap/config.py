"""JSON run configuration with unit handling.

Every quantity is converted to SI on the way in. A quantity may be written
as a bare number (already SI), a string such as ``"200 MPa"`` or an object
``{"value": 200, "unit": "MPa"}``. Example::

    {
      "material": {
        "mu_e": "200 MPa", "lambda_e": "400 MPa", "mu_c": "300 MPa",
        "mu_h": "100 MPa", "lambda_h": "100 MPa", "rho": "2500 kg/m3",
        "d": "2 mm", "rho_micro": "2500 kg/m3", "L_c": "3 mm"
      },
      "grid": {"samples": 1001},
      "sweep": {"factors": [1, 2, 3]}
    }
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .dispersion import DEFAULT_ASYMPTOTE_TOLERANCE, DEFAULT_SAMPLES
from .errors import ConsistencyError, MissingField, ParseError, UnitError
from .material import MaterialParameters

CONSISTENCY_TOLERANCE = 1e-9

# unit -> exact factor to SI; conversion is value * num / den so that e.g.
# "3 mm" becomes exactly 0.003
_UNITS: dict[str, dict[str, Fraction]] = {
    "modulus": {"Pa": Fraction(1), "MPa": Fraction(10**6), "GPa": Fraction(10**9)},
    "length": {"m": Fraction(1), "mm": Fraction(1, 1000)},
    "density": {"kg/m3": Fraction(1)},
    "line_density": {"kg/m": Fraction(1)},
    "curvature": {"Pa·m2": Fraction(1), "MPa·m2": Fraction(10**6)},
}
SI_UNIT = {dim: next(iter(units)) for dim, units in _UNITS.items()}

_MATERIAL_FIELDS = {
    "mu_e": "modulus",
    "lambda_e": "modulus",
    "mu_c": "modulus",
    "mu_h": "modulus",
    "lambda_h": "modulus",
    "rho": "density",
    "eta": "line_density",
    "alpha_c": "curvature",
    "d": "length",
    "rho_micro": "density",
    "L_c": "length",
}
_REQUIRED_MATERIAL = ("mu_e", "lambda_e", "mu_c", "mu_h", "lambda_h", "rho")
_BLOCKS = {
    "material": None,
    "grid": {"k_max", "samples"},
    "gap": {"omega_ceiling", "min_width", "asymptote_tolerance"},
    "sweep": {"factors", "mu_c"},
    "output": {"curves", "report", "sweep"},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S.*?)?\s*$")


def _normalize_unit(unit: str) -> str:
    return unit.strip().replace("*", "·")


def convert(value: float, unit: str | None, dimension: str) -> float:
    """Convert ``value`` given in ``unit`` to SI for the given dimension."""
    table = _UNITS[dimension]
    if unit is None:
        return float(value)
    unit = _normalize_unit(unit)
    if unit not in table:
        allowed = ", ".join(table)
        raise UnitError(f"unit {unit!r} not accepted for a {dimension} (allowed: {allowed})")
    factor = table[unit]
    if factor.denominator == 1:
        return float(value) * factor.numerator
    return float(value) * factor.numerator / factor.denominator


def parse_quantity(raw: Any, dimension: str, name: str = "quantity") -> float:
    if isinstance(raw, bool):
        raise ParseError(f"{name}: expected a number, got {raw!r}")
    if isinstance(raw, (int, float)):
        value, unit = raw, None
    elif isinstance(raw, str):
        m = _QUANTITY.match(raw)
        if not m:
            raise ParseError(f"{name}: cannot read quantity {raw!r}")
        value, unit = float(m.group(1)), m.group(2)
    elif isinstance(raw, dict):
        extra = set(raw) - {"value", "unit"}
        if extra:
            raise ParseError(f"{name}: unknown keys {sorted(extra)}")
        if "value" not in raw:
            raise MissingField(f"{name}: missing 'value'")
        value, unit = raw["value"], raw.get("unit")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"{name}: value must be a number, got {value!r}")
        if unit is not None and not isinstance(unit, str):
            raise UnitError(f"{name}: unit must be a string, got {unit!r}")
    else:
        raise ParseError(f"{name}: cannot read quantity {raw!r}")
    result = convert(value, unit, dimension)
    if not math.isfinite(result):
        raise ParseError(f"{name}: value must be finite, got {raw!r}")
    return result


@dataclass(frozen=True)
class AnalysisConfig:
    material: MaterialParameters
    rho_micro: float | None = None
    d: float | None = None
    L_c: float | None = None
    samples: int = DEFAULT_SAMPLES
    k_max: float | None = None
    omega_ceiling: float | None = None
    min_width: float | None = None
    asymptote_tolerance: float = DEFAULT_ASYMPTOTE_TOLERANCE
    sweep_factors: tuple[float, ...] | None = None
    sweep_mu_c: tuple[float, ...] | None = None
    outputs: dict[str, str] = field(default_factory=dict)

    def analysis_options(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "k_max": self.k_max,
            "omega_ceiling": self.omega_ceiling,
            "min_width": self.min_width,
            "asymptote_tolerance": self.asymptote_tolerance,
        }

    def resolved(self) -> dict[str, Any]:
        """The configuration in SI units, parseable by :func:`parse_config`."""
        material = self.material.as_dict()
        for name in ("rho_micro", "d", "L_c"):
            value = getattr(self, name)
            if value is not None:
                material[name] = value
        doc: dict[str, Any] = {
            "material": {k: {"value": v, "unit": SI_UNIT[_MATERIAL_FIELDS[k]]} for k, v in material.items()},
            "grid": {"samples": self.samples},
            "gap": {"asymptote_tolerance": self.asymptote_tolerance},
        }
        if self.k_max is not None:
            doc["grid"]["k_max"] = self.k_max
        if self.omega_ceiling is not None:
            doc["gap"]["omega_ceiling"] = self.omega_ceiling
        if self.min_width is not None:
            doc["gap"]["min_width"] = self.min_width
        if self.sweep_factors is not None or self.sweep_mu_c is not None:
            doc["sweep"] = {}
            if self.sweep_factors is not None:
                doc["sweep"]["factors"] = list(self.sweep_factors)
            if self.sweep_mu_c is not None:
                doc["sweep"]["mu_c"] = list(self.sweep_mu_c)
        if self.outputs:
            doc["output"] = dict(self.outputs)
        return doc


def _check_consistent(name: str, direct: float, derived: float, how: str) -> None:
    scale = max(abs(direct), abs(derived))
    if scale > 0 and abs(direct - derived) > CONSISTENCY_TOLERANCE * scale:
        raise ConsistencyError(f"{name} = {direct!r} disagrees with {how} = {derived!r}")


def _positive_number(raw: Any, name: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ParseError(f"{name} must be a number, got {raw!r}")
    if not (math.isfinite(raw) and raw > 0):
        raise ParseError(f"{name} must be finite and > 0, got {raw!r}")
    return float(raw)


def _material(block: dict[str, Any]) -> tuple[MaterialParameters, dict[str, float | None]]:
    unknown = set(block) - set(_MATERIAL_FIELDS)
    if unknown:
        raise ParseError(f"material: unknown keys {sorted(unknown)}")
    q = {name: parse_quantity(raw, _MATERIAL_FIELDS[name], name) for name, raw in block.items()}
    for name in _REQUIRED_MATERIAL:
        if name not in q:
            raise MissingField(f"material.{name} is required")

    # the direct value wins; a derived value must agree with it
    eta = q.get("eta")
    if "d" in q or "rho_micro" in q:
        if "d" in q and "rho_micro" in q:
            derived = q["d"] ** 2 * q["rho_micro"]
            if eta is None:
                eta = derived
            else:
                _check_consistent("eta", eta, derived, "d^2 * rho_micro")
        elif eta is None:
            raise MissingField("eta needs both d and rho_micro when not given directly")
    if eta is None:
        raise MissingField("material.eta (or d and rho_micro) is required")

    alpha_c = q.get("alpha_c")
    if "L_c" in q:
        derived = q["mu_e"] * q["L_c"] ** 2
        if alpha_c is None:
            alpha_c = derived
        else:
            _check_consistent("alpha_c", alpha_c, derived, "mu_e * L_c^2")
    if alpha_c is None:
        raise MissingField("material.alpha_c (or L_c) is required")

    try:
        params = MaterialParameters(
            mu_e=q["mu_e"],
            lambda_e=q["lambda_e"],
            mu_c=q["mu_c"],
            mu_h=q["mu_h"],
            lambda_h=q["lambda_h"],
            alpha_c=alpha_c,
            rho=q["rho"],
            eta=eta,
        )
    except ValueError as exc:
        raise ParseError(f"material: {exc}") from exc
    return params, {name: q.get(name) for name in ("rho_micro", "d", "L_c")}


def parse_config(text: bytes | str) -> AnalysisConfig:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"configuration is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a JSON object")
    unknown = set(doc) - set(_BLOCKS)
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}")
    for name, allowed in _BLOCKS.items():
        block = doc.get(name, {})
        if not isinstance(block, dict):
            raise ParseError(f"{name} must be an object")
        if allowed is not None and set(block) - allowed:
            raise ParseError(f"{name}: unknown keys {sorted(set(block) - allowed)}")
    if "material" not in doc:
        raise MissingField("material block is required")

    params, meta = _material(doc["material"])
    grid, gap = doc.get("grid", {}), doc.get("gap", {})

    samples = grid.get("samples", DEFAULT_SAMPLES)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ParseError(f"grid.samples must be an integer >= 2, got {samples!r}")
    k_max = _positive_number(grid["k_max"], "grid.k_max") if grid.get("k_max") is not None else None
    ceiling = gap.get("omega_ceiling")
    ceiling = _positive_number(ceiling, "gap.omega_ceiling") if ceiling is not None else None
    min_width = gap.get("min_width")
    min_width = _positive_number(min_width, "gap.min_width") if min_width is not None else None
    tol = _positive_number(gap.get("asymptote_tolerance", DEFAULT_ASYMPTOTE_TOLERANCE), "gap.asymptote_tolerance")

    sweep = doc.get("sweep", {})
    factors = mu_cs = None
    if "factors" in sweep:
        if not isinstance(sweep["factors"], list):
            raise ParseError("sweep.factors must be a list")
        factors = tuple(_positive_number(f, "sweep.factors[]") for f in sweep["factors"])
    if "mu_c" in sweep:
        if not isinstance(sweep["mu_c"], list):
            raise ParseError("sweep.mu_c must be a list")
        mu_cs = tuple(parse_quantity(v, "modulus", "sweep.mu_c[]") for v in sweep["mu_c"])

    outputs = doc.get("output", {})
    for key, value in outputs.items():
        if not isinstance(value, str):
            raise ParseError(f"output.{key} must be a path string")

    return AnalysisConfig(
        material=params,
        samples=samples,
        k_max=k_max,
        omega_ceiling=ceiling,
        min_width=min_width,
        asymptote_tolerance=tol,
        sweep_factors=factors,
        sweep_mu_c=mu_cs,
        outputs=dict(outputs),
        **meta,
    )
