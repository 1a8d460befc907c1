"""Constitutive parameters of the relaxed micromorphic continuum.

All quantities are strict SI: moduli in Pa, ``alpha_c`` in Pa m^2, ``rho`` in
kg/m^3 and the micro-inertia ``eta`` in kg/m.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .errors import DegenerateHomogenization, InvalidOrdering, NegativeRadicand

_HOMOGENIZATION_EPS = 1e-12


@dataclass(frozen=True)
class MaterialParameters:
    mu_e: float
    lambda_e: float
    mu_c: float
    mu_h: float
    lambda_h: float
    alpha_c: float
    rho: float
    eta: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.rho <= 0.0:
            raise ValueError(f"rho must be > 0, got {self.rho!r}")
        if self.eta <= 0.0:
            raise ValueError(f"eta must be > 0, got {self.eta!r}")

    def with_mu_c(self, mu_c: float) -> MaterialParameters:
        return replace(self, mu_c=mu_c)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def table1_parameters(mu_c: float = 300e6) -> MaterialParameters:
    """Reference metamaterial (lambda_e = 2 mu_e, eta = d^2 rho', alpha_c = mu_e L_c^2)."""
    mu_e = 200e6
    return MaterialParameters(
        mu_e=mu_e,
        lambda_e=2.0 * mu_e,
        mu_c=mu_c,
        mu_h=100e6,
        lambda_h=100e6,
        alpha_c=mu_e * 3e-3**2,
        rho=2500.0,
        eta=(2e-3) ** 2 * 2500.0,
    )


# -- positive definiteness -------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    """One definiteness inequality evaluated on actual numbers.

    ``margin`` is the signed distance to the boundary in Pa (Pa m^2 for the
    curvature modulus); ``passed`` honours strict vs non-strict inequalities.
    """

    name: str
    margin: float
    strict: bool

    @property
    def passed(self) -> bool:
        return self.margin > 0.0 if self.strict else self.margin >= 0.0


def validate_definiteness(params: MaterialParameters) -> list[ConditionResult]:
    p = params
    return [
        ConditionResult("mu_e > 0", p.mu_e, True),
        ConditionResult("mu_c >= 0", p.mu_c, False),
        ConditionResult("3*lambda_e + 2*mu_e > 0", 3.0 * p.lambda_e + 2.0 * p.mu_e, True),
        ConditionResult("mu_h > 0", p.mu_h, True),
        ConditionResult("3*lambda_h + 2*mu_h > 0", 3.0 * p.lambda_h + 2.0 * p.mu_h, True),
        ConditionResult("alpha_c > 0", p.alpha_c, True),
    ]


def is_definite(params: MaterialParameters) -> bool:
    return all(c.passed for c in validate_definiteness(params))


def failed_conditions(params: MaterialParameters) -> list[ConditionResult]:
    return [c for c in validate_definiteness(params) if not c.passed]


# -- characteristic velocities and frequencies -----------------------------


@dataclass(frozen=True)
class CharacteristicScales:
    c_m: float
    c_s: float
    c_p: float
    omega_s: float
    omega_p: float
    omega_r: float
    omega_l: float
    omega_t: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _root(name: str, radicand: float) -> float:
    if radicand < 0.0:
        raise NegativeRadicand(name, radicand)
    return math.sqrt(radicand)


def characteristic_scales(params: MaterialParameters) -> CharacteristicScales:
    p = params
    return CharacteristicScales(
        c_m=_root("c_m", p.alpha_c / p.eta),
        c_s=_root("c_s", (p.mu_e + p.mu_c) / p.rho),
        c_p=_root("c_p", (p.lambda_e + 2.0 * p.mu_e) / p.rho),
        omega_s=_root("omega_s", 2.0 * (p.mu_e + p.mu_h) / p.eta),
        omega_p=_root(
            "omega_p",
            ((3.0 * p.lambda_e + 2.0 * p.mu_e) + (3.0 * p.lambda_h + 2.0 * p.mu_h)) / p.eta,
        ),
        omega_r=_root("omega_r", 2.0 * p.mu_c / p.eta),
        omega_l=_root("omega_l", (p.lambda_h + 2.0 * p.mu_h) / p.eta),
        omega_t=_root("omega_t", p.mu_h / p.eta),
    )


# -- homogenization --------------------------------------------------------


@dataclass(frozen=True)
class MacroLame:
    lambda_macro: float
    mu_macro: float


def macro_from_micro(params: MaterialParameters) -> MacroLame:
    """Macroscopic Lame moduli seen by a quasi-static test.

    Both channels are harmonic means of the meso and micro stiffnesses:
    mu = mu_e mu_h / (mu_e + mu_h) and likewise for the bulk-like
    combination 2 mu + 3 lambda.
    """
    p = params
    shear_sum = p.mu_e + p.mu_h
    bulk_e = 2.0 * p.mu_e + 3.0 * p.lambda_e
    bulk_h = 2.0 * p.mu_h + 3.0 * p.lambda_h
    bulk_sum = bulk_e + bulk_h
    if abs(shear_sum) <= _HOMOGENIZATION_EPS * max(abs(p.mu_e), abs(p.mu_h), 1.0):
        raise DegenerateHomogenization(f"mu_e + mu_h = {shear_sum!r}")
    if abs(bulk_sum) <= _HOMOGENIZATION_EPS * max(abs(bulk_e), abs(bulk_h), 1.0):
        raise DegenerateHomogenization(
            f"(2 mu_e + 3 lambda_e) + (2 mu_h + 3 lambda_h) = {bulk_sum!r}"
        )
    mu = p.mu_e * p.mu_h / shear_sum
    bulk = bulk_e * bulk_h / bulk_sum
    return MacroLame(lambda_macro=(bulk - 2.0 * mu) / 3.0, mu_macro=mu)


def micro_from_macro(mu_macro: float, mu_h: float) -> float:
    """Meso shear modulus mu_e that homogenizes to ``mu_macro`` given ``mu_h``."""
    if not mu_h > mu_macro:
        raise InvalidOrdering(f"need mu_h > mu, got mu_h={mu_h!r}, mu={mu_macro!r}")
    return mu_h * mu_macro / (mu_h - mu_macro)
