"""Plane-wave dispersion branches omega(k).

The twelve scalar plane-wave equations split into a longitudinal triple
(u_1, P^D, P^S), two identical transverse triples (u_xi, P_(1xi), P_[1xi])
for xi = 2, 3 and three uncoupled micro-distortion modes. Each coupled
triple gives a 3x3 matrix A(k, omega) whose determinant is a cubic in
s = omega^2; the uncoupled modes have closed-form frequencies.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ComplexRootPair, InsufficientSamples, NegativeSquaredFrequency
from .material import CharacteristicScales, MaterialParameters

logger = logging.getLogger(__name__)

# Relative thresholds in units of the root sum (see _real_cubic_roots).
IMAG_TOLERANCE = 1e-6
NEGATIVE_TOLERANCE = 1e-12
CLUSTER_TOLERANCE = 1e-7

DEFAULT_SAMPLES = 1001
DEFAULT_ASYMPTOTE_TOLERANCE = 1e-3
MIN_ASYMPTOTE_SAMPLES = 16


class WaveFamily(enum.Enum):
    LONGITUDINAL = "Longitudinal"
    TRANSVERSE = "Transverse"
    UNCOUPLED = "Uncoupled"


class BranchLabel(str, enum.Enum):
    LA = "LA"
    LO1 = "LO1"
    LO2 = "LO2"
    TA = "TA"
    TO1 = "TO1"
    TO2 = "TO2"
    TRO = "TRO"
    TSO = "TSO"
    TCVO = "TCVO"

    @property
    def family(self) -> WaveFamily:
        return _FAMILY[self]

    @property
    def multiplicity(self) -> int:
        # xi = 2 and xi = 3 give bit-identical transverse matrices
        return 2 if self.family is WaveFamily.TRANSVERSE else 1

    @property
    def variable(self) -> str:
        """Micro-distortion variable carried by an uncoupled branch."""
        return _UNCOUPLED_VARIABLE.get(self, "")

    def __str__(self) -> str:
        return self.value


_FAMILY = {
    BranchLabel.LA: WaveFamily.LONGITUDINAL,
    BranchLabel.LO1: WaveFamily.LONGITUDINAL,
    BranchLabel.LO2: WaveFamily.LONGITUDINAL,
    BranchLabel.TA: WaveFamily.TRANSVERSE,
    BranchLabel.TO1: WaveFamily.TRANSVERSE,
    BranchLabel.TO2: WaveFamily.TRANSVERSE,
    BranchLabel.TRO: WaveFamily.UNCOUPLED,
    BranchLabel.TSO: WaveFamily.UNCOUPLED,
    BranchLabel.TCVO: WaveFamily.UNCOUPLED,
}
_UNCOUPLED_VARIABLE = {
    BranchLabel.TSO: "P_(23)",
    BranchLabel.TRO: "P_[23]",
    BranchLabel.TCVO: "P^V",
}
FAMILY_LABELS = {
    WaveFamily.LONGITUDINAL: (BranchLabel.LA, BranchLabel.LO1, BranchLabel.LO2),
    WaveFamily.TRANSVERSE: (BranchLabel.TA, BranchLabel.TO1, BranchLabel.TO2),
    WaveFamily.UNCOUPLED: (BranchLabel.TSO, BranchLabel.TRO, BranchLabel.TCVO),
}


# -- uncoupled modes -------------------------------------------------------


def uncoupled_omega(scales: CharacteristicScales, k: float) -> list[tuple[BranchLabel, float]]:
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k!r}")
    omegas = _uncoupled_grid(scales, np.array([float(k)]))[0]
    return list(zip(FAMILY_LABELS[WaveFamily.UNCOUPLED], (float(w) for w in omegas)))


def _uncoupled_grid(scales: CharacteristicScales, k: np.ndarray) -> np.ndarray:
    dispersive = (k * scales.c_m) ** 2
    shear = np.sqrt(scales.omega_s**2 + dispersive)
    rotation = np.sqrt(scales.omega_r**2 + dispersive)
    return np.stack([shear, rotation, shear], axis=-1)


# -- dispersion matrices ---------------------------------------------------


@dataclass(frozen=True)
class DispersionMatrix:
    entries: np.ndarray
    family: WaveFamily

    def det(self) -> complex:
        return complex(np.linalg.det(self.entries))


def _stack(rows) -> np.ndarray:
    """Assemble a (..., 3, 3) complex array from nested rows of broadcastable entries."""
    flat = np.broadcast_arrays(*[np.asarray(e, dtype=complex) for row in rows for e in row])
    return np.stack(flat, axis=-1).reshape(flat[0].shape + (3, 3))


def longitudinal_entries(params: MaterialParameters, scales: CharacteristicScales, k, omega) -> np.ndarray:
    """Entries of the longitudinal matrix, broadcast over ``k`` and ``omega``."""
    p = params
    k = np.asarray(k, dtype=float)
    w2 = np.asarray(omega, dtype=float) ** 2
    kk = k * k
    cm2 = scales.c_m**2
    bulk_e = 3.0 * p.lambda_e + 2.0 * p.mu_e
    return _stack(
        [
            [-w2 + scales.c_p**2 * kk, 1j * k * 2.0 * p.mu_e / p.rho, 1j * k * bulk_e / p.rho],
            [
                -1j * k * (4.0 / 3.0) * p.mu_e / p.eta,
                -w2 + kk * cm2 / 3.0 + scales.omega_s**2,
                -(2.0 / 3.0) * kk * cm2,
            ],
            [
                -1j * k * bulk_e / (3.0 * p.eta),
                -kk * cm2 / 3.0,
                -w2 + (2.0 / 3.0) * kk * cm2 + scales.omega_p**2,
            ],
        ]
    )


def transverse_entries(params: MaterialParameters, scales: CharacteristicScales, k, omega) -> np.ndarray:
    """Entries of the transverse matrix, broadcast over ``k`` and ``omega``."""
    p = params
    k = np.asarray(k, dtype=float)
    w2 = np.asarray(omega, dtype=float) ** 2
    kk = k * k
    cm2 = scales.c_m**2
    wr2 = scales.omega_r**2
    return _stack(
        [
            [-w2 + kk * scales.c_s**2, 1j * k * 2.0 * p.mu_e / p.rho, -1j * k * p.eta / p.rho * wr2],
            [-1j * k * 2.0 * p.mu_e / p.eta, -2.0 * w2 + kk * cm2 + 2.0 * scales.omega_s**2, kk * cm2],
            [1j * k * wr2, kk * cm2, -2.0 * w2 + kk * cm2 + 2.0 * wr2],
        ]
    )


def build_longitudinal_matrix(
    params: MaterialParameters, scales: CharacteristicScales, k: float, omega: float
) -> DispersionMatrix:
    """Matrix acting on the amplitudes of (u_1, P^D, P^S)."""
    return DispersionMatrix(longitudinal_entries(params, scales, k, omega), WaveFamily.LONGITUDINAL)


def build_transverse_matrix(
    params: MaterialParameters, scales: CharacteristicScales, k: float, omega: float
) -> DispersionMatrix:
    """Matrix acting on the amplitudes of (u_xi, P_(1xi), P_[1xi]), xi = 2 or 3."""
    return DispersionMatrix(transverse_entries(params, scales, k, omega), WaveFamily.TRANSVERSE)


def build_matrix(
    family: WaveFamily, params: MaterialParameters, scales: CharacteristicScales, k: float, omega: float
) -> DispersionMatrix:
    if family is WaveFamily.LONGITUDINAL:
        return build_longitudinal_matrix(params, scales, k, omega)
    if family is WaveFamily.TRANSVERSE:
        return build_transverse_matrix(params, scales, k, omega)
    raise ValueError(f"no dispersion matrix for {family}")


# -- determinant as a cubic in s = omega^2 ---------------------------------


def determinant_coefficients(family: WaveFamily, params: MaterialParameters, k) -> np.ndarray:
    """Coefficients (c3, c2, c1, c0) with det A = c3 s^3 + c2 s^2 + c1 s + c0.

    Vectorized over ``k``; the result has shape ``np.shape(k) + (4,)``.
    For lambda_e, lambda_h >= 0 every product below is non-negative, so the
    expansion has no cancellation even when k^2 c^2 >> omega^2.
    """
    p = params
    k2 = np.asarray(k, dtype=float) ** 2
    k4 = k2 * k2
    me, le, mc, mh, lh = p.mu_e, p.lambda_e, p.mu_c, p.mu_h, p.lambda_h
    al, rho, eta = p.alpha_c, p.rho, p.eta
    if family is WaveFamily.LONGITUDINAL:
        c3 = -np.ones_like(k2)
        c2 = (k2 * (al * rho + eta * (le + 2 * me)) + rho * (3 * le + 3 * lh + 4 * me + 4 * mh)) / (eta * rho)
        c1 = -(
            k4 * al * eta * (le + 2 * me)
            + k2
            * (
                al * rho * (le + lh + 2 * me + 2 * mh)
                + eta * (3 * le * lh + 6 * le * me + 4 * le * mh + 6 * lh * me + 4 * me**2 + 8 * me * mh)
            )
            + 2 * rho * (me + mh) * (3 * le + 3 * lh + 2 * me + 2 * mh)
        ) / (eta**2 * rho)
        c0 = (
            k2
            * (
                k2 * al * (le + 2 * me) * (lh + 2 * mh)
                + 2
                * (
                    3 * le * lh * me
                    + 3 * le * lh * mh
                    + 6 * le * me * mh
                    + 2 * le * mh**2
                    + 2 * lh * me**2
                    + 6 * lh * me * mh
                    + 4 * me**2 * mh
                    + 4 * me * mh**2
                )
            )
            / (eta**2 * rho)
        )
    elif family is WaveFamily.TRANSVERSE:
        c3 = -4.0 * np.ones_like(k2)
        c2 = 4 * (k2 * (al * rho + eta * (mc + me)) + 2 * rho * (mc + me + mh)) / (eta * rho)
        c1 = -4 * (
            k4 * al * eta * (mc + me)
            + k2 * (al * rho * (mc + me + mh) + eta * (4 * mc * me + 2 * mc * mh + 2 * me * mh))
            + 4 * rho * mc * (me + mh)
        ) / (eta**2 * rho)
        c0 = 4 * k2 * mh * (k2 * al * (mc + me) + 4 * mc * me) / (eta**2 * rho)
    else:
        raise ValueError(f"no dispersion determinant for {family}")
    return np.stack([c3, c2, c1, c0], axis=-1)


def _real_cubic_roots(coeffs: np.ndarray) -> np.ndarray:
    """Non-negative real roots s of a batch of cubics, ascending, shape (n, 3).

    The cubic is rescaled by its root sum so the companion matrices are O(1),
    solved by eigenvalues, then each simple root gets one Newton step.
    Clustered roots (crossings, degenerate cutoffs) are replaced by their
    mean, which is well conditioned where the individual roots are not.
    """
    coeffs = np.atleast_2d(coeffs)
    c3, c2, c1, c0 = coeffs.T
    scale = np.abs(c2 / c3)
    scale = np.where(scale > 0.0, scale, 1.0)
    a2 = c2 / (c3 * scale)
    a1 = c1 / (c3 * scale**2)
    a0 = c0 / (c3 * scale**3)

    n = coeffs.shape[0]
    companion = np.zeros((n, 3, 3))
    companion[:, 0, 0] = -a2
    companion[:, 0, 1] = -a1
    companion[:, 0, 2] = -a0
    companion[:, 1, 0] = 1.0
    companion[:, 2, 1] = 1.0
    eig = np.linalg.eigvals(companion)

    size = np.maximum(1.0, np.abs(eig).max(axis=1))
    bad = np.abs(eig.imag) > IMAG_TOLERANCE * size[:, None]
    if bad.any():
        row = int(np.argmax(bad.any(axis=1)))
        raise ComplexRootPair(f"non-real roots s/scale = {eig[row]} (scale {scale[row]:.6g})")
    sigma = np.sort(eig.real, axis=1)

    def poly(x):
        return ((x + a2[:, None]) * x + a1[:, None]) * x + a0[:, None]

    def dpoly(x):
        return (3.0 * x + 2.0 * a2[:, None]) * x + a1[:, None]

    gaps = np.diff(sigma, axis=1)
    close = gaps <= CLUSTER_TOLERANCE * size[:, None]
    simple = np.ones_like(sigma, dtype=bool)
    simple[:, :2] &= ~close
    simple[:, 1:] &= ~close

    with np.errstate(divide="ignore", invalid="ignore"):
        slope = dpoly(sigma)
        stepped = sigma - poly(sigma) / slope
    better = simple & np.isfinite(stepped) & (np.abs(poly(stepped)) <= np.abs(poly(sigma)))
    sigma = np.where(better, stepped, sigma)

    for j in range(2):
        merge = close[:, j]
        if merge.any():
            if j == 0:
                # a triple cluster merges all three
                triple = merge & close[:, 1]
                mean3 = sigma[triple].mean(axis=1)
                sigma[triple] = mean3[:, None]
                merge = merge & ~triple
            mean2 = 0.5 * (sigma[merge, j] + sigma[merge, j + 1])
            sigma[merge, j] = mean2
            sigma[merge, j + 1] = mean2
    sigma = np.sort(sigma, axis=1)

    too_negative = sigma < -NEGATIVE_TOLERANCE * size[:, None]
    if too_negative.any():
        row = int(np.argmax(too_negative.any(axis=1)))
        raise NegativeSquaredFrequency(f"s/scale = {sigma[row]} (scale {scale[row]:.6g})")
    return np.maximum(sigma, 0.0) * scale[:, None]


def _coupled_grid(family: WaveFamily, params: MaterialParameters, k: np.ndarray) -> np.ndarray:
    return np.sqrt(_real_cubic_roots(determinant_coefficients(family, params, k)))


def coupled_omegas(
    family: WaveFamily, params: MaterialParameters, scales: CharacteristicScales, k: float
) -> np.ndarray:
    """The three frequencies solving det A(k, omega) = 0, ascending.

    ``scales`` is accepted for symmetry with the matrix builders; the
    determinant coefficients are written directly in the moduli.
    """
    if family is WaveFamily.UNCOUPLED:
        raise ValueError("uncoupled modes have closed-form frequencies, use uncoupled_omega")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k!r}")
    return _coupled_grid(family, params, np.array([float(k)]))[0]


# -- branches --------------------------------------------------------------


class BranchPoint(NamedTuple):
    k: float
    omega: float


@dataclass(frozen=True, eq=False)
class DispersionBranch:
    label: BranchLabel
    k: np.ndarray
    omega: np.ndarray
    asymptote: float | None = None

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        omega = np.asarray(self.omega, dtype=float)
        if k.shape != omega.shape or k.ndim != 1 or k.size == 0:
            raise ValueError("k and omega must be non-empty 1-D arrays of equal length")
        if np.any(np.diff(k) <= 0):
            raise ValueError("k must be strictly increasing")
        if k[0] < 0 or np.any(omega < 0):
            raise ValueError("k and omega must be non-negative")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "omega", omega)

    @property
    def multiplicity(self) -> int:
        return self.label.multiplicity

    @property
    def family(self) -> WaveFamily:
        return self.label.family

    @property
    def cutoff(self) -> float:
        return float(self.omega[0])

    @property
    def is_acoustic(self) -> bool:
        return self.label in (BranchLabel.LA, BranchLabel.TA)

    @property
    def points(self) -> list[BranchPoint]:
        return [BranchPoint(float(k), float(w)) for k, w in zip(self.k, self.omega)]

    def __len__(self) -> int:
        return self.k.size


def default_k_max(scales: CharacteristicScales) -> float:
    velocities = [c for c in (scales.c_m, scales.c_s, scales.c_p) if c >= 1e-12]
    if not velocities:
        raise ValueError("all characteristic velocities vanish")
    return 10.0 * max(scales.omega_p, scales.omega_s, scales.omega_r) / min(velocities)


def default_k_grid(
    scales: CharacteristicScales, samples: int = DEFAULT_SAMPLES, k_max: float | None = None
) -> np.ndarray:
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    if k_max is None:
        k_max = default_k_max(scales)
    if not k_max > 0:
        raise ValueError(f"k_max must be > 0, got {k_max!r}")
    return np.linspace(0.0, k_max, samples)


def detect_asymptote(
    branch: DispersionBranch, tolerance: float = DEFAULT_ASYMPTOTE_TOLERANCE
) -> float | None:
    """Large-k limit of a saturating branch, or None for a growing one.

    The branch counts as saturating when omega grows by less than
    ``tolerance`` (relative) across the last tenth of its k-range. The limit
    is then extrapolated to 1/k^2 -> 0 from three points of that window,
    assuming omega^2 = a + b/k^2 + c/k^4 there; if the extrapolation moves
    further than the observed growth allows, the terminal value is used.
    """
    if len(branch) < MIN_ASYMPTOTE_SAMPLES:
        raise InsufficientSamples(f"{branch.label}: {len(branch)} points, need {MIN_ASYMPTOTE_SAMPLES}")
    k, omega = branch.k, branch.omega
    start = k[-1] - 0.1 * (k[-1] - k[0])
    window = np.flatnonzero(k >= start)
    if window.size < 3 or k[window[0]] <= 0.0:
        raise InsufficientSamples(f"{branch.label}: final tenth of the k-range holds {window.size} points")
    terminal = float(omega[-1])
    if terminal == 0.0:
        return None
    growth = abs(terminal - omega[window[0]]) / terminal
    if growth >= tolerance:
        return None

    idx = window[[0, window.size // 2, -1]]
    x = 1.0 / k[idx] ** 2
    y = omega[idx] ** 2
    # Lagrange interpolation evaluated at x = 0
    limit = 0.0
    for i in range(3):
        others = [j for j in range(3) if j != i]
        weight = np.prod([x[j] / (x[j] - x[i]) for j in others])
        limit += weight * y[i]
    if not math.isfinite(limit) or limit < 0.0:
        return terminal
    limit = math.sqrt(limit)
    if abs(limit - terminal) > 10.0 * tolerance * terminal:
        return terminal
    return limit


def monotonicity_violations(branch: DispersionBranch) -> list[tuple[float, float]]:
    """(k, delta omega) for every grid step where omega decreases."""
    d = np.diff(branch.omega)
    idx = np.flatnonzero(d < 0)
    return [(float(branch.k[i + 1]), float(d[i])) for i in idx]


def _validate_grid(k_grid) -> np.ndarray:
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size == 0:
        raise ValueError("k_grid must be a non-empty 1-D sequence")
    if k[0] != 0.0:
        raise ValueError(f"k_grid must start at 0, got {k[0]!r}")
    if np.any(np.diff(k) <= 0):
        raise ValueError("k_grid must be strictly increasing")
    return k


def _solve_chunk(args):
    params, scales, k = args
    return (
        _coupled_grid(WaveFamily.LONGITUDINAL, params, k),
        _coupled_grid(WaveFamily.TRANSVERSE, params, k),
        _uncoupled_grid(scales, k),
    )


def sample_branches(
    params: MaterialParameters,
    scales: CharacteristicScales,
    k_grid: Sequence[float],
    *,
    asymptote_tolerance: float = DEFAULT_ASYMPTOTE_TOLERANCE,
    executor: Executor | None = None,
    chunks: int = 8,
) -> list[DispersionBranch]:
    """All nine distinct branches on ``k_grid``, in label order.

    Within a coupled family the branches are named by ascending frequency at
    each k, so crossings swap identities rather than being tracked. With an
    ``executor`` the grid is split into contiguous chunks evaluated
    concurrently; results are reassembled in grid order.
    """
    k = _validate_grid(k_grid)
    if executor is None:
        longitudinal, transverse, uncoupled = _solve_chunk((params, scales, k))
    else:
        pieces = [c for c in np.array_split(k, max(1, min(chunks, k.size))) if c.size]
        results = list(executor.map(_solve_chunk, [(params, scales, c) for c in pieces]))
        longitudinal, transverse, uncoupled = (np.concatenate(r) for r in zip(*results))

    columns = {
        WaveFamily.LONGITUDINAL: longitudinal,
        WaveFamily.TRANSVERSE: transverse,
        WaveFamily.UNCOUPLED: uncoupled,
    }
    branches = []
    for family, labels in FAMILY_LABELS.items():
        for j, label in enumerate(labels):
            branch = DispersionBranch(label, k, columns[family][:, j])
            if len(branch) >= MIN_ASYMPTOTE_SAMPLES:
                branch = DispersionBranch(label, k, branch.omega, detect_asymptote(branch, asymptote_tolerance))
            for kv, dw in monotonicity_violations(branch):
                logger.warning("%s decreases at k=%.6g rad/m by %.3g rad/s", label, kv, dw)
            branches.append(branch)
    return branches
