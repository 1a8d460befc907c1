import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from oracles import bisection_roots, det_real, leibniz_terms, pencil_omegas, random_definite_params

from micromorphic_bandgap.dispersion import (
    BranchLabel,
    FAMILY_LABELS,
    DispersionBranch,
    WaveFamily,
    _real_cubic_roots,
    build_longitudinal_matrix,
    build_matrix,
    build_transverse_matrix,
    coupled_omegas,
    default_k_grid,
    default_k_max,
    detect_asymptote,
    determinant_coefficients,
    monotonicity_violations,
    sample_branches,
    uncoupled_omega,
)
from micromorphic_bandgap.errors import ComplexRootPair, InsufficientSamples, NegativeSquaredFrequency
from micromorphic_bandgap.material import CharacteristicScales, characteristic_scales, table1_parameters

COUPLED = [WaveFamily.LONGITUDINAL, WaveFamily.TRANSVERSE]


# -- labels ----------------------------------------------------------------


def test_label_families_and_multiplicity():
    fam = {label: label.family for label in BranchLabel}
    assert [l for l, f in fam.items() if f is WaveFamily.LONGITUDINAL] == ["LA", "LO1", "LO2"]
    assert [l for l, f in fam.items() if f is WaveFamily.TRANSVERSE] == ["TA", "TO1", "TO2"]
    assert [l for l, f in fam.items() if f is WaveFamily.UNCOUPLED] == ["TRO", "TSO", "TCVO"]
    assert BranchLabel.TO1.multiplicity == 2 and BranchLabel.LO1.multiplicity == 1
    assert BranchLabel.TCVO.variable == "P^V"
    assert BranchLabel.TSO.variable == "P_(23)"
    assert BranchLabel.TRO.variable == "P_[23]"


# -- uncoupled -------------------------------------------------------------


def test_uncoupled_cutoffs(table1_scales):
    s = table1_scales
    got = uncoupled_omega(s, 0.0)
    assert [l for l, _ in got] == [BranchLabel.TSO, BranchLabel.TRO, BranchLabel.TCVO]
    assert [w for _, w in got] == [s.omega_s, s.omega_r, s.omega_s]


def test_uncoupled_dispersionless_when_cm_vanishes(table1_scales):
    s = CharacteristicScales(**{**table1_scales.as_dict(), "c_m": 0.0})
    for k in (0.0, 1.0, 1e3, 1e7):
        assert [w for _, w in uncoupled_omega(s, k)] == [s.omega_s, s.omega_r, s.omega_s]


def test_uncoupled_shear_at_k_1000(table1_scales):
    # c_m^2 = alpha_c/eta = 1.8e5, omega_s^2 = 6e10
    (_, tso), _, _ = uncoupled_omega(table1_scales, 1000.0)
    assert tso == pytest.approx(math.sqrt(6e10 + 1e6 * 1.8e5), rel=1e-12)
    assert tso == pytest.approx(4.89898e5, rel=1e-5)
    # c_m^2 k^2 = 1.8e8 happens at k^2 = 1000, not k = 1000
    (_, tso_root1000), _, _ = uncoupled_omega(table1_scales, math.sqrt(1000.0))
    assert tso_root1000 == pytest.approx(2.4532e5, rel=1e-4)


def test_uncoupled_rejects_negative_k(table1_scales):
    with pytest.raises(ValueError):
        uncoupled_omega(table1_scales, -1.0)


# -- matrices --------------------------------------------------------------


def test_longitudinal_matrix_at_zero_k(table1, table1_scales):
    s, w = table1_scales, 1.234e5
    a = build_longitudinal_matrix(table1, s, 0.0, w).entries
    expected = np.diag([-(w**2), -(w**2) + s.omega_s**2, -(w**2) + s.omega_p**2])
    np.testing.assert_array_equal(a, expected)


def test_longitudinal_coupling_entry(table1, table1_scales):
    a = build_longitudinal_matrix(table1, table1_scales, 1.0, 0.0).entries
    assert a[0, 1] == pytest.approx(1j * 400e6 / 2500, rel=1e-15)
    assert a[0, 1] == pytest.approx(1.6e5j)


def test_transverse_matrix_at_zero_k(table1, table1_scales):
    s, w = table1_scales, 2e5
    a = build_transverse_matrix(table1, s, 0.0, w).entries
    expected = np.diag([-(w**2), -2 * w**2 + 2 * s.omega_s**2, -2 * w**2 + 2 * s.omega_r**2])
    np.testing.assert_array_equal(a, expected)


def test_transverse_rotation_coupling(table1, table1_scales):
    a = build_transverse_matrix(table1, table1_scales, 1.0, 0.0).entries
    assert a[0, 2] == pytest.approx(-1j * 2 * table1.mu_c / table1.rho, rel=1e-14)


@pytest.mark.parametrize(
    "builder,omega_name",
    [(build_longitudinal_matrix, "omega_s"), (build_transverse_matrix, "omega_r"), (build_transverse_matrix, "omega_s")],
)
def test_diagonal_roots_at_zero_k(table1, table1_scales, builder, omega_name):
    a = builder(table1, table1_scales, 0.0, getattr(table1_scales, omega_name))
    scale = sum(abs(t) for t in leibniz_terms(builder(table1, table1_scales, 0.0, 0.0).entries))
    assert abs(a.det()) <= 1e-10 * scale


def pde_matrices(p, s, k, w):
    """Matrices rebuilt from the plane-wave PDEs with u = U exp(i(kX - wt)).

    Time derivatives give -w^2, d/dX gives ik and d2/dX2 gives -k^2; every
    term is moved to the left-hand side.
    """
    ik, mk2, mw2 = 1j * k, -(k**2), -(w**2)
    cm2 = s.c_m**2
    bulk = 3 * p.lambda_e + 2 * p.mu_e
    lon = np.array(
        [
            [mw2 - s.c_p**2 * mk2, 2 * p.mu_e / p.rho * ik, bulk / p.rho * ik],
            [-(4 / 3) * p.mu_e / p.eta * ik, mw2 - cm2 / 3 * mk2 + s.omega_s**2, (2 / 3) * cm2 * mk2],
            [-bulk / (3 * p.eta) * ik, cm2 / 3 * mk2, mw2 - (2 / 3) * cm2 * mk2 + s.omega_p**2],
        ]
    )
    wr2 = s.omega_r**2
    tra = 2 * np.array(
        [
            [(mw2 - s.c_s**2 * mk2) / 2, p.mu_e / p.rho * ik, -p.eta / p.rho * wr2 * ik / 2],
            [-p.mu_e / p.eta * ik, mw2 - cm2 / 2 * mk2 + s.omega_s**2, -cm2 / 2 * mk2],
            [wr2 / 2 * ik, -cm2 / 2 * mk2, mw2 - cm2 / 2 * mk2 + wr2],
        ]
    )
    return lon, tra


@pytest.mark.parametrize("k,w", [(0.0, 1e5), (1.0, 0.0), (537.0, 2.1e5), (1e4, 3e6)])
def test_matrices_agree_with_pde_derivation(table1, table1_scales, k, w):
    lon, tra = pde_matrices(table1, table1_scales, k, w)
    np.testing.assert_allclose(build_longitudinal_matrix(table1, table1_scales, k, w).entries, lon, rtol=1e-14)
    np.testing.assert_allclose(build_transverse_matrix(table1, table1_scales, k, w).entries, tra, rtol=1e-14)


def test_transverse_polarizations_share_one_matrix(table1, table1_scales):
    a = build_matrix(WaveFamily.TRANSVERSE, table1, table1_scales, 321.0, 1.5e5)
    b = build_transverse_matrix(table1, table1_scales, 321.0, 1.5e5)
    assert a.entries.tobytes() == b.entries.tobytes()
    with pytest.raises(ValueError):
        build_matrix(WaveFamily.UNCOUPLED, table1, table1_scales, 1.0, 1.0)


def test_determinant_is_real(rng):
    for _ in range(200):
        p = random_definite_params(rng)
        s = characteristic_scales(p)
        k = rng.uniform(0, 1e4)
        w = rng.uniform(0, 3 * max(s.omega_p, s.c_p * k))
        for builder in (build_longitudinal_matrix, build_transverse_matrix):
            a = builder(p, s, k, w).entries
            terms = leibniz_terms(a)
            magnitude = sum(abs(t) for t in terms)
            assert abs(sum(terms).imag) <= 1e-10 * magnitude
            assert abs(np.linalg.det(a).imag) <= 1e-10 * magnitude


# -- cubic reduction -------------------------------------------------------


@pytest.mark.parametrize("family", COUPLED)
def test_cubic_coefficients_match_interpolated_determinant(rng, family):
    for _ in range(100):
        p = random_definite_params(rng)
        s = characteristic_scales(p)
        k = float(rng.choice([0.0, rng.uniform(0, 10), rng.uniform(0, 1e4)]))
        ref = max(s.omega_p, s.omega_s, s.omega_r, s.c_p * k, s.c_s * k, s.c_m * k) ** 2
        nodes = ref * np.array([0.0, 0.7, 1.9, 3.1])
        values = np.array([det_real(family, p, s, k, math.sqrt(x)) for x in nodes])
        fitted = np.linalg.solve(np.vander(nodes, 4), values)
        coeffs = determinant_coefficients(family, p, k)
        # compare each monomial's contribution at the reference scale
        powers = ref ** np.arange(3, -1, -1)
        magnitude = np.abs(coeffs * powers).sum()
        np.testing.assert_allclose(fitted * powers, coeffs * powers, rtol=0, atol=1e-9 * magnitude)


@pytest.mark.parametrize("family", COUPLED)
def test_cubic_coefficients_vectorize(table1, family):
    k = np.array([0.0, 10.0, 1e4])
    batch = determinant_coefficients(family, table1, k)
    assert batch.shape == (3, 4)
    for i, kv in enumerate(k):
        np.testing.assert_array_equal(batch[i], determinant_coefficients(family, table1, kv))


def test_cubic_roots_known_polynomials():
    # (s - 1)(s - 2)(s - 3) scaled by -4
    coeffs = -4 * np.poly([1.0, 2.0, 3.0])
    np.testing.assert_allclose(_real_cubic_roots(coeffs)[0], [1, 2, 3], rtol=1e-14)
    # double root
    coeffs = -np.poly([0.0, 5e10, 5e10])
    np.testing.assert_allclose(_real_cubic_roots(coeffs)[0], [0, 5e10, 5e10], rtol=1e-14, atol=0)


def test_cubic_roots_reject_complex_pair():
    # s^3 + s = s (s^2 + 1)
    with pytest.raises(ComplexRootPair):
        _real_cubic_roots(np.array([1.0, 0.0, 1.0, 0.0]))


def test_cubic_roots_reject_negative():
    with pytest.raises(NegativeSquaredFrequency):
        _real_cubic_roots(np.poly([-1.0, 2.0, 3.0]))


def test_cubic_roots_clamp_rounding_noise():
    roots = _real_cubic_roots(np.poly([-1e-14, 2.0, 3.0]))[0]
    assert roots[0] == 0.0


# -- coupled roots ---------------------------------------------------------


def test_longitudinal_cutoffs(table1, table1_scales):
    s = table1_scales
    got = coupled_omegas(WaveFamily.LONGITUDINAL, table1, s, 0.0)
    np.testing.assert_allclose(got, [0.0, s.omega_s, s.omega_p], rtol=1e-14, atol=0)


@pytest.mark.parametrize("factor", [0.5, 1.0, 2.0, 3.0])
def test_transverse_cutoffs(factor):
    p = table1_parameters(factor * 150e6)
    s = characteristic_scales(p)
    got = coupled_omegas(WaveFamily.TRANSVERSE, p, s, 0.0)
    expected = [0.0, min(s.omega_s, s.omega_r), max(s.omega_s, s.omega_r)]
    np.testing.assert_allclose(got, expected, rtol=1e-14, atol=0)


def test_longitudinal_roots_match_bisection_at_k_500(table1, table1_scales):
    got = coupled_omegas(WaveFamily.LONGITUDINAL, table1, table1_scales, 500.0)
    ref = bisection_roots(WaveFamily.LONGITUDINAL, table1, table1_scales, 500.0)
    assert ref.size == 3
    np.testing.assert_allclose(got, ref, rtol=1e-6)


@pytest.mark.parametrize("family", COUPLED)
def test_roots_match_hermitian_pencil(rng, family):
    for _ in range(100):
        p = random_definite_params(rng)
        s = characteristic_scales(p)
        k = rng.uniform(0, 1e4)
        got = coupled_omegas(family, p, s, k)
        ref = pencil_omegas(family, p, s, k)
        np.testing.assert_allclose(got, ref, rtol=1e-8)


@pytest.mark.parametrize("family", COUPLED)
def test_roots_annihilate_determinant(rng, family):
    for _ in range(50):
        p = random_definite_params(rng)
        s = characteristic_scales(p)
        k = rng.uniform(0, 1e4)
        for w in coupled_omegas(family, p, s, k):
            a = build_matrix(family, p, s, k, w).entries
            magnitude = sum(abs(t) for t in leibniz_terms(a))
            assert abs(np.linalg.det(a)) <= 1e-8 * magnitude


def test_coupled_omegas_argument_checks(table1, table1_scales):
    with pytest.raises(ValueError):
        coupled_omegas(WaveFamily.UNCOUPLED, table1, table1_scales, 1.0)
    with pytest.raises(ValueError):
        coupled_omegas(WaveFamily.LONGITUDINAL, table1, table1_scales, -1.0)


def test_indefinite_parameters_surface_as_numerical_failure():
    p = table1_parameters().as_dict()
    p["mu_h"] = -50e6
    p["lambda_h"] = 20e6
    from micromorphic_bandgap.material import MaterialParameters

    params = MaterialParameters(**p)
    with pytest.raises((ComplexRootPair, NegativeSquaredFrequency)):
        coupled_omegas(WaveFamily.LONGITUDINAL, params, characteristic_scales(table1_parameters()), 1.0)


# -- branches --------------------------------------------------------------


def test_default_grid(table1_scales):
    s = table1_scales
    grid = default_k_grid(s)
    assert grid.size == 1001 and grid[0] == 0.0
    assert grid[-1] == pytest.approx(10 * s.omega_p / s.c_m, rel=1e-15)
    assert default_k_max(s) == grid[-1]


def test_default_k_max_ignores_vanishing_velocity(table1_scales):
    s = CharacteristicScales(**{**table1_scales.as_dict(), "c_m": 0.0})
    assert default_k_max(s) == pytest.approx(10 * s.omega_p / s.c_s)


def test_sample_branches_cutoffs(table1, table1_scales):
    s = table1_scales
    branches = sample_branches(table1, s, default_k_grid(s))
    assert [b.label for b in branches] == [l for labels in FAMILY_LABELS.values() for l in labels]
    cutoffs = {b.label: b.cutoff for b in branches}
    expected = {
        "LA": 0.0,
        "LO1": s.omega_s,
        "LO2": s.omega_p,
        "TA": 0.0,
        "TO1": s.omega_s,
        "TO2": s.omega_r,
        "TRO": s.omega_r,
        "TSO": s.omega_s,
        "TCVO": s.omega_s,
    }
    for label, value in expected.items():
        assert cutoffs[label] == pytest.approx(value, rel=1e-14, abs=0)
    assert sum(b.multiplicity for b in branches) == 12


def test_branch_asymptotes(table1, table1_scales):
    s = table1_scales
    branches = {b.label: b for b in sample_branches(table1, s, default_k_grid(s))}
    la, ta = branches["LA"], branches["TA"]
    assert la.omega[-1] == pytest.approx(s.omega_l, rel=0.02)
    assert ta.omega[-1] == pytest.approx(s.omega_t, rel=0.02)
    assert detect_asymptote(la) == pytest.approx(1.7321e5, rel=1e-4)
    assert detect_asymptote(ta) == pytest.approx(1.0e5, rel=1e-4)
    assert la.asymptote == detect_asymptote(la)
    for label in ("LO1", "LO2", "TO1", "TO2", "TRO", "TSO", "TCVO"):
        assert branches[label].asymptote is None
    assert detect_asymptote(branches["TSO"]) is None


def test_asymptote_needs_samples():
    b = DispersionBranch(BranchLabel.LA, np.linspace(0, 1, 15), np.linspace(0, 1, 15))
    with pytest.raises(InsufficientSamples):
        detect_asymptote(b)


def test_asymptote_of_constant_branch_is_its_value():
    b = DispersionBranch(BranchLabel.TSO, np.linspace(0, 10, 50), np.full(50, 7.0))
    assert detect_asymptote(b) == pytest.approx(7.0, rel=1e-14)


def test_asymptote_extrapolates_inverse_square_approach():
    k = np.linspace(0, 1e4, 1001)
    omega = np.sqrt(4.0e10 * k**2 / (k**2 + 1e5))
    b = DispersionBranch(BranchLabel.LA, k, omega)
    assert omega[-1] < 2e5 * (1 - 4e-4)
    assert detect_asymptote(b) == pytest.approx(2e5, rel=1e-7)


def test_branches_are_monotone(table1, table1_scales):
    for b in sample_branches(table1, table1_scales, default_k_grid(table1_scales)):
        assert monotonicity_violations(b) == []


def test_monotonicity_violations_reported(caplog):
    b = DispersionBranch(BranchLabel.LA, np.arange(4.0), np.array([0.0, 2.0, 1.0, 3.0]))
    assert monotonicity_violations(b) == [(2.0, -1.0)]


def test_branch_invariants():
    with pytest.raises(ValueError):
        DispersionBranch(BranchLabel.LA, np.array([0.0, 1.0, 1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        DispersionBranch(BranchLabel.LA, np.array([0.0, 1.0]), np.array([0.0, -1.0]))
    b = DispersionBranch(BranchLabel.LA, [0.0, 1.0], [0.0, 2.0])
    assert b.points[1].k == 1.0 and b.points[1].omega == 2.0
    assert b.cutoff == b.points[0].omega


@pytest.mark.parametrize("bad", [[1.0, 2.0], [0.0, 2.0, 1.0], []])
def test_sample_branches_validates_grid(table1, table1_scales, bad):
    with pytest.raises(ValueError):
        sample_branches(table1, table1_scales, bad)


def test_concurrent_sampling_is_identical(table1, table1_scales):
    grid = default_k_grid(table1_scales)
    serial = sample_branches(table1, table1_scales, grid)
    with ThreadPoolExecutor(max_workers=4) as pool:
        parallel = sample_branches(table1, table1_scales, grid, executor=pool, chunks=7)
    for a, b in zip(serial, parallel):
        assert a.label == b.label
        assert a.omega.tobytes() == b.omega.tobytes()
        assert a.asymptote == b.asymptote


def test_monotonicity_warning_is_logged(table1, table1_scales, caplog, monkeypatch):
    import micromorphic_bandgap.dispersion as dispersion

    monkeypatch.setattr(dispersion, "monotonicity_violations", lambda b: [(1.0, -2.0)])
    with caplog.at_level(logging.WARNING, logger="micromorphic_bandgap.dispersion"):
        sample_branches(table1, table1_scales, [0.0, 1.0, 2.0])
    assert "decreases" in caplog.text
