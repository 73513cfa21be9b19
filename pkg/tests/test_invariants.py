import math

import numpy as np
import pytest

from transgauss.catalogue import make_scenario
from transgauss.errors import (
    InconclusiveDegreeError,
    ParameterError,
    RetryWithDifferentValueError,
)
from transgauss.invariants import (
    _round_degree,
    default_t_samples,
    degree,
    degree_by_preimage,
    gauss_jacobian_error,
    gauss_map,
    integrate_mu,
    mu_by_expansion,
    mu_by_fit,
    perturbed_gauss,
    pointwise_mu0,
    sphere_volume,
    v_independence_check,
    verify_main_theorem,
)
from transgauss.surfaces import field_data

from test_surfaces import SCENARIO_NAMES, random_u

TWO_PI_SQ = 2.0 * math.pi**2


def test_sphere_volume_closed_forms():
    assert abs(sphere_volume(2) - 2.0 * math.pi) < 1e-14
    assert abs(sphere_volume(3) - 4.0 * math.pi) < 1e-14
    assert abs(sphere_volume(4) - TWO_PI_SQ) < 1e-14


# ---------------------------------------------------------------------------
# Gauss map


def test_round_sphere_gauss_map_is_identity():
    sc = make_scenario("s3_round")
    rng = np.random.default_rng(3)
    for _ in range(4):
        u = random_u(sc.surface, rng)
        assert np.max(np.abs(gauss_map(sc.surface, u) - sc.surface.f(u))) < 1e-12


def test_flat_torus_gauss_map_is_constant():
    sc = make_scenario("flat_t3")
    rng = np.random.default_rng(4)
    for _ in range(4):
        u = random_u(sc.surface, rng)
        assert np.max(np.abs(gauss_map(sc.surface, u) - np.array([0, 0, 0, 1.0]))) < 1e-12


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_gauss_map_lands_on_unit_sphere(name):
    sc = make_scenario(name)
    rng = np.random.default_rng(6)
    for _ in range(4):
        u = random_u(sc.surface, rng)
        assert abs(np.linalg.norm(gauss_map(sc.surface, u)) - 1.0) < 1e-10


def test_perturbed_gauss_radius_and_guard():
    sc = make_scenario("clifford_t3_berger_1.3_1.0_0.7")
    vf = sc.field("twist1")
    rng = np.random.default_rng(8)
    for t in (0.1, 0.5, 2.0):
        u = random_u(sc.surface, rng)
        y = perturbed_gauss(sc.surface, vf, t, u)
        assert abs(np.linalg.norm(y) - math.sqrt(1.0 + t * t)) < 1e-9
    with pytest.raises(ParameterError):
        perturbed_gauss(sc.surface, vf, 0.0, np.zeros(3))
    with pytest.raises(ParameterError):
        perturbed_gauss(sc.surface, vf, -0.3, np.zeros(3))


def test_flat_perturbed_gauss_value():
    sc = make_scenario("flat_t3")
    y = perturbed_gauss(sc.surface, sc.field("coord3"), 1.0, np.array([0.3, 0.6, 0.2]))
    assert np.max(np.abs(y - np.array([0.0, 0.0, 1.0, 1.0]))) < 1e-12


# ---------------------------------------------------------------------------
# coefficient extractors


def test_round_sphere_mu_values():
    sc = make_scenario("s3_round")
    vf = sc.field("hopf")
    rng = np.random.default_rng(12)
    for _ in range(4):
        u = random_u(sc.surface, rng)
        data = field_data(sc.surface, u, vf)
        mu = mu_by_expansion(data).values
        assert np.max(np.abs(mu - np.array([1.0, 0.0, 1.0]))) < 1e-8


def test_flat_torus_mu_identically_zero():
    sc = make_scenario("flat_t3")
    vf = sc.field("coord3")
    rng = np.random.default_rng(14)
    for _ in range(4):
        u = random_u(sc.surface, rng)
        mu = mu_by_expansion(field_data(sc.surface, u, vf)).values
        assert np.max(np.abs(mu)) == 0.0
        assert pointwise_mu0(sc.surface, u) == 0.0


@pytest.mark.parametrize("name", ["tube_s2_r0.3", "clifford_t3_berger_1.3_1.0_0.7",
                                  "tube_circle_r0.4", "hyperbolic_circle_tube_r0.5"])
def test_extractors_agree(name):
    sc = make_scenario(name)
    vf = sc.default_field
    rng = np.random.default_rng(16)
    for _ in range(5):
        u = random_u(sc.surface, rng)
        data = field_data(sc.surface, u, vf)
        by_exp = mu_by_expansion(data).values
        by_fit = mu_by_fit(sc.surface, vf, u, data=data).values
        assert np.max(np.abs(by_exp - by_fit)) < 1e-9


def test_fit_extractor_guards():
    sc = make_scenario("s3_round")
    vf = sc.field("hopf")
    u = np.array([0.9, 1.1, 0.7])
    with pytest.raises(ParameterError):
        mu_by_fit(sc.surface, vf, u, t_samples=[0.1, 0.2])
    with pytest.raises(ParameterError):
        mu_by_fit(sc.surface, vf, u, t_samples=[0.1, -0.2, 0.3])
    assert np.allclose(default_t_samples(3), [0.1, 0.2, 0.3])


# ---------------------------------------------------------------------------
# degree


def test_degree_round_sphere():
    est = degree(make_scenario("s3_round").surface, 12)
    assert est.rounded == 1
    assert est.residual < 1e-8


def test_degree_flat_torus():
    est = degree(make_scenario("flat_t3").surface, 8)
    assert est.rounded == 0
    assert est.residual == 0.0


def test_degree_tube():
    est = degree(make_scenario("tube_s2_r0.3").surface, 16)
    assert est.rounded == 2
    assert est.residual < 1e-2


def test_degree_orientation_flip():
    est = degree(make_scenario("s3_round", orientation=-1).surface, 12)
    assert est.rounded == -1


def test_round_degree_guards():
    assert _round_degree(1.0000001).rounded == 1
    assert _round_degree(-2.3e-12).rounded == 0
    est = _round_degree(0.4)
    assert (est.rounded, est.residual) == (0, 0.4)
    with pytest.raises(InconclusiveDegreeError):
        _round_degree(0.5)
    with pytest.raises(InconclusiveDegreeError):
        _round_degree(float("nan"))


def test_degree_by_preimage_counts():
    s3 = make_scenario("s3_round")
    y = np.array([0.3, -0.5, 0.8, 0.1])
    assert degree_by_preimage(s3.surface, y, 8) == 1

    tube = make_scenario("tube_s2_r0.3")
    assert degree_by_preimage(tube.surface, y, 12) == 2

    flat = make_scenario("flat_t3")
    assert degree_by_preimage(flat.surface, y, 8) == 0


def test_degree_by_preimage_rejects_critical_value():
    # the flat Gauss image is a single point; aiming at it hits only
    # critical preimages and must ask for a different value
    flat = make_scenario("flat_t3")
    with pytest.raises(RetryWithDifferentValueError):
        degree_by_preimage(flat.surface, np.array([0.0, 0.0, 0.0, 1.0]), 8)


# ---------------------------------------------------------------------------
# differential consistency and field independence


@pytest.mark.parametrize("name", ["s3_round", "clifford_t3_berger_1.3_1.0_0.7",
                                  "hyperbolic_circle_tube_r0.5"])
def test_gauss_jacobian_matches_operators(name):
    sc = make_scenario(name)
    rng = np.random.default_rng(18)
    for _ in range(3):
        u = random_u(sc.surface, rng)
        assert gauss_jacobian_error(sc.surface, u, vfield=sc.default_field) < 1e-6


def test_integrals_independent_of_field_choice():
    sc = make_scenario("s3_round")
    gap = v_independence_check(sc.surface, sc.field("hopf"), sc.field("hopf_rot"), 12)
    assert gap < 1e-8


# ---------------------------------------------------------------------------
# the verification report


def test_verify_report_round_sphere(cached_verify):
    report, _ = cached_verify("s3_round", "hopf", 12)
    assert report.degree.rounded == 1
    assert abs(report.integrals[0] - TWO_PI_SQ) < 1e-8 * TWO_PI_SQ
    assert abs(report.integrals[2] - TWO_PI_SQ) < 1e-8 * TWO_PI_SQ
    assert abs(report.integrals[1]) < 1e-10
    assert report.rhs[1] == 0.0
    assert max(report.residuals) < 1e-7
    assert report.extractor_discrepancy < 1e-9
    assert not report.sign_flip_suspected
    assert abs(report.volume - TWO_PI_SQ) < 1e-6
    d = report.to_dict()
    for key in ("scenario", "ambient", "v_name", "resolution", "degree",
                "integrals", "rhs", "residuals", "extractor_discrepancy",
                "orientation", "volume", "sphere_volume", "sign_flip_suspected"):
        assert key in d
    assert d["degree"]["rounded"] == 1


def test_verify_flags_suspected_sign_flip():
    sc = make_scenario("s3_round", orientation=-1)
    report = verify_main_theorem(
        sc.surface, sc.field("hopf"), 8, scenario="s3_round", expected_degree=1
    )
    assert report.degree.rounded == -1
    assert report.sign_flip_suspected


def test_verify_requires_zero_euler_characteristic():
    sc = make_scenario("flat_t3")
    sc.surface.euler_char = 2
    try:
        with pytest.raises(ParameterError):
            verify_main_theorem(sc.surface, sc.field("coord3"), 8)
    finally:
        sc.surface.euler_char = 0


def test_integrate_mu_needs_enough_samples():
    sc = make_scenario("flat_t3")
    with pytest.raises(ParameterError):
        integrate_mu(sc.surface, sc.field("coord3"), 8, t_samples=[0.1], with_fit=True)
