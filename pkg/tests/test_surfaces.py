import math

import numpy as np
import pytest

from transgauss.ambients import make_ambient
from transgauss.errors import ConfigError, ImmersionError, ParameterError
from transgauss.surfaces import (
    CircleFactor,
    ImmersedHypersurface,
    ProductDomain,
    SphereFactor,
    _grid_iter,
    adapted_basis,
    field_data,
    integrate,
    invariant_shape_operator,
    quadrature_nodes,
    shape_operator,
    tangent_frame,
    unit_normal,
)
from transgauss.catalogue import make_scenario

TWO_PI = 2.0 * math.pi


def random_u(surface, rng, polar_margin=0.3):
    """Random domain point, keeping polar angles away from the poles."""
    coords = []
    for fac in surface.domain.factors:
        if isinstance(fac, CircleFactor):
            coords.append(rng.uniform(0.0, fac.period))
        else:
            for _ in range(fac.sphere_dim - 1):
                coords.append(rng.uniform(polar_margin, math.pi - polar_margin))
            coords.append(rng.uniform(0.0, TWO_PI))
    return np.array(coords)


# ---------------------------------------------------------------------------
# quadrature domains


def test_circle_factor_rule():
    fac = CircleFactor(period=3.0)
    ((nodes, weights),) = fac.coordinate_rules(10)
    assert len(nodes) == 10
    assert nodes[0] == 0.0
    assert np.all(nodes < 3.0)
    assert abs(weights.sum() - 3.0) < 1e-14


def test_sphere_factor_rules():
    fac = SphereFactor(2)
    rules = fac.coordinate_rules(12)
    assert len(rules) == 2
    polar, azimuth = rules
    assert np.all(polar[0] > 0.0) and np.all(polar[0] < math.pi)
    assert abs(azimuth[1].sum() - TWO_PI) < 1e-14
    # polar rule integrates sin to its exact value 2
    assert abs(np.sin(polar[0]) @ polar[1] - 2.0) < 1e-12
    with pytest.raises(ParameterError):
        SphereFactor(0)


def test_resolution_broadcast_and_validation():
    dom = ProductDomain(SphereFactor(2), CircleFactor())
    assert dom.normalized_resolution(12) == [12, 12]
    assert dom.normalized_resolution([8, 16]) == [8, 16]
    with pytest.raises(ConfigError):
        dom.normalized_resolution(4)
    with pytest.raises(ConfigError):
        dom.normalized_resolution([12, 12, 12])
    with pytest.raises(ParameterError):
        ProductDomain()


def test_grid_iter_is_c_order():
    rules = [(np.array([0.0, 1.0]), np.array([0.5, 0.5])),
             (np.array([10.0, 20.0, 30.0]), np.array([1.0, 1.0, 1.0]))]
    pts = [tuple(c) for c, _ in _grid_iter(rules)]
    assert len(pts) == 6
    # last coordinate varies fastest
    assert pts[0] == (0.0, 10.0)
    assert pts[1] == (0.0, 20.0)
    assert pts[3] == (1.0, 10.0)
    weights = [w for _, w in _grid_iter(rules)]
    assert abs(sum(weights) - 1.0 * 3) < 1e-15


# ---------------------------------------------------------------------------
# volumes against closed forms


def test_round_three_sphere_volume():
    sc = make_scenario("s3_round")
    vol = integrate(sc.surface, lambda u: 1.0, 12)
    assert abs(vol - 2.0 * math.pi**2) < 1e-8 * vol


def test_flat_torus_volume_is_one():
    sc = make_scenario("flat_t3")
    vol = integrate(sc.surface, lambda u: 1.0, 8)
    assert abs(vol - 1.0) < 1e-12


def test_tube_volume_closed_form():
    r = 0.3
    sc = make_scenario(f"tube_s2_r{r}")
    vol = integrate(sc.surface, lambda u: 1.0, 16)
    expected = 8.0 * math.pi**2 * r * (1.0 + 0.5 * r * r)
    assert abs(vol - expected) < 1e-8 * expected


# ---------------------------------------------------------------------------
# frames and normals

SCENARIO_NAMES = [
    "s3_round",
    "tube_s2_r0.3",
    "flat_t3",
    "clifford_t3_berger",
    "clifford_t3_berger_1.3_1.0_0.7",
    "tube_circle_r0.4",
    "hyperbolic_circle_tube_r0.5",
]


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_unit_normal_is_unit_and_orthogonal(name):
    sc = make_scenario(name)
    surf = sc.surface
    rng = np.random.default_rng(11)
    for _ in range(5):
        u = random_u(surf, rng)
        p = surf.f(u)
        g = surf.ambient.metric_at(p)
        rows = tangent_frame(surf, u)
        eta = unit_normal(surf, u, rows=rows)
        assert abs(eta @ g @ eta - 1.0) < 1e-10
        assert np.max(np.abs(rows @ g @ eta)) < 1e-8


def test_generic_normal_matches_hint_path():
    sc = make_scenario("tube_s2_r0.3")
    hinted = sc.surface
    generic = ImmersedHypersurface(
        "tube_nohint",
        hinted.ambient,
        hinted.domain,
        hinted.chart_map,
        euler_char=hinted.euler_char,
        chart_frame=hinted.chart_frame,
        normal_hint=None,
    )
    rng = np.random.default_rng(2)
    for _ in range(6):
        u = random_u(hinted, rng)
        assert np.max(np.abs(unit_normal(hinted, u) - unit_normal(generic, u))) < 1e-9


def test_orientation_flips_normal():
    plus = make_scenario("s3_round", orientation=1).surface
    minus = make_scenario("s3_round", orientation=-1).surface
    u = np.array([0.9, 1.1, 0.7])
    assert np.max(np.abs(unit_normal(plus, u) + unit_normal(minus, u))) < 1e-12


def test_immersion_guard():
    amb = make_ambient("euclidean", dim=4)
    dom = ProductDomain(CircleFactor(), CircleFactor(), CircleFactor())
    collapsed = ImmersedHypersurface(
        "collapsed", amb, dom,
        lambda u: np.array([math.cos(u[0]), math.sin(u[0]), 0.0, 0.0]),
    )
    with pytest.raises(ImmersionError):
        tangent_frame(collapsed, np.array([0.3, 0.4, 0.5]))


def test_domain_dimension_guard():
    amb = make_ambient("euclidean", dim=4)
    with pytest.raises(Exception):
        ImmersedHypersurface(
            "wrong", amb, ProductDomain(CircleFactor()), lambda u: np.zeros(4)
        )


# ---------------------------------------------------------------------------
# adapted bases and operator matrices


@pytest.mark.parametrize("name", ["s3_round", "tube_s2_r0.3", "clifford_t3_berger_1.3_1.0_0.7"])
def test_adapted_basis_orthonormal_field_last(name):
    sc = make_scenario(name)
    surf = sc.surface
    vf = sc.default_field
    rng = np.random.default_rng(5)
    for _ in range(4):
        u = random_u(surf, rng)
        p = surf.f(u)
        g = surf.ambient.metric_at(p)
        basis = adapted_basis(surf, u, vf)
        vecs = basis.vectors
        gram = vecs @ g @ vecs.T
        assert np.max(np.abs(gram - np.eye(surf.mdim))) < 1e-9
        # last vector is the normalized field value
        raw = np.asarray(vf.rule(surf, u), dtype=float)
        nraw = math.sqrt(float(raw @ g @ raw))
        assert np.max(np.abs(vecs[-1] - raw / nraw)) < 1e-9
        # parameter-frame coefficients reproduce the chart vectors
        rows = tangent_frame(surf, u)
        assert np.max(np.abs(basis.coeffs @ rows - vecs)) < 1e-9
        assert np.linalg.det(basis.coeffs) * surf.orientation > 0


@pytest.mark.parametrize("name", ["s3_round", "tube_s2_r0.3"])
def test_shape_operator_symmetric(name):
    sc = make_scenario(name)
    surf = sc.surface
    vf = sc.default_field
    rng = np.random.default_rng(9)
    for _ in range(3):
        u = random_u(surf, rng)
        h = shape_operator(surf, u, vfield=vf)
        assert np.max(np.abs(h - h.T)) < 1e-7


def test_round_sphere_curvature_matrix():
    # the unit round hypersphere has shape operator +/- identity
    sc = make_scenario("s3_round")
    h = shape_operator(sc.surface, np.array([1.0, 0.8, 0.6]), vfield=sc.field("hopf"))
    assert np.max(np.abs(h @ h - np.eye(3))) < 1e-6
    assert np.max(np.abs(h - h[0, 0] * np.eye(3))) < 1e-6


@pytest.mark.parametrize("name", ["s3_round", "tube_s2_r0.3", "flat_t3", "tube_circle_r0.4"])
def test_translation_invariant_operator_vanishes_in_flat_ambients(name):
    # translating the normal around a euclidean or torus ambient keeps it
    # constant, so the comparison operator must vanish identically
    sc = make_scenario(name)
    surf = sc.surface
    vf = sc.default_field
    rng = np.random.default_rng(13)
    for _ in range(3):
        u = random_u(surf, rng)
        alpha = invariant_shape_operator(surf, u, vfield=vf)
        assert np.max(np.abs(alpha)) == 0.0


def test_clifford_invariant_operator_nonzero():
    sc = make_scenario("clifford_t3_berger_1.3_1.0_0.7")
    alpha = invariant_shape_operator(
        sc.surface, np.array([0.7, 1.9, 0.4]), vfield=sc.field("circle")
    )
    assert np.max(np.abs(alpha)) > 1e-3


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_field_data_consistency(name):
    sc = make_scenario(name)
    surf = sc.surface
    vf = sc.default_field
    rng = np.random.default_rng(21)
    u = random_u(surf, rng)
    data = field_data(surf, u, vf)
    m = surf.mdim
    assert data.h.shape == (m, m)
    assert data.alpha.shape == (m, m)
    assert data.a.shape == (m - 1, m - 1)
    assert data.v_rows.shape == (m - 1, m)
    assert data.vol_element > 0.0
    assert np.max(np.abs(data.h - data.h.T)) < 1e-6
    # stacked rows match the pieces they are built from
    assert np.array_equal(data.h_plus_alpha, data.h + data.alpha)
    assert np.array_equal(data.v_rows[:, : m - 1], data.a - data.a_tilde)


def test_quadrature_nodes_match_domain():
    sc = make_scenario("tube_s2_r0.3")
    rules = quadrature_nodes(sc.surface, [8, 16])
    assert len(rules) == 3  # two sphere angles + one circle
    assert len(rules[0][0]) == 8
    assert len(rules[2][0]) == 16
