"""Built-in scenario catalogue.

Six families of closed 3-dimensional hypersurfaces in 4-dimensional
ambients, each with named unit tangent fields and calibrated pass/fail
thresholds. Chart azimuths are oriented so that the conventional normal
(the one making (frame, normal) positively oriented) is the outward one
where "outward" means anything; every scenario has Euler characteristic 0.

THRESHOLDS is the single source of truth for what counts as a pass, used
by both the command-line front end and the acceptance tests.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .ambients import make_ambient
from .errors import ConfigError
from .kernel import DEFAULT_DIFF
from .surfaces import (
    CircleFactor,
    ImmersedHypersurface,
    ProductDomain,
    SphereFactor,
    UnitTangentField,
)

__all__ = [
    "Scenario",
    "make_scenario",
    "family_of",
    "catalogue_rows",
    "THRESHOLDS",
    "FAMILIES",
]

SQ2 = math.sqrt(0.5)


@dataclass
class Scenario:
    name: str
    family: str
    surface: ImmersedHypersurface
    v_fields: dict
    default_resolution: int
    expected_degree: int | None
    leaf_fields: set
    oracle_value: np.ndarray | None = dataclass_field(default=None, repr=False)

    def field(self, name: str) -> UnitTangentField:
        f = self.v_fields.get(name)
        if f is None:
            known = ",".join(sorted(self.v_fields))
            raise ConfigError(f"scenario {self.name} has no field {name!r} (known: {known})")
        return f

    @property
    def default_field(self) -> UnitTangentField:
        return next(iter(self.v_fields.values()))


def _twist_fields(maker, ks=(1, 2)):
    return {f"twist{k}": UnitTangentField(f"twist{k}", maker(k)) for k in ks}


# -- round S^3 ---------------------------------------------------------------


def _s3_chart(u):
    p1, p2, th = u
    s1, s2 = math.sin(p1), math.sin(p2)
    c1, c2 = math.cos(p1), math.cos(p2)
    # azimuth runs clockwise so (frame, outward normal) is positively oriented
    return np.array([c1, s1 * c2, s1 * s2 * math.cos(th), -s1 * s2 * math.sin(th)])


def _s3_frame(u):
    p1, p2, th = u
    s1, s2 = math.sin(p1), math.sin(p2)
    c1, c2 = math.cos(p1), math.cos(p2)
    ct, st = math.cos(th), math.sin(th)
    return np.array(
        [
            [-s1, c1 * c2, c1 * s2 * ct, -c1 * s2 * st],
            [0.0, -s1 * s2, s1 * c2 * ct, -s1 * c2 * st],
            [0.0, 0.0, -s1 * s2 * st, -s1 * s2 * ct],
        ]
    )


def _hopf(surface, u):
    p = surface.f(u)
    return np.array([-p[1], p[0], -p[3], p[2]])


def _hopf_rot(surface, u):
    p = surface.f(u)
    return np.array([-p[2], p[3], p[0], -p[1]])


def _make_s3(name, orientation, diff):
    ambient = make_ambient("euclidean", dim=4)
    surface = ImmersedHypersurface(
        name,
        ambient,
        ProductDomain(SphereFactor(3)),
        _s3_chart,
        euler_char=0,
        chart_frame=_s3_frame,
        normal_hint=lambda u: _s3_chart(u),
        orientation=orientation,
        diff=diff,
    )
    fields = {
        "hopf": UnitTangentField("hopf", _hopf),
        "hopf_rot": UnitTangentField("hopf_rot", _hopf_rot),
    }
    return Scenario(
        name=name,
        family="s3_round",
        surface=surface,
        v_fields=fields,
        default_resolution=32,
        expected_degree=1,
        leaf_fields=set(),
        oracle_value=np.array([0.0, 0.0, 0.0, 1.0]),
    )


# -- tube around S^2 in R^4 --------------------------------------------------


def _tube_s2_x(p, s):
    sp, cp = math.sin(p), math.cos(p)
    return np.array([sp * math.cos(s), -sp * math.sin(s), cp])


def _make_tube_s2(name, radius, orientation, diff):
    r = float(radius)
    if not 0.0 < r < 1.0:
        raise ConfigError(f"tube radius must be in (0, 1), got {r}")
    ambient = make_ambient("euclidean", dim=4)

    def chart(u):
        p, s, th = u
        x = _tube_s2_x(p, s)
        c = 1.0 + r * math.cos(th)
        return np.array([c * x[0], c * x[1], c * x[2], r * math.sin(th)])

    def frame(u):
        p, s, th = u
        sp, cp = math.sin(p), math.cos(p)
        ss, cs = math.sin(s), math.cos(s)
        st, ct = math.sin(th), math.cos(th)
        c = 1.0 + r * ct
        x = np.array([sp * cs, -sp * ss, cp])
        xp = np.array([cp * cs, -cp * ss, -sp])
        xs = np.array([-sp * ss, -sp * cs, 0.0])
        return np.array(
            [
                [c * xp[0], c * xp[1], c * xp[2], 0.0],
                [c * xs[0], c * xs[1], c * xs[2], 0.0],
                [-r * st * x[0], -r * st * x[1], -r * st * x[2], r * ct],
            ]
        )

    def hint(u):
        p, s, th = u
        x = _tube_s2_x(p, s)
        ct, st = math.cos(th), math.sin(th)
        return np.array([ct * x[0], ct * x[1], ct * x[2], st])

    surface = ImmersedHypersurface(
        name,
        ambient,
        ProductDomain(SphereFactor(2), CircleFactor()),
        chart,
        euler_char=0,
        chart_frame=frame,
        normal_hint=hint,
        orientation=orientation,
        diff=diff,
    )

    def circle_rule(surface, u):
        return surface.frame_rows(u)[2]

    def twist_maker(k):
        a = np.array([1.0, 0.0, 0.0])
        b = np.array([0.0, 1.0, 0.0])

        def rule(surface, u, k=k):
            p, s, th = u
            x = _tube_s2_x(p, s)
            vv = math.cos(k * th) * a + math.sin(k * th) * b
            c = float(vv @ x)
            w = vv - c * x
            theta_dir = surface.frame_rows(u)[2] / r  # unit circle direction
            return c * theta_dir + np.array([w[0], w[1], w[2], 0.0])

        return rule

    fields = {"circle": UnitTangentField("circle", circle_rule)}
    fields.update(_twist_fields(twist_maker))
    return Scenario(
        name=name,
        family="tube_s2_r{r}",
        surface=surface,
        v_fields=fields,
        default_resolution=48,
        expected_degree=2,
        leaf_fields={"circle"},
        oracle_value=np.array([0.5, 0.1, 0.3, 0.6]) / np.linalg.norm([0.5, 0.1, 0.3, 0.6]),
    )


# -- flat T^3 in T^4 ---------------------------------------------------------


def _make_flat_t3(name, orientation, diff):
    ambient = make_ambient("flat_torus", dim=4)
    eye = np.eye(3, 4)

    surface = ImmersedHypersurface(
        name,
        ambient,
        ProductDomain(CircleFactor(1.0), CircleFactor(1.0), CircleFactor(1.0)),
        lambda u: np.array([u[0], u[1], u[2], 0.25]),
        euler_char=0,
        chart_frame=lambda u: eye,
        normal_hint=lambda u: np.array([0.0, 0.0, 0.0, 1.0]),
        orientation=orientation,
        diff=diff,
    )

    def twist_maker(k):
        def rule(surface, u, k=k):
            ang = 2.0 * math.pi * k * u[2]
            return np.array([math.cos(ang), math.sin(ang), 0.0, 0.0])

        return rule

    fields = {
        "coord3": UnitTangentField("coord3", lambda s, u: np.array([0.0, 0.0, 1.0, 0.0]))
    }
    fields.update(_twist_fields(twist_maker))
    return Scenario(
        name=name,
        family="flat_t3",
        surface=surface,
        v_fields=fields,
        default_resolution=8,
        expected_degree=0,
        leaf_fields={"coord3"},
        oracle_value=np.array([0.3, 0.2, 0.5, 0.78]) / np.linalg.norm([0.3, 0.2, 0.5, 0.78]),
    )


# -- Clifford-type T^3 in the group S^3 x S^1 --------------------------------


def _make_clifford(name, lambdas, orientation, diff):
    ambient = make_ambient("berger_group", lambdas=lambdas)

    def chart(u):
        s, t, w = u
        return np.array(
            [SQ2 * math.cos(s), SQ2 * math.sin(s), SQ2 * math.cos(t), SQ2 * math.sin(t), w]
        )

    def frame(u):
        s, t, w = u
        return np.array(
            [
                [-SQ2 * math.sin(s), SQ2 * math.cos(s), 0.0, 0.0, 0.0],
                [0.0, 0.0, -SQ2 * math.sin(t), SQ2 * math.cos(t), 0.0],
                [0.0, 0.0, 0.0, 0.0, 1.0],
            ]
        )

    surface = ImmersedHypersurface(
        name,
        ambient,
        ProductDomain(CircleFactor(), CircleFactor(), CircleFactor()),
        chart,
        euler_char=0,
        chart_frame=frame,
        normal_hint=None,  # metric-dependent normal: generic orthocomplement
        orientation=orientation,
        diff=diff,
    )

    def circle_rule(surface, u):
        return np.array([0.0, 0.0, 0.0, 0.0, 1.0])

    def twist_maker(k):
        def rule(surface, u, k=k):
            rows = surface.frame_rows(u)
            g = surface.ambient.metric_at(surface.f(u))
            tau = rows[1] / math.sqrt(float(rows[1] @ g @ rows[1]))
            circ = rows[2] - float(rows[2] @ g @ tau) * tau
            circ = circ / math.sqrt(float(circ @ g @ circ))
            ang = k * u[0]
            return math.cos(ang) * circ + math.sin(ang) * tau

        return rule

    fields = {"circle": UnitTangentField("circle", circle_rule)}
    fields.update(_twist_fields(twist_maker))
    # all three chart angles are plain periodic directions, so the trapezoid
    # rule is exact for these low-order trigonometric integrands well below
    # the minimum node count; 8 per factor is already converged
    return Scenario(
        name=name,
        family="clifford_t3_berger",
        surface=surface,
        v_fields=fields,
        default_resolution=8,
        expected_degree=0,
        leaf_fields={"circle"},
        oracle_value=np.array([0.3, 0.3, 0.3, 0.8]) / np.linalg.norm([0.3, 0.3, 0.3, 0.8]),
    )


# -- tube around a circle in R^4 ---------------------------------------------


def _tube_circle_y(p, s):
    sp, cp = math.sin(p), math.cos(p)
    return np.array([cp, sp * math.cos(s), -sp * math.sin(s)])


def _make_tube_circle(name, radius, orientation, diff):
    r = float(radius)
    if not 0.0 < r < 1.0:
        raise ConfigError(f"tube radius must be in (0, 1), got {r}")
    ambient = make_ambient("euclidean", dim=4)

    def chart(u):
        th, p, s = u
        y = _tube_circle_y(p, s)
        c = 1.0 + r * y[0]
        return np.array([c * math.cos(th), c * math.sin(th), r * y[1], r * y[2]])

    def frame(u):
        th, p, s = u
        y = _tube_circle_y(p, s)
        sp, cp = math.sin(p), math.cos(p)
        ss, cs = math.sin(s), math.cos(s)
        ct, st = math.cos(th), math.sin(th)
        c = 1.0 + r * y[0]
        yp = np.array([-sp, cp * cs, -cp * ss])
        ys = np.array([0.0, -sp * ss, -sp * cs])
        return np.array(
            [
                [-c * st, c * ct, 0.0, 0.0],
                [r * yp[0] * ct, r * yp[0] * st, r * yp[1], r * yp[2]],
                [r * ys[0] * ct, r * ys[0] * st, r * ys[1], r * ys[2]],
            ]
        )

    def hint(u):
        th, p, s = u
        y = _tube_circle_y(p, s)
        return np.array([y[0] * math.cos(th), y[0] * math.sin(th), y[1], y[2]])

    surface = ImmersedHypersurface(
        name,
        ambient,
        ProductDomain(CircleFactor(), SphereFactor(2)),
        chart,
        euler_char=0,
        chart_frame=frame,
        normal_hint=hint,
        orientation=orientation,
        diff=diff,
    )

    def circle_rule(surface, u):
        return surface.frame_rows(u)[0]

    def twist_maker(k):
        a = np.array([1.0, 0.0, 0.0])
        b = np.array([0.0, 1.0, 0.0])

        def rule(surface, u, k=k):
            th, p, s = u
            y = _tube_circle_y(p, s)
            vv = math.cos(k * th) * a + math.sin(k * th) * b
            c = float(vv @ y)
            w = vv - c * y
            cfac = 1.0 + r * y[0]
            theta_dir = surface.frame_rows(u)[0] / cfac
            wemb = np.array(
                [r * w[0] * math.cos(th), r * w[0] * math.sin(th), r * w[1], r * w[2]]
            )
            return c * theta_dir + wemb

        return rule

    fields = {"circle": UnitTangentField("circle", circle_rule)}
    fields.update(_twist_fields(twist_maker))
    return Scenario(
        name=name,
        family="tube_circle_r{r}",
        surface=surface,
        v_fields=fields,
        default_resolution=24,
        expected_degree=0,
        leaf_fields={"circle"},
        oracle_value=np.array([0.6, 0.2, 0.5, 0.45]) / np.linalg.norm([0.6, 0.2, 0.5, 0.45]),
    )


# -- tube around a circle in hyperbolic 4-space (stretch) --------------------


def _make_hyperbolic_tube(name, radius, orientation, diff):
    r = float(radius)
    a = 1.0  # intrinsic radius of the base circle
    if not 0.0 < r < a:
        raise ConfigError(f"hyperbolic tube radius must be in (0, {a}), got {r}")
    ambient = make_ambient("hyperbolic", dim=4)
    bvec = ambient.base_point
    spat = ambient.spatial_basis  # rows B_1..B_4
    cha, sha = math.cosh(a), math.sinh(a)
    chr_, shr = math.cosh(r), math.sinh(r)

    def mink_point(u):
        th, p, s = u
        y = _tube_circle_y(p, s)
        ct, st = math.cos(th), math.sin(th)
        ring = ct * spat[0] + st * spat[1]
        c = cha * bvec + sha * ring
        n1 = sha * bvec + cha * ring
        return chr_ * c + shr * (y[0] * n1 + y[1] * spat[2] + y[2] * spat[3])

    def chart(u):
        return ambient.chart_of(mink_point(u))

    def frame(u):
        th, p, s = u
        y = _tube_circle_y(p, s)
        sp, cp = math.sin(p), math.cos(p)
        ss, cs = math.sin(s), math.cos(s)
        ct, st = math.cos(th), math.sin(th)
        ring_d = -st * spat[0] + ct * spat[1]
        dth = (chr_ * sha + shr * y[0] * cha) * ring_d
        yp = np.array([-sp, cp * cs, -cp * ss])
        ys = np.array([0.0, -sp * ss, -sp * cs])
        ring = ct * spat[0] + st * spat[1]
        n1 = sha * bvec + cha * ring
        dp = shr * (yp[0] * n1 + yp[1] * spat[2] + yp[2] * spat[3])
        ds = shr * (ys[0] * n1 + ys[1] * spat[2] + ys[2] * spat[3])
        return np.array(
            [ambient.chart_of(dth), ambient.chart_of(dp), ambient.chart_of(ds)]
        )

    surface = ImmersedHypersurface(
        name,
        ambient,
        ProductDomain(CircleFactor(), SphereFactor(2)),
        chart,
        euler_char=0,
        chart_frame=frame,
        normal_hint=None,
        orientation=orientation,
        diff=diff,
    )
    fields = {
        "circle": UnitTangentField("circle", lambda s, u: s.frame_rows(u)[0]),
    }
    # degree 0: preimages of a regular value come in reflection pairs of
    # opposite sign, exactly as for the flat tube around a circle
    return Scenario(
        name=name,
        family="hyperbolic_circle_tube_r{r}",
        surface=surface,
        v_fields=fields,
        default_resolution=16,
        expected_degree=0,
        leaf_fields={"circle"},
        oracle_value=None,
    )


# -- registry ----------------------------------------------------------------

FAMILIES = [
    "s3_round",
    "tube_s2_r{r}",
    "flat_t3",
    "clifford_t3_berger",
    "tube_circle_r{r}",
    "hyperbolic_circle_tube_r{r}",
]

_TUBE_S2 = re.compile(r"^tube_s2_r(\d+(?:\.\d+)?)$")
_TUBE_CIRCLE = re.compile(r"^tube_circle_r(\d+(?:\.\d+)?)$")
_HYP_TUBE = re.compile(r"^hyperbolic_circle_tube_r(\d+(?:\.\d+)?)$")
_CLIFFORD = re.compile(r"^clifford_t3_berger(?:_(\d+(?:\.\d+)?)_(\d+(?:\.\d+)?)_(\d+(?:\.\d+)?))?$")


def family_of(name: str) -> str:
    if name == "s3_round":
        return "s3_round"
    if name == "flat_t3":
        return "flat_t3"
    if _TUBE_S2.match(name):
        return "tube_s2_r{r}"
    if _TUBE_CIRCLE.match(name):
        return "tube_circle_r{r}"
    if _HYP_TUBE.match(name):
        return "hyperbolic_circle_tube_r{r}"
    if _CLIFFORD.match(name):
        return "clifford_t3_berger"
    raise ConfigError(f"unknown scenario {name!r} (families: {', '.join(FAMILIES)})")


def make_scenario(name: str, orientation: int = 1, diff=DEFAULT_DIFF) -> Scenario:
    """Resolve a concrete scenario name against the catalogue.

    Parametric families encode parameters in the name: tube_s2_r0.3,
    tube_circle_r0.25, hyperbolic_circle_tube_r0.4, and
    clifford_t3_berger_1.3_1.0_0.7 (bare clifford_t3_berger is the round
    group).
    """
    if name == "s3_round":
        return _make_s3(name, orientation, diff)
    if name == "flat_t3":
        return _make_flat_t3(name, orientation, diff)
    m = _TUBE_S2.match(name)
    if m:
        return _make_tube_s2(name, float(m.group(1)), orientation, diff)
    m = _TUBE_CIRCLE.match(name)
    if m:
        return _make_tube_circle(name, float(m.group(1)), orientation, diff)
    m = _HYP_TUBE.match(name)
    if m:
        return _make_hyperbolic_tube(name, float(m.group(1)), orientation, diff)
    m = _CLIFFORD.match(name)
    if m:
        if m.group(1) is None:
            lam = (1.0, 1.0, 1.0)
        else:
            lam = (float(m.group(1)), float(m.group(2)), float(m.group(3)))
        return _make_clifford(name, lam, orientation, diff)
    raise ConfigError(f"unknown scenario {name!r} (families: {', '.join(FAMILIES)})")


def catalogue_rows():
    """One line per family for the listing command."""
    return [
        "s3_round euclidean(4) dim=3 chi=0 v:{hopf,hopf_rot}",
        "tube_s2_r{r} euclidean(4) dim=3 chi=0 v:{circle,twist{k}}",
        "flat_t3 flat_torus(4) dim=3 chi=0 v:{coord3,twist{k}}",
        "clifford_t3_berger berger(λ) dim=3 chi=0 v:{circle,twist{k}}",
        "tube_circle_r{r} euclidean(4) dim=3 chi=0 v:{circle,twist{k}}",
        "hyperbolic_circle_tube_r{r} hyperbolic(4) dim=3 chi=0 v:{circle}",
    ]


# Pass/fail calibration per family: the one table shared by the CLI and the
# acceptance tests. even_rel scales the even-k quantization residual by
# |rhs_k| (falling back to the sphere volume when rhs = 0); odd_abs is an
# absolute ceiling for odd k; odd_vol scales by the surface volume instead;
# abs_all switches every comparison to a flat absolute tolerance.
THRESHOLDS = {
    "s3_round": {
        "resolution": 32,
        "expected_degree": 1,
        "degree_residual": 1e-6,
        "even_rel": 1e-6,
        "odd_abs": 1e-8,
        "extractor": 1e-8,
    },
    "tube_s2_r{r}": {
        "resolution": 48,
        "expected_degree": 2,
        "degree_residual": 1e-3,
        "even_rel": 1e-5,
        "odd_vol": 1e-6,
        "extractor": 1e-8,
    },
    "flat_t3": {
        "resolution": 8,
        "expected_degree": 0,
        "degree_residual": 1e-12,
        "abs_all": 1e-12,
        "extractor": 1e-12,
    },
    "clifford_t3_berger": {
        "resolution": 8,
        "expected_degree": 0,
        "degree_residual": 1e-3,
        "even_vol": 1e-6,
        "odd_vol": 1e-6,
        "even_pair_rel": 1e-6,
        "extractor": 1e-8,
    },
    "tube_circle_r{r}": {
        "resolution": 24,
        "expected_degree": 0,
        "degree_residual": 1e-3,
        "even_vol": 1e-6,
        "odd_vol": 1e-6,
        "extractor": 1e-8,
    },
    "hyperbolic_circle_tube_r{r}": {
        "resolution": 16,
        "expected_degree": 0,
        "degree_residual": 1e-6,
        "even_vol": 1e-8,
        "odd_vol": 1e-8,
        "extractor": 1e-9,
    },
}


def evaluate_report(report, thresholds=None):
    """Grade a verification report against its family thresholds.

    Returns (checks, all_passed) with checks a list of dicts
    {name, passed, value, threshold}.
    """
    thr = thresholds if thresholds is not None else THRESHOLDS[family_of(report.scenario)]
    checks = []

    def add(name, value, limit):
        checks.append(
            {"name": name, "passed": bool(value <= limit), "value": float(value), "threshold": float(limit)}
        )

    add("degree_integrality", report.degree.residual, thr["degree_residual"])
    expected = thr.get("expected_degree")
    if expected is not None:
        checks.append(
            {
                "name": "degree_expected",
                "passed": report.degree.rounded == expected,
                "value": float(report.degree.rounded),
                "threshold": float(expected),
            }
        )

    vol_scale = max(report.volume, 1.0)
    abs_all = thr.get("abs_all")
    for k, (integral, rhs) in enumerate(zip(report.integrals, report.rhs)):
        resid = abs(integral - rhs)
        if abs_all is not None:
            add(f"mu{k}_abs", resid, abs_all)
        elif k % 2 == 1:
            if "odd_abs" in thr:
                add(f"mu{k}_odd", resid, thr["odd_abs"])
            else:
                add(f"mu{k}_odd", resid, thr["odd_vol"] * vol_scale)
        elif rhs != 0.0:
            add(f"mu{k}_match", resid / abs(rhs), thr["even_rel"])
        else:
            add(f"mu{k}_zero", resid, thr.get("even_vol", thr.get("even_rel", 1e-6)) * vol_scale)

    if "even_pair_rel" in thr and len(report.integrals) >= 3:
        i0, i2 = report.integrals[0], report.integrals[2]
        scale = max(abs(i0), abs(i2), vol_scale)
        add("mu0_mu2_pair", abs(i0 - i2) / scale, thr["even_pair_rel"])

    add("extractor_agreement", report.extractor_discrepancy, thr.get("extractor", 1e-8))
    return checks, all(c["passed"] for c in checks)
