"""Gauss map, perturbed sphere maps, curvature coefficients, and degree.

The central objects are the coefficient functions mu_k defined by

    det(D phi_t) = sqrt(1+t^2) * sum_k mu_k t^k,

where phi_t(p) = Gamma_p(eta(p) + t v(p)) maps the hypersurface into the
sphere of radius sqrt(1+t^2). Two independent extractors are provided: a
closed-form minor expansion in the operator data, and a polynomial fit to
the determinant of the assembled t-dependent matrix. Their agreement is a
standing cross-check. Integrating mu_0 yields the (normalized) degree of
the Gauss map, which a preimage-counting oracle verifies independently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InconclusiveDegreeError,
    ParameterError,
    RetryWithDifferentValueError,
)
from .kernel import determinant, fit_polynomial, kahan_sum
from .surfaces import (
    AdaptedBasis,
    ImmersedHypersurface,
    OperatorData,
    UnitTangentField,
    _dirdiff_vec,
    _grid_iter,
    _operator_core,
    adapted_basis,
    field_data,
    quadrature_nodes,
    tangent_frame,
    unit_normal,
)

__all__ = [
    "sphere_volume",
    "gauss_map",
    "perturbed_gauss",
    "MuCoefficients",
    "mu_by_expansion",
    "mu_by_fit",
    "DegreeEstimate",
    "degree",
    "degree_by_preimage",
    "gauss_jacobian_error",
    "VerificationReport",
    "verify_main_theorem",
    "v_independence_check",
]

REGULAR_VALUE_DET_FLOOR = 1e-6


def sphere_volume(ambient_dim: int) -> float:
    """Volume of the unit sphere bounding the ball in ambient_dim space,
    from the closed Gamma-function formula (no quadrature involved)."""
    return 2.0 * math.pi ** (ambient_dim / 2.0) / math.gamma(ambient_dim / 2.0)


def gauss_map(surface: ImmersedHypersurface, u, rows=None) -> np.ndarray:
    """Unit normal pushed to the fixed target space by the point frame."""
    p = surface.f(u)
    eta = unit_normal(surface, u, rows=rows)
    return (surface.ambient.frame_at(p) @ eta)[: surface.ambient.dim]


def perturbed_gauss(surface, vfield: UnitTangentField, t: float, u) -> np.ndarray:
    """Gamma_p(eta + t * v-hat); lands on the sphere of radius sqrt(1+t^2)."""
    if t <= 0.0:
        raise ParameterError(f"perturbation parameter must be positive, got {t}")
    u = np.asarray(u, dtype=float)
    p = surface.f(u)
    g = surface.ambient.metric_at(p)
    eta = unit_normal(surface, u)
    w = np.asarray(vfield.rule(surface, u), dtype=float)
    w = w / math.sqrt(float(w @ g @ w))
    return (surface.ambient.frame_at(p) @ (eta + t * w))[: surface.ambient.dim]


@dataclass
class MuCoefficients:
    values: np.ndarray  # mu_0 .. mu_{m-1}, m = dim M
    point: np.ndarray


def mu_by_expansion(data: OperatorData) -> MuCoefficients:
    """Minor-expansion extractor.

    With rows H_A = (h + alpha)_A and V_i = (a - a_tilde | v - v_tilde),

        mu_k = (-1)^(m-k) * sum over k-subsets I of the first m-1 slots of
               det(rows: V_i for i in I, H_i otherwise, H_m last).
    """
    h_rows = data.h_plus_alpha
    v_rows = data.v_rows
    m = h_rows.shape[0]
    n = m - 1
    values = np.zeros(m)
    mat = np.empty((m, m))
    for k in range(m):
        sign = (-1.0) ** (m - k)
        acc = 0.0
        for subset in itertools.combinations(range(n), k):
            mat[:n] = h_rows[:n]
            for i in subset:
                mat[i] = v_rows[i]
            mat[n] = h_rows[n]
            acc += determinant(mat)
        values[k] = sign * acc
    return MuCoefficients(values=values, point=np.array(data.u))


def default_t_samples(m: int):
    return [0.1 * (i + 1) for i in range(m)]


def mu_by_fit(surface, vfield, u, t_samples=None, data: OperatorData = None) -> MuCoefficients:
    """Determinant-fit extractor.

    Assembles, for each t, the matrix of the perturbed map's differential in
    the adapted bases (rows i < n: -H_i + t V_i; last row scaled by the
    sphere radius), divides the determinant by sqrt(1+t^2), and fits the
    degree-(m-1) polynomial through the samples.
    """
    if data is None:
        data = field_data(surface, np.asarray(u, dtype=float), vfield)
    h_rows = data.h_plus_alpha
    v_rows = data.v_rows
    m = h_rows.shape[0]
    n = m - 1
    if t_samples is None:
        t_samples = default_t_samples(m)
    ts = [float(t) for t in t_samples]
    if len(ts) < m:
        raise ParameterError(f"need at least {m} t samples, got {len(ts)}")
    for t in ts:
        if t <= 0.0:
            raise ParameterError(f"t samples must be positive, got {t}")
    qs = np.array([_fit_sample(h_rows, v_rows, n, t) for t in ts])
    coeffs = fit_polynomial(np.array(ts), qs, degree=m - 1)
    return MuCoefficients(values=coeffs, point=np.array(data.u))


def _fit_sample(h_rows, v_rows, n, t):
    root = math.sqrt(1.0 + t * t)
    mat = np.empty((n + 1, n + 1))
    mat[:n] = -h_rows[:n] + t * v_rows
    mat[n] = -root * h_rows[n]
    return determinant(mat) / root


@dataclass
class DegreeEstimate:
    raw: float
    rounded: int
    residual: float

    def to_dict(self):
        return {"raw": self.raw, "rounded": self.rounded, "residual": self.residual}


def _round_degree(raw: float) -> DegreeEstimate:
    if not math.isfinite(raw):
        raise InconclusiveDegreeError(f"degree estimate {raw!r} is not finite")
    rounded = int(round(raw))
    residual = abs(raw - rounded)
    if residual >= 0.5:
        raise InconclusiveDegreeError(
            f"degree estimate {raw!r} is not close to any integer (residual {residual:.3g})"
        )
    return DegreeEstimate(raw=raw, rounded=rounded, residual=residual)


def orthonormal_tangent_basis(surface, u, rows=None, g=None) -> AdaptedBasis:
    """Metric Gram-Schmidt of the parameter frame, oriented to the surface.

    Used where no distinguished field is needed (mu_0 / degree): any
    orthonormal basis of matching orientation gives the same determinant.
    """
    u = np.asarray(u, dtype=float)
    if g is None:
        g = surface.ambient.metric_at(surface.f(u))
    if rows is None:
        rows = tangent_frame(surface, u)
    gram = rows @ g @ rows.T
    m = rows.shape[0]
    coeffs = np.eye(m)
    basis = []
    for a in range(m):
        w = coeffs[a]
        for b in basis:
            w = w - float(w @ gram @ b) * b
        w = w / math.sqrt(float(w @ gram @ w))
        basis.append(w)
    out = np.array(basis)
    if surface.orientation < 0:
        out[0] = -out[0]
    return AdaptedBasis(vectors=out @ rows, coeffs=out, gram=gram)


def pointwise_mu0(surface, u) -> float:
    """det(-(A + alpha)) in a positively oriented orthonormal basis: the
    Jacobian density of the Gauss map against the target sphere."""
    u = np.asarray(u, dtype=float)
    basis = orthonormal_tangent_basis(surface, u)
    core = _operator_core(surface, u, basis=basis)
    return determinant(-(core["h"] + core["alpha"]))


def degree(surface, resolution) -> DegreeEstimate:
    """Normalized integral of det(-(A+alpha)) over the surface."""
    rules = quadrature_nodes(surface, resolution)
    terms = []
    for coords, w in _grid_iter(rules):
        basis = orthonormal_tangent_basis(surface, coords)
        core = _operator_core(surface, coords, basis=basis)
        mu0 = determinant(-(core["h"] + core["alpha"]))
        vel = math.sqrt(max(np.linalg.det(basis.gram), 0.0))
        terms.append(w * vel * mu0)
    raw = kahan_sum(terms) / sphere_volume(surface.ambient.dim)
    return _round_degree(raw)


def gauss_jacobian_error(surface, u, vfield=None) -> float:
    """Max discrepancy between the differentiated Gauss map and the operator
    prediction: the pushed-forward basis image must be -(h+alpha) columns."""
    u = np.asarray(u, dtype=float)
    ambient = surface.ambient
    p = surface.f(u)
    g = ambient.metric_at(p)
    rows = tangent_frame(surface, u)
    if vfield is None:
        basis = orthonormal_tangent_basis(surface, u, rows=rows, g=g)
    else:
        basis = adapted_basis(surface, u, vfield, rows=rows, g=g)
    core = _operator_core(surface, u, basis=basis)
    h_rows = core["h"] + core["alpha"]
    frame = ambient.frame_at(p)
    dim = ambient.dim
    slots = np.array([(frame @ e)[:dim] for e in basis.vectors])  # Gamma(e_A)
    worst = 0.0
    for b in range(surface.mdim):
        fd = _dirdiff_vec(lambda uu: gauss_map(surface, uu), u, basis.coeffs[b], surface.diff)
        predicted = -(h_rows[:, b] @ slots)
        worst = max(worst, float(np.max(np.abs(fd - predicted))))
    return worst


# ---------------------------------------------------------------------------
# degree by preimage counting


def _wrap_delta(delta, periods):
    out = np.array(delta, dtype=float)
    for i, per in enumerate(periods):
        if per > 0.0:
            out[i] = (out[i] + 0.5 * per) % per - 0.5 * per
    return out


def degree_by_preimage(surface, regular_value, resolution, max_iter=60) -> int:
    """Signed preimage count of a regular value of the Gauss map.

    Coarse grid scan for candidate starts, Gauss-Newton refinement on
    |gamma(u) - y|, deduplication through the ambient chart (periodic
    coordinates wrapped), then sign(det(-(A+alpha))) at each root. Raises
    when any root sits too close to critical (the value is not usably
    regular) so the caller can pick a different value.
    """
    y = np.asarray(regular_value, dtype=float)
    y = y / np.linalg.norm(y)
    rules = quadrature_nodes(surface, resolution)
    nodes = [r[0] for r in rules]
    shape = tuple(len(nd) for nd in nodes)
    ncoords = len(nodes)

    misfit = np.empty(shape)
    for idx in np.ndindex(shape):
        coords = np.array([nodes[a][idx[a]] for a in range(ncoords)])
        misfit[idx] = float(np.sum((gauss_map(surface, coords) - y) ** 2))

    # local minima of the misfit on the grid (periodic in every axis: the
    # polar axes are interior-only but wrapping just adds harmless starts)
    candidates = []
    for idx in np.ndindex(shape):
        val = misfit[idx]
        if val > 0.25:
            continue
        is_min = True
        for a in range(ncoords):
            for step in (-1, 1):
                jdx = list(idx)
                jdx[a] = (jdx[a] + step) % shape[a]
                if misfit[tuple(jdx)] < val:
                    is_min = False
                    break
            if not is_min:
                break
        if is_min:
            candidates.append(np.array([nodes[a][idx[a]] for a in range(ncoords)]))

    step_h = 1e-6
    roots = []
    for start in candidates:
        u = np.array(start, dtype=float)
        ok = False
        for _ in range(max_iter):
            r = gauss_map(surface, u) - y
            if float(np.linalg.norm(r)) < 1e-11:
                ok = True
                break
            jac = np.empty((len(r), ncoords))
            for a in range(ncoords):
                d = np.zeros(ncoords)
                d[a] = 1.0
                jac[:, a] = (
                    gauss_map(surface, u + step_h * d) - gauss_map(surface, u - step_h * d)
                ) / (2.0 * step_h)
            delta, *_ = np.linalg.lstsq(jac, -r, rcond=None)
            if not np.all(np.isfinite(delta)):
                break
            nd = float(np.linalg.norm(delta))
            if nd > 1.0:
                delta *= 1.0 / nd
            u = u + delta
            if nd < 1e-13:
                ok = float(np.linalg.norm(gauss_map(surface, u) - y)) < 1e-9
                break
        if not ok:
            continue
        chart_pt = surface.ambient.normalize_point(surface.f(u))
        duplicate = False
        for _, other_pt, _ in roots:
            d = _wrap_delta(chart_pt - other_pt, surface.ambient.periods)
            if float(np.linalg.norm(d)) < 1e-6:
                duplicate = True
                break
        if duplicate:
            continue
        mu0 = pointwise_mu0(surface, u)
        roots.append((np.array(u), chart_pt, mu0))

    total = 0
    for u, _, mu0 in roots:
        if abs(mu0) <= REGULAR_VALUE_DET_FLOOR:
            raise RetryWithDifferentValueError(
                f"preimage at u={u} is near-critical (|det| = {abs(mu0):.3e}); "
                "choose a different regular value"
            )
        total += 1 if mu0 > 0 else -1
    return total


# ---------------------------------------------------------------------------
# verification of the quantization identity


@dataclass
class VerificationReport:
    scenario: str
    ambient: str
    v_name: str
    resolution: list
    degree: DegreeEstimate
    integrals: list
    rhs: list
    residuals: list
    extractor_discrepancy: float
    orientation: int
    volume: float
    sphere_volume: float
    sign_flip_suspected: bool

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "ambient": self.ambient,
            "v_name": self.v_name,
            "resolution": list(self.resolution),
            "degree": self.degree.to_dict(),
            "integrals": list(self.integrals),
            "rhs": list(self.rhs),
            "residuals": list(self.residuals),
            "extractor_discrepancy": self.extractor_discrepancy,
            "orientation": self.orientation,
            "volume": self.volume,
            "sphere_volume": self.sphere_volume,
            "sign_flip_suspected": self.sign_flip_suspected,
        }


def integrate_mu(surface, vfield, resolution, t_samples=None, with_fit=False):
    """One grid pass: integrals of every mu_k, the surface volume, and (when
    with_fit) the max pointwise discrepancy between the two extractors."""
    m = surface.mdim
    rules = quadrature_nodes(surface, resolution)
    if t_samples is None:
        t_samples = default_t_samples(m)
    ts = np.array([float(t) for t in t_samples])
    if with_fit and len(ts) < m:
        raise ParameterError(f"need at least {m} t samples, got {len(ts)}")
    mu_terms = [[] for _ in range(m)]
    vol_terms = []
    disc = 0.0
    for coords, w in _grid_iter(rules):
        data = field_data(surface, coords, vfield)
        mu = mu_by_expansion(data).values
        if with_fit:
            fit = mu_by_fit(surface, vfield, coords, t_samples=ts, data=data).values
            disc = max(disc, float(np.max(np.abs(mu - fit))))
        wv = w * data.vol_element
        vol_terms.append(wv)
        for k in range(m):
            mu_terms[k].append(wv * mu[k])
    integrals = [kahan_sum(t) for t in mu_terms]
    volume = kahan_sum(vol_terms)
    return integrals, volume, disc


def verify_main_theorem(
    surface,
    vfield,
    resolution,
    t_samples=None,
    scenario: str = "",
    expected_degree=None,
) -> VerificationReport:
    """Integrate every mu_k and compare against deg * vol(sphere) * binomials.

    The degree comes from the k = 0 integral itself (the sphere-volume
    normalization), so the k = 0 residual is a pure rounding gap; the k > 0
    entries are the substantive checks. Residuals are absolute.
    """
    if surface.euler_char != 0:
        raise ParameterError(
            f"{surface.name}: verification requires Euler characteristic 0, "
            f"got {surface.euler_char}"
        )
    m = surface.mdim
    n = m - 1
    integrals, volume, disc = integrate_mu(
        surface, vfield, resolution, t_samples=t_samples, with_fit=True
    )
    vol_sphere = sphere_volume(surface.ambient.dim)
    est = _round_degree(integrals[0] / vol_sphere)
    rhs = []
    for k in range(m):
        if n % 2 == 0 and k % 2 == 0:
            rhs.append(est.rounded * vol_sphere * float(math.comb(n // 2, k // 2)))
        else:
            rhs.append(0.0)
    residuals = [abs(i - r) for i, r in zip(integrals, rhs)]
    suspect = (
        expected_degree is not None
        and expected_degree != 0
        and est.rounded == -expected_degree
    )
    return VerificationReport(
        scenario=scenario or surface.name,
        ambient=surface.ambient.describe(),
        v_name=vfield.name,
        resolution=surface.domain.normalized_resolution(resolution),
        degree=est,
        integrals=integrals,
        rhs=rhs,
        residuals=residuals,
        extractor_discrepancy=disc,
        orientation=surface.orientation,
        volume=volume,
        sphere_volume=vol_sphere,
        sign_flip_suspected=bool(suspect),
    )


def v_independence_check(surface, v1, v2, resolution) -> float:
    """Max over k of the gap between the mu_k integrals for two fields."""
    ints1, _, _ = integrate_mu(surface, v1, resolution)
    ints2, _, _ = integrate_mu(surface, v2, resolution)
    return max(abs(a - b) for a, b in zip(ints1, ints2))
