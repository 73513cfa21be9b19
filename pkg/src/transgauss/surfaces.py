"""Closed hypersurfaces immersed in a translational ambient.

A surface is a smooth map f from a product parameter domain (circle and
sphere factors) into an ambient chart, one dimension below the ambient.
Everything downstream consumes OperatorData: the adapted orthonormal
tangent basis (chosen unit field last), the shape operator matrix h, the
frame-invariant shape matrix alpha, and the tangential derivative data of
the unit field and its invariant extension.

Derivatives of surface fields (the normal, the unit field) are tangential
only: chart components are differenced along parameter curves and
corrected by the ambient Christoffel symbols, which is exactly the ambient
covariant derivative for directions tangent to the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .ambients import TranslationalAmbient, invariant_field_derivative
from .errors import (
    ConfigError,
    DegenerateBasisError,
    DimensionError,
    ImmersionError,
    ParameterError,
)
from .kernel import DEFAULT_DIFF, DiffConfig, kahan_sum

__all__ = [
    "CircleFactor",
    "SphereFactor",
    "ProductDomain",
    "ImmersedHypersurface",
    "UnitTangentField",
    "OperatorData",
    "tangent_frame",
    "unit_normal",
    "shape_operator",
    "invariant_shape_operator",
    "adapted_basis",
    "field_data",
    "integrate",
    "quadrature_nodes",
]

TWO_PI = 2.0 * math.pi
MIN_RESOLUTION = 8
RANK_TOL = 1e-10


@dataclass(frozen=True)
class CircleFactor:
    """One periodic coordinate; trapezoid rule (spectral on smooth data)."""

    period: float = TWO_PI

    @property
    def ncoords(self):
        return 1

    def coordinate_rules(self, count):
        h = self.period / count
        nodes = h * np.arange(count)
        weights = np.full(count, h)
        return [(nodes, weights)]


@dataclass(frozen=True)
class SphereFactor:
    """Round-sphere coordinate block: polar angles then one azimuth.

    sphere_dim - 1 polar angles get Gauss-Legendre nodes strictly inside
    (0, pi) so coordinate degeneracies at the poles are never sampled; the
    azimuth is periodic and gets the trapezoid rule.
    """

    sphere_dim: int = 2

    def __post_init__(self):
        if self.sphere_dim < 1:
            raise ParameterError(f"sphere_dim must be >= 1, got {self.sphere_dim}")

    @property
    def ncoords(self):
        return self.sphere_dim

    def coordinate_rules(self, count):
        rules = []
        t, w = np.polynomial.legendre.leggauss(count)
        polar_nodes = 0.5 * math.pi * (t + 1.0)
        polar_weights = 0.5 * math.pi * w
        for _ in range(self.sphere_dim - 1):
            rules.append((polar_nodes, polar_weights))
        h = TWO_PI / count
        rules.append((h * np.arange(count), np.full(count, h)))
        return rules


class ProductDomain:
    def __init__(self, *factors):
        if not factors:
            raise ParameterError("domain needs at least one factor")
        self.factors = tuple(factors)
        self.ncoords = sum(f.ncoords for f in factors)

    def normalized_resolution(self, resolution):
        """Broadcast an int, or validate a per-factor list."""
        if isinstance(resolution, (int, np.integer)):
            counts = [int(resolution)] * len(self.factors)
        else:
            counts = [int(r) for r in resolution]
            if len(counts) != len(self.factors):
                raise ConfigError(
                    f"resolution needs {len(self.factors)} entries, got {len(counts)}"
                )
        for c in counts:
            if c < MIN_RESOLUTION:
                raise ConfigError(f"resolution {c} below minimum {MIN_RESOLUTION}")
        return counts

    def coordinate_rules(self, resolution):
        counts = self.normalized_resolution(resolution)
        rules = []
        for fac, count in zip(self.factors, counts):
            rules.extend(fac.coordinate_rules(count))
        return rules


@dataclass(frozen=True)
class UnitTangentField:
    """Named tangent field rule; rule(surface, u) returns a chart vector.

    Rules need not return unit vectors; consumers normalize in the ambient
    metric at the evaluation point. They must be smooth and nonvanishing.
    """

    name: str
    rule: object


class ImmersedHypersurface:
    """Immersion f: domain -> ambient chart with orientation bookkeeping.

    chart_frame (optional): analytic u -> rows d f/d u_alpha.
    normal_hint (optional): analytic u -> unnormalized normal chart vector;
    its sign is still corrected to the orientation convention, which makes
    (tangent frame, normal) positively oriented times `orientation`.
    """

    def __init__(
        self,
        name: str,
        ambient: TranslationalAmbient,
        domain: ProductDomain,
        chart_map,
        euler_char: int = 0,
        chart_frame=None,
        normal_hint=None,
        orientation: int = 1,
        diff: DiffConfig = DEFAULT_DIFF,
    ):
        if domain.ncoords != ambient.dim - 1:
            raise DimensionError(
                f"{name}: domain has {domain.ncoords} coordinates but the "
                f"ambient is {ambient.dim}-dimensional"
            )
        if orientation not in (1, -1):
            raise ParameterError(f"orientation must be +1 or -1, got {orientation}")
        self.name = name
        self.ambient = ambient
        self.domain = domain
        self.chart_map = chart_map
        self.euler_char = int(euler_char)
        self.chart_frame = chart_frame
        self.normal_hint = normal_hint
        self.orientation = int(orientation)
        self.diff = diff
        self.mdim = domain.ncoords
        self._hint_sign = None

    def f(self, u):
        return np.asarray(self.chart_map(u), dtype=float)

    def frame_rows(self, u):
        """Rows d f/d u_alpha, analytic when provided else central differences."""
        if self.chart_frame is not None:
            return np.asarray(self.chart_frame(u), dtype=float)
        u = np.asarray(u, dtype=float)
        cfg = self.diff
        rows = np.empty((self.mdim, self.ambient.chart_dim))
        for a in range(self.mdim):
            d = np.zeros(self.mdim)
            d[a] = 1.0
            # inline central difference + one Richardson pass over f
            rows[a] = _dirdiff_vec(self.f, u, d, cfg)
        return rows

    def __repr__(self):
        return f"<ImmersedHypersurface {self.name} in {self.ambient.describe()}>"


def _dirdiff_vec(fn, point, direction, cfg: DiffConfig):
    levels = int(cfg.richardson_levels)
    h = float(cfg.step)

    def central(step):
        return (fn(point + step * direction) - fn(point - step * direction)) / (2.0 * step)

    table = [central(h / (2.0**i)) for i in range(levels + 1)]
    for lev in range(1, levels + 1):
        fac = 4.0**lev
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    return table[0]


def tangent_frame(surface: ImmersedHypersurface, u) -> np.ndarray:
    """Frame rows with the immersion rank guard."""
    u = np.asarray(u, dtype=float)
    rows = surface.frame_rows(u)
    g = surface.ambient.metric_at(surface.f(u))
    gram = rows @ g @ rows.T
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] < RANK_TOL**2:
        raise ImmersionError(
            f"{surface.name}: tangent frame degenerate at u={u} "
            f"(smallest singular value {math.sqrt(max(eigs[0], 0.0)):.3e})"
        )
    return rows


def _tangent_coefficients(ambient, p, g, rows):
    """Express frame rows in an ambient tangent basis.

    Returns (T, M0, C): T columns span the ambient tangent space, M0 is the
    Gram matrix of T, and C's columns hold the frame vectors' coefficients.
    """
    t_cols = ambient.tangent_basis(p)
    m0 = t_cols.T @ g @ t_cols
    c = np.linalg.solve(m0, t_cols.T @ g @ rows.T)
    return t_cols, m0, c


def _normal_coefficients(m0, c):
    """Unit coefficient vector orthogonal (w.r.t. m0) to the columns of c."""
    dim = m0.shape[0]
    # orthonormalize the tangent columns first: projecting probes against a
    # non-orthogonal set would leave tangential contamination behind
    basis = []
    for k in range(c.shape[1]):
        w = c[:, k].astype(float)
        for b in basis:
            w = w - float(w @ m0 @ b) * b
        nrm = math.sqrt(max(float(w @ m0 @ w), 0.0))
        if nrm < 1e-10:
            raise DegenerateBasisError("tangent columns degenerate")
        basis.append(w / nrm)
    # the complement is one-dimensional: every probe lands on the same line,
    # so take the one with the largest residual (the sign is fixed later)
    best, best_nrm = None, 0.0
    for k in range(dim):
        w = np.zeros(dim)
        w[k] = 1.0
        for _ in range(2):
            for b in basis:
                w = w - float(w @ m0 @ b) * b
        nrm = math.sqrt(max(float(w @ m0 @ w), 0.0))
        if nrm > best_nrm:
            best, best_nrm = w / nrm, nrm
    if best is None or best_nrm <= 1e-8:
        raise DegenerateBasisError("no normal complement found (degenerate frame?)")
    return best


def unit_normal(surface: ImmersedHypersurface, u, rows=None) -> np.ndarray:
    """Unit normal in chart coordinates, oriented so that (frame rows,
    normal) is positively oriented in the ambient times surface.orientation."""
    u = np.asarray(u, dtype=float)
    p = surface.f(u)
    g = surface.ambient.metric_at(p)
    if rows is None:
        rows = surface.frame_rows(u)

    if surface.normal_hint is not None:
        nu = np.asarray(surface.normal_hint(u), dtype=float)
        nrm = math.sqrt(float(nu @ g @ nu))
        nu = nu / nrm
        if surface._hint_sign is None:
            t_cols, m0, c = _tangent_coefficients(surface.ambient, p, g, rows)
            w = np.linalg.solve(m0, t_cols.T @ g @ nu)
            s = _orientation_det(c, w)
            surface._hint_sign = surface.orientation * (1.0 if s > 0 else -1.0)
        return surface._hint_sign * nu

    t_cols, m0, c = _tangent_coefficients(surface.ambient, p, g, rows)
    w = _normal_coefficients(m0, c)
    if surface.orientation * _orientation_det(c, w) < 0:
        w = -w
    return t_cols @ w


def _orientation_det(c, w):
    mat = np.empty((c.shape[0], c.shape[0]))
    mat[:, : c.shape[1]] = c
    mat[:, -1] = w
    return float(np.linalg.det(mat))


@dataclass
class AdaptedBasis:
    """Orthonormal tangent basis with the chosen unit field in last place.

    vectors: rows e_1 .. e_{m} as chart vectors (e_m = normalized v).
    coeffs: the same basis written in the parameter frame, rows c_A with
    e_A = sum_alpha c_A[alpha] * (d f/d u_alpha); these are the directions
    used for tangential finite differencing.
    """

    vectors: np.ndarray
    coeffs: np.ndarray
    gram: np.ndarray


def adapted_basis(surface, u, vfield: UnitTangentField, rows=None, g=None) -> AdaptedBasis:
    u = np.asarray(u, dtype=float)
    p = surface.f(u)
    if g is None:
        g = surface.ambient.metric_at(p)
    if rows is None:
        rows = tangent_frame(surface, u)
    gram = rows @ g @ rows.T
    m = surface.mdim

    raw = np.asarray(vfield.rule(surface, u), dtype=float)
    cv = np.linalg.solve(gram, rows @ g @ raw)
    nv = math.sqrt(float(cv @ gram @ cv))
    if nv < RANK_TOL:
        raise DegenerateBasisError(f"field {vfield.name} vanishes at u={u}")
    cv = cv / nv

    # seeds: ambient coordinate frame projected to the tangent space,
    # processed in fixed coordinate order
    proj = np.linalg.solve(gram, rows @ g)  # (m, chart_dim)
    basis = [cv]
    for k in range(proj.shape[1]):
        w = proj[:, k].astype(float)
        for _ in range(2):
            for b in basis:
                w = w - float(w @ gram @ b) * b
        nrm = math.sqrt(max(float(w @ gram @ w), 0.0))
        if nrm > 1e-8:
            basis.append(w / nrm)
        if len(basis) == m:
            break
    if len(basis) < m:
        raise DegenerateBasisError(f"could not complete adapted basis at u={u}")

    coeffs = np.array(basis[1:] + [cv])  # v last
    if np.linalg.det(coeffs) * surface.orientation < 0:
        coeffs[0] = -coeffs[0]
    return AdaptedBasis(vectors=coeffs @ rows, coeffs=coeffs, gram=gram)


@dataclass
class OperatorData:
    """Everything the coefficient extractors need at one surface point."""

    u: np.ndarray
    point: np.ndarray
    normal: np.ndarray
    basis: AdaptedBasis
    h: np.ndarray              # <A e_B, e_A>, (m, m)
    alpha: np.ndarray          # <alpha e_B, e_A>, (m, m)
    a: np.ndarray              # <nabla_{e_j} v, e_i>, (m-1, m-1)
    a_tilde: np.ndarray
    v_row: np.ndarray          # <nabla_v v, e_i>, (m-1,)
    v_tilde_row: np.ndarray
    vol_element: float
    frame: np.ndarray = dataclass_field(default=None, repr=False)
    metric: np.ndarray = dataclass_field(default=None, repr=False)

    @property
    def h_plus_alpha(self):
        return self.h + self.alpha

    @property
    def v_rows(self):
        """Rows V_i = (a - a_tilde | v - v_tilde), shape (m-1, m)."""
        left = self.a - self.a_tilde
        right = (self.v_row - self.v_tilde_row)[:, None]
        return np.concatenate([left, right], axis=1)


def _surface_directional(surface, u, coeff_dir, field_fn, cfg):
    """Componentwise derivative of a surface field along a parameter curve."""
    return _dirdiff_vec(field_fn, np.asarray(u, dtype=float), coeff_dir, cfg)


def shape_operator(surface, u, basis: AdaptedBasis = None, vfield=None) -> np.ndarray:
    """Matrix h[A,B] = <A(e_B), e_A> of the shape operator A = -(ambient
    derivative of the unit normal) in the given (or freshly built) basis."""
    data = _operator_core(surface, u, basis=basis, vfield=vfield, want=("h",))
    return data["h"]


def invariant_shape_operator(surface, u, basis: AdaptedBasis = None, vfield=None) -> np.ndarray:
    data = _operator_core(surface, u, basis=basis, vfield=vfield, want=("alpha",))
    return data["alpha"]


def _operator_core(surface, u, basis=None, vfield=None, want=("h", "alpha")):
    u = np.asarray(u, dtype=float)
    ambient = surface.ambient
    p = surface.f(u)
    g = ambient.metric_at(p)
    rows = tangent_frame(surface, u)
    if basis is None:
        if vfield is None:
            raise ParameterError("need a basis or a field to build one")
        basis = adapted_basis(surface, u, vfield, rows=rows, g=g)
    cfg = surface.diff
    christ = ambient.christoffel_at(p)
    eta = unit_normal(surface, u, rows=rows)
    out = {"basis": basis, "normal": eta}

    if "h" in want:
        h = np.empty((surface.mdim, surface.mdim))
        for b in range(surface.mdim):
            dcomp = _surface_directional(
                surface, u, basis.coeffs[b], lambda uu: unit_normal(surface, uu), cfg
            )
            deta = dcomp + np.einsum("kij,i,j->k", christ, basis.vectors[b], eta)
            h[:, b] = -(basis.vectors @ g @ deta)
        out["h"] = h

    if "alpha" in want:
        if ambient.constant_frame:
            out["alpha"] = np.zeros((surface.mdim, surface.mdim))
        else:
            al = np.empty((surface.mdim, surface.mdim))
            for b in range(surface.mdim):
                dinv = invariant_field_derivative(
                    ambient, p, eta, p, basis.vectors[b], cfg, christoffel=christ
                )
                al[:, b] = basis.vectors @ g @ dinv
            out["alpha"] = al
    return out


def field_data(surface, u, vfield: UnitTangentField) -> OperatorData:
    """Assemble the full operator data block at one parameter point."""
    u = np.asarray(u, dtype=float)
    ambient = surface.ambient
    p = surface.f(u)
    g = ambient.metric_at(p)
    rows = tangent_frame(surface, u)
    gram = rows @ g @ rows.T
    basis = adapted_basis(surface, u, vfield, rows=rows, g=g)
    cfg = surface.diff
    flat = ambient.constant_frame
    christ = None if flat else ambient.christoffel_at(p)
    eta = unit_normal(surface, u, rows=rows)
    m = surface.mdim
    n = m - 1

    def unit_v(uu):
        pp = surface.f(uu)
        gg = ambient.metric_at(pp)
        w = np.asarray(vfield.rule(surface, uu), dtype=float)
        return w / math.sqrt(float(w @ gg @ w))

    h = np.empty((m, m))
    for b in range(m):
        dcomp = _surface_directional(surface, u, basis.coeffs[b], lambda uu: unit_normal(surface, uu), cfg)
        deta = dcomp if flat else dcomp + np.einsum("kij,i,j->k", christ, basis.vectors[b], eta)
        h[:, b] = -(basis.vectors @ g @ deta)

    if ambient.constant_frame:
        alpha = np.zeros((m, m))
    else:
        alpha = np.empty((m, m))
        for b in range(m):
            dinv = invariant_field_derivative(
                ambient, p, eta, p, basis.vectors[b], cfg, christoffel=christ
            )
            alpha[:, b] = basis.vectors @ g @ dinv

    v_chart = basis.vectors[m - 1]
    a = np.empty((n, n))
    v_row = np.empty(n)
    dv_all = []
    for b in range(m):
        dcomp = _surface_directional(surface, u, basis.coeffs[b], unit_v, cfg)
        dv = dcomp if flat else dcomp + np.einsum("kij,i,j->k", christ, basis.vectors[b], v_chart)
        dv_all.append(dv)
    for j in range(n):
        a[:, j] = basis.vectors[:n] @ g @ dv_all[j]
    v_row[:] = basis.vectors[:n] @ g @ dv_all[m - 1]

    if ambient.constant_frame:
        a_tilde = np.zeros((n, n))
        v_tilde_row = np.zeros(n)
    else:
        a_tilde = np.empty((n, n))
        for j in range(n):
            dinv = invariant_field_derivative(
                ambient, p, v_chart, p, basis.vectors[j], cfg, christoffel=christ
            )
            a_tilde[:, j] = basis.vectors[:n] @ g @ dinv
        dinv = invariant_field_derivative(
            ambient, p, v_chart, p, v_chart, cfg, christoffel=christ
        )
        v_tilde_row = basis.vectors[:n] @ g @ dinv

    return OperatorData(
        u=u,
        point=p,
        normal=eta,
        basis=basis,
        h=h,
        alpha=alpha,
        a=a,
        a_tilde=a_tilde,
        v_row=v_row,
        v_tilde_row=v_tilde_row,
        vol_element=math.sqrt(max(np.linalg.det(gram), 0.0)),
        frame=rows,
        metric=g,
    )


def quadrature_nodes(surface: ImmersedHypersurface, resolution):
    """Per-coordinate (nodes, weights) lists for the surface's domain."""
    return surface.domain.coordinate_rules(resolution)


def _grid_iter(rules):
    """C-order iteration over the product grid: yields (coords, weight)."""
    counts = [len(nodes) for nodes, _ in rules]
    ncoords = len(rules)
    idx = [0] * ncoords
    total = int(np.prod(counts))
    coords = np.empty(ncoords)
    for _ in range(total):
        w = 1.0
        for a in range(ncoords):
            coords[a] = rules[a][0][idx[a]]
            w *= rules[a][1][idx[a]]
        yield coords, w
        for a in range(ncoords - 1, -1, -1):
            idx[a] += 1
            if idx[a] < counts[a]:
                break
            idx[a] = 0


def integrate(surface: ImmersedHypersurface, integrand, resolution) -> float:
    """Integral of a scalar over the surface against the induced volume.

    integrand(u) is evaluated on the product quadrature grid; weights are
    the per-coordinate rule weights times sqrt(det induced metric), summed
    compensated in C order.
    """
    rules = quadrature_nodes(surface, resolution)
    ambient = surface.ambient
    terms = []
    for coords, w in _grid_iter(rules):
        rows = surface.frame_rows(coords)
        g = ambient.metric_at(surface.f(coords))
        vel = math.sqrt(max(np.linalg.det(rows @ g @ rows.T), 0.0))
        terms.append(w * vel * float(integrand(coords)))
    return kahan_sum(terms)
