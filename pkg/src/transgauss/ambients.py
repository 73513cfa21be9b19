"""Ambient spaces carrying a global point-dependent orthonormal frame.

Each ambient is a Riemannian manifold together with a smooth isometry
Gamma_p from every tangent space onto one fixed inner-product space V
(identified with standard real dim-space). Four families are provided:

* euclidean(dim)        - identity frame, zero curvature
* flat_torus(dim)       - identity frame, periodic coordinates
* berger_group(l1,l2,l3)- S^3 x S^1 as unit quaternions x circle with the
                          left-invariant metric diag(l1,l2,l3) (+) 1
* hyperbolic(dim)       - hyperboloid sheet, frame by parallel transport
                          along radial geodesics to a base point

Points and vectors are plain numpy arrays in chart coordinates. The group
chart is the constrained representation (unit quaternion, angle): five
coordinates for a four-manifold. Its metric_at/frame_at are smooth
extensions off the unit sphere chosen so the sphere slice is totally
geodesic (radially flat product), which keeps the generic Christoffel and
covariant-derivative formulas below valid for tangent data. frame_at is
always a square chart_dim x chart_dim matrix with frame.T @ frame equal to
metric_at exactly; the first `dim` rows are the V components and any extra
row is the constraint normal (zero on tangent vectors).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ParameterError
from .kernel import DEFAULT_DIFF, DiffConfig, directional_derivative, gram_schmidt

__all__ = [
    "TranslationalAmbient",
    "make_ambient",
    "christoffel_at",
    "covariant_derivative",
    "invariant_field_derivative",
]

TWO_PI = 2.0 * math.pi


def _quat_left_matrix(q):
    """Matrix of left quaternion multiplication: L(q) @ p = q * p."""
    a, b, c, d = q
    return np.array(
        [
            [a, -b, -c, -d],
            [b, a, -d, c],
            [c, d, a, -b],
            [d, -c, b, a],
        ]
    )


def _quat_conj(q):
    out = -np.asarray(q, dtype=float)
    out[0] = -out[0]
    return out


class TranslationalAmbient:
    """Base class: metric + frame + derived connection in one chart."""

    kind = "abstract"

    def __init__(self, dim: int, chart_dim: int | None = None):
        self.dim = int(dim)
        self.chart_dim = int(chart_dim if chart_dim is not None else dim)
        # period per chart coordinate, 0.0 meaning non-periodic
        self.periods = np.zeros(self.chart_dim)
        # True when frame_at is constant over the chart (invariant fields
        # are then constant and their covariant derivative vanishes).
        self.constant_frame = False

    # -- chart contract -------------------------------------------------
    def metric_at(self, p) -> np.ndarray:
        raise NotImplementedError

    def frame_at(self, p) -> np.ndarray:
        raise NotImplementedError

    def normalize_point(self, coords) -> np.ndarray:
        p = np.array(coords, dtype=float)
        if p.shape != (self.chart_dim,):
            raise DomainError(f"{self.kind} expects {self.chart_dim} coordinates, got {p.shape}")
        mask = self.periods > 0.0
        p[mask] = np.mod(p[mask], self.periods[mask])
        return p

    def tangent_basis(self, p) -> np.ndarray:
        """Columns spanning the tangent space at p (identity for square charts)."""
        return np.eye(self.chart_dim)

    def christoffel_at(self, p, cfg: DiffConfig = DEFAULT_DIFF) -> np.ndarray:
        """Gamma[k, i, j] from central differences of the metric."""
        cd = self.chart_dim
        dg = np.empty((cd, cd, cd))
        for a in range(cd):
            step = np.zeros(cd)
            step[a] = 1.0
            dg[a] = directional_derivative(self.metric_at, p, step, cfg)
        ginv = np.linalg.inv(self.metric_at(p))
        # T[l,i,j] = d_i g_lj + d_j g_li - d_l g_ij
        term = np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg
        return 0.5 * np.einsum("kl,lij->kij", ginv, term)

    def describe(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<TranslationalAmbient {self.describe()}>"


class EuclideanAmbient(TranslationalAmbient):
    kind = "euclidean"

    def __init__(self, dim: int):
        if dim < 2:
            raise ParameterError(f"euclidean dim must be >= 2, got {dim}")
        super().__init__(dim)
        self.constant_frame = True
        self._eye = np.eye(dim)

    def metric_at(self, p):
        return self._eye

    def frame_at(self, p):
        return self._eye

    def christoffel_at(self, p, cfg=DEFAULT_DIFF):
        return np.zeros((self.dim,) * 3)

    def describe(self):
        return f"euclidean({self.dim})"


class FlatTorusAmbient(TranslationalAmbient):
    """Flat torus with unit periods by default."""

    kind = "flat_torus"

    def __init__(self, dim: int, periods=None):
        if dim < 2:
            raise ParameterError(f"flat_torus dim must be >= 2, got {dim}")
        super().__init__(dim)
        if periods is None:
            self.periods = np.ones(dim)
        else:
            self.periods = np.asarray(periods, dtype=float)
            if self.periods.shape != (dim,) or np.any(self.periods <= 0.0):
                raise ParameterError(f"flat_torus needs {dim} positive periods")
        self.constant_frame = True
        self._eye = np.eye(dim)

    def metric_at(self, p):
        return self._eye

    def frame_at(self, p):
        return self._eye

    def christoffel_at(self, p, cfg=DEFAULT_DIFF):
        return np.zeros((self.dim,) * 3)

    def describe(self):
        return f"flat_torus({self.dim})"


class BergerGroupAmbient(TranslationalAmbient):
    """S^3 x S^1 with a left-invariant metric diag(l1, l2, l3) (+) 1.

    Chart coordinates: (x1, x2, x3, x4, s) with the quaternion part kept on
    the unit sphere by normalize_point; s has period 2 pi. V coordinates are
    taken w.r.t. the orthonormal algebra basis (i/sqrt(l1), j/sqrt(l2),
    k/sqrt(l3), d/ds), so frame_at rows are (3 algebra slots, s slot,
    radial slot).
    """

    kind = "berger_group"

    def __init__(self, lambdas):
        lam = np.asarray(lambdas, dtype=float)
        if lam.shape != (3,) or np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
            raise ParameterError(f"berger_group needs three positive lambdas, got {lambdas}")
        super().__init__(dim=4, chart_dim=5)
        self.lambdas = lam
        self.periods = np.array([0.0, 0.0, 0.0, 0.0, TWO_PI])
        self._sqrt_lam = np.sqrt(lam)
        self._weight = np.diag(np.concatenate(([1.0], lam)))
        self._koszul = self._build_koszul()

    def normalize_point(self, coords):
        p = super().normalize_point(coords)
        r = np.linalg.norm(p[:4])
        if r < 1e-12:
            raise DomainError("berger_group quaternion part must be nonzero")
        p[:4] /= r
        return p

    def _algebra_map(self, x):
        """Matrix B with B @ w = conj(q) * (projected w) / r, in R^4 slots."""
        r2 = float(x @ x)
        proj = np.eye(4) - np.outer(x, x) / r2
        return _quat_left_matrix(_quat_conj(x)) @ proj / r2

    def metric_at(self, p):
        x = p[:4]
        r2 = float(x @ x)
        b = self._algebra_map(x)
        g = np.zeros((5, 5))
        g[:4, :4] = np.outer(x, x) / r2 + b.T @ self._weight @ b
        g[4, 4] = 1.0
        return g

    def frame_at(self, p):
        x = p[:4]
        r = math.sqrt(float(x @ x))
        b = self._algebra_map(x)
        out = np.zeros((5, 5))
        out[:3, :4] = self._sqrt_lam[:, None] * b[1:4, :]
        out[3, 4] = 1.0
        out[4, :4] = x / r
        return out

    def tangent_basis(self, p):
        x = p[:4]
        lx = _quat_left_matrix(x)
        cols = np.zeros((5, 4))
        cols[:4, :3] = lx[:, 1:4]  # x*i, x*j, x*k
        cols[4, 3] = 1.0
        return cols

    def _build_koszul(self):
        """K[a, b, c]: component c of the connection bilinear map on the
        orthonormalized algebra basis (order i, j, k, s)."""
        weights = np.concatenate((self.lambdas, [1.0]))
        c = np.zeros((4, 4, 4))
        for a, b, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            c[a, b, k] = 2.0
            c[b, a, k] = -2.0
        scale = np.sqrt(weights)
        cn = c * scale[None, None, :] / (scale[:, None, None] * scale[None, :, None])
        # 2<K(a,b), c> = <[a,b],c> - <[b,c],a> + <[c,a],b>
        return 0.5 * (
            cn - np.einsum("bca->abc", cn) + np.einsum("cab->abc", cn)
        )

    def koszul_connection(self, xv, yv):
        """Connection of left-invariant fields, in V coordinates."""
        return np.einsum("abc,a,b->c", self._koszul, xv, yv)

    def curvature_algebra(self, xv, yv, zv):
        """R(X, Y)Z for left-invariant fields, V coordinates."""
        k = self.koszul_connection
        xy = np.einsum("abc,a,b->c", self._koszul - np.transpose(self._koszul, (1, 0, 2)), xv, yv)
        # torsion-free: [X, Y] = K(X,Y) - K(Y,X)
        return k(xv, k(yv, zv)) - k(yv, k(xv, zv)) - k(xy, zv)

    def describe(self):
        return "berger(%g,%g,%g)" % tuple(self.lambdas)


class HyperbolicAmbient(TranslationalAmbient):
    """Hyperboloid sheet in Minkowski (dim+1)-space, time coordinate first.

    Chart: orthogonal projection onto the tangent space at base_point, i.e.
    X(y) = sqrt(1+|y|^2) b + sum y_i b_i with (b_i) a Minkowski-orthonormal
    spacelike basis of b-perp. Gamma_p is parallel transport along the
    radial geodesic back to b, expressed in the (b_i) coordinates.
    """

    kind = "hyperbolic"

    def __init__(self, dim: int, base_point=None):
        if dim < 2:
            raise ParameterError(f"hyperbolic dim must be >= 2, got {dim}")
        super().__init__(dim)
        m = dim + 1
        if base_point is None:
            b = np.zeros(m)
            b[0] = 1.0
        else:
            b = np.asarray(base_point, dtype=float)
            if b.shape != (m,):
                raise DomainError(f"hyperbolic({dim}) base_point needs {m} Minkowski coordinates")
        self._eta = np.ones(m)
        self._eta[0] = -1.0
        if abs(self._mdot(b, b) + 1.0) > 1e-9 or b[0] <= 0.0:
            raise DomainError(
                "base_point must lie on the upper hyperboloid sheet <x,x> = -1"
            )
        self.base_point = b
        self.spatial_basis = self._complete_basis(b)

    def _mdot(self, u, v):
        return float(u @ (self._eta * v))

    def _complete_basis(self, b):
        """Minkowski-orthonormal spacelike basis of the tangent space at b."""
        basis = []
        for k in range(self.dim + 1):
            w = np.zeros(self.dim + 1)
            w[k] = 1.0
            w = w + self._mdot(w, b) * b  # remove timelike component (=-<w,b>/-1 * b)
            for u in basis:
                w = w - self._mdot(w, u) * u
            norm2 = self._mdot(w, w)
            if norm2 < 1e-12:
                continue
            basis.append(w / math.sqrt(norm2))
            if len(basis) == self.dim:
                break
        return np.array(basis)  # shape (dim, dim+1)

    def embed(self, p):
        """Chart point -> Minkowski coordinates on the hyperboloid."""
        x0 = math.sqrt(1.0 + float(p @ p))
        return x0 * self.base_point + p @ self.spatial_basis

    def chart_of(self, x):
        """Spatial chart coordinates of a Minkowski vector.

        Linear, so it maps hyperboloid points to their chart coordinates
        (inverse of embed) and tangent Minkowski vectors to chart
        velocities alike.
        """
        return self.spatial_basis @ (self._eta * np.asarray(x, dtype=float))

    def chart_jacobian(self, p):
        """Columns d(embed)/dy_i, shape (dim+1, dim)."""
        x0 = math.sqrt(1.0 + float(p @ p))
        return np.outer(self.base_point, p) / x0 + self.spatial_basis.T

    def metric_at(self, p):
        return np.eye(self.dim) - np.outer(p, p) / (1.0 + float(p @ p))

    def transport_to_base(self, p, w):
        """Parallel transport of a tangent Minkowski vector w from embed(p)
        to the base point along the connecting geodesic (closed form)."""
        x = self.embed(p)
        b = self.base_point
        lam = -self._mdot(x, b)  # cosh of the geodesic distance
        return w + self._mdot(b, w) / (lam + 1.0) * (x + b)

    def frame_at(self, p):
        jac = self.chart_jacobian(p)
        x = self.embed(p)
        b = self.base_point
        lam = -self._mdot(x, b)
        coef = (self._eta * b) @ jac / (lam + 1.0)  # <b, J_i>_L per column
        transported = jac + np.outer(x + b, coef)
        return self.spatial_basis @ (self._eta[:, None] * transported)

    def christoffel_at(self, p, cfg=DEFAULT_DIFF):
        g = self.metric_at(p)
        gamma = np.einsum("ij,k->kij", g, -p)
        return gamma

    def describe(self):
        return f"hyperbolic({self.dim})"


def make_ambient(kind: str, **params) -> TranslationalAmbient:
    """Construct an ambient by kind name.

    kinds: euclidean(dim), flat_torus(dim[, periods]),
    berger_group(lambdas), hyperbolic(dim[, base_point]).
    """
    if kind == "euclidean":
        return EuclideanAmbient(int(params.get("dim", 4)))
    if kind == "flat_torus":
        return FlatTorusAmbient(int(params.get("dim", 4)), params.get("periods"))
    if kind == "berger_group":
        return BergerGroupAmbient(params.get("lambdas", (1.0, 1.0, 1.0)))
    if kind == "hyperbolic":
        return HyperbolicAmbient(int(params.get("dim", 4)), params.get("base_point"))
    raise ParameterError(f"unknown ambient kind {kind!r}")


def christoffel_at(ambient: TranslationalAmbient, p, cfg: DiffConfig = DEFAULT_DIFF):
    return ambient.christoffel_at(np.asarray(p, dtype=float), cfg)


def covariant_derivative(
    ambient: TranslationalAmbient,
    p,
    x,
    field,
    cfg: DiffConfig = DEFAULT_DIFF,
    christoffel=None,
):
    """Levi-Civita derivative of a chart-defined vector field along x at p.

    field maps chart coordinates to vector components. The component
    derivative is a central difference along the straight coordinate line
    through p; pass a precomputed christoffel tensor to skip recomputing it.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    dy = directional_derivative(field, p, x, cfg)
    if christoffel is None:
        christoffel = ambient.christoffel_at(p, cfg)
    return dy + np.einsum("kij,i,j->k", christoffel, x, field(p))


def invariant_field_derivative(
    ambient: TranslationalAmbient,
    anchor,
    y,
    p,
    x,
    cfg: DiffConfig = DEFAULT_DIFF,
    method: str = "auto",
    christoffel=None,
):
    """Derivative along x at p of the frame-invariant extension of (anchor, y).

    The invariant extension is ytilde(q) = Gamma_q^{-1} Gamma_anchor y. With
    method="auto", flat-frame ambients return exact zeros, the Berger group
    uses its closed-form algebra connection when p coincides with the anchor,
    and everything else differentiates the extension numerically.
    method="generic" forces the numeric path (used by cross-check tests).
    """
    anchor = np.asarray(anchor, dtype=float)
    y = np.asarray(y, dtype=float)
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)

    if method not in ("auto", "generic"):
        raise ParameterError(f"unknown method {method!r}")

    if method == "auto":
        if ambient.constant_frame:
            return np.zeros(ambient.chart_dim)
        if isinstance(ambient, BergerGroupAmbient) and np.allclose(anchor, p, atol=1e-12):
            frame = ambient.frame_at(p)
            xv = (frame @ x)[: ambient.dim]
            yv = (frame @ y)[: ambient.dim]
            kv = ambient.koszul_connection(xv, yv)
            ext = np.zeros(ambient.chart_dim)
            ext[: ambient.dim] = kv
            return np.linalg.solve(frame, ext)

    slots = ambient.frame_at(anchor) @ y

    def invariant(q):
        return np.linalg.solve(ambient.frame_at(q), slots)

    return covariant_derivative(ambient, p, x, invariant, cfg, christoffel=christoffel)
