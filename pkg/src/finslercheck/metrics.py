"""Metric representations and the pointwise checks built on their jets.

A spherically symmetric metric is carried by its profile phi(r, u, v) with
r = |x|, u = |y|, v = <x,y>; F(x,y) = phi(|x|, |y|, <x,y>).  phi must be
positive and positively 1-homogeneous in (u, v).  Profile jets use the
variable order r=0, u=1, v=2 throughout.

General metrics carry F(x, y) directly and are differentiated with jets in
the 2n ambient variables (x^1..x^n, y^1..y^n).  Spherical metrics support
both routes; the ambient route for a profile that cannot be evaluated on
arbitrary jets (the quadrature-built family) goes through multivariate
composition of its 3-variable jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as expr_mod
from .jets import Jet, compose_multivariate, lift_var, sqrt

R, U, V = 0, 1, 2

# Slack absorbing rounding at the boundary case phi_vv = 0 (Euclidean).
PHI_VV_SLACK = -1e-12


class MetricDomainError(ValueError):
    """Evaluation outside the metric's admissible domain."""


def invariants_of(x, y):
    """Rotation invariants (r, u, v) of a point-direction pair.

    v is clamped into [-ru, ru]: Cauchy-Schwarz holds exactly, and rounding
    must not push sqrt(r^2 u^2 - v^2) terms negative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = float(np.linalg.norm(y))
    if u == 0.0:
        raise MetricDomainError("y must be nonzero")
    r = float(np.linalg.norm(x))
    v = float(np.dot(x, y))
    bound = r * u
    v = min(max(v, -bound), bound)
    return r, u, v


@dataclass(frozen=True)
class MetricSample:
    """A point-direction pair with cached rotation invariants."""

    x: np.ndarray
    y: np.ndarray
    r: float
    u: float
    v: float

    @classmethod
    def of(cls, x, y) -> "MetricSample":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r, u, v = invariants_of(x, y)
        return cls(x, y, r, u, v)


# -- profile evaluators --------------------------------------------------------


class ClosedFormProfile:
    """phi given as a python function of three jets (r, u, v)."""

    supports_general_jets = True

    def __init__(self, fn):
        self.fn = fn

    def jet(self, r: float, u: float, v: float, order: int) -> Jet:
        return self.fn(
            lift_var(R, r, 3, order), lift_var(U, u, 3, order), lift_var(V, v, 3, order)
        )

    def apply(self, rj: Jet, uj: Jet, vj: Jet) -> Jet:
        return self.fn(rj, uj, vj)


class ExpressionProfile:
    """phi parsed from a formula in the variables r, u, v."""

    supports_general_jets = True

    def __init__(self, source: str):
        self.source = source
        self.ast = expr_mod.parse(source, {"r", "u", "v"})

    def jet(self, r: float, u: float, v: float, order: int) -> Jet:
        return self.apply(
            lift_var(R, r, 3, order), lift_var(U, u, 3, order), lift_var(V, v, 3, order)
        )

    def apply(self, rj: Jet, uj: Jet, vj: Jet) -> Jet:
        return expr_mod.evaluate(self.ast, {"r": rj, "u": uj, "v": vj})


@dataclass
class SphericalMetric:
    """F(x,y) = phi(|x|, |y|, <x,y>) on the ball |x| < domain_radius."""

    name: str
    profile: object
    domain_radius: float = math.inf
    expected_curvature: float | None = None
    params: dict = field(default_factory=dict)

    def phi_jet(self, r: float, u: float, v: float, order: int = 2) -> Jet:
        if u <= 0.0:
            raise MetricDomainError("u must be positive")
        if r >= self.domain_radius:
            raise MetricDomainError(
                f"|x| = {r} outside domain of {self.name} (radius {self.domain_radius})"
            )
        return self.profile.jet(r, u, v, order)

    def phi_value(self, r: float, u: float, v: float) -> float:
        return self.phi_jet(r, u, v, order=0).value

    def evaluate(self, x, y) -> float:
        r, u, v = invariants_of(x, y)
        value = self.phi_value(r, u, v)
        if not value > 0.0:
            raise MetricDomainError(
                f"{self.name} is not positive at r={r}, u={u}, v={v}: phi={value}"
            )
        return value

    def ambient_jet(self, x, y, order: int) -> Jet:
        """Jet of F in the 2n variables (x^1..x^n, y^1..y^n)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = len(x)
        xs = [lift_var(i, x[i], 2 * n, order) for i in range(n)]
        ys = [lift_var(n + i, y[i], 2 * n, order) for i in range(n)]
        rj = sqrt(sum(c * c for c in xs))
        uj = sqrt(sum(c * c for c in ys))
        vj = sum(a * b for a, b in zip(xs, ys))
        if getattr(self.profile, "supports_general_jets", False):
            return self.profile.apply(rj, uj, vj)
        outer = self.phi_jet(rj.value, uj.value, vj.value, order)
        return compose_multivariate(outer, [rj, uj, vj])


@dataclass
class GeneralMetric:
    """F(x,y) given directly, as a callable over ambient jets or a formula."""

    name: str
    n: int
    fn: object
    domain_radius: float = math.inf

    @classmethod
    def from_expression(cls, source: str, n: int, name: str = "general", domain_radius: float = math.inf):
        names = [f"x{i+1}" for i in range(n)] + [f"y{i+1}" for i in range(n)]
        ast = expr_mod.parse(source, set(names))

        def fn(xs, ys):
            return expr_mod.evaluate(ast, dict(zip(names, list(xs) + list(ys))))

        return cls(name, n, fn, domain_radius)

    def ambient_jet(self, x, y, order: int) -> Jet:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(x) != self.n:
            raise MetricDomainError(f"{self.name} is {self.n}-dimensional")
        xs = [lift_var(i, x[i], 2 * self.n, order) for i in range(self.n)]
        ys = [lift_var(self.n + i, y[i], 2 * self.n, order) for i in range(self.n)]
        return self.fn(xs, ys)

    def evaluate(self, x, y) -> float:
        value = self.ambient_jet(x, y, 0).value
        if not value > 0.0:
            raise MetricDomainError(f"{self.name} is not positive at x={x}, y={y}")
        return value


def evaluate_F(metric, x, y) -> float:
    """F(x,y) for either metric kind; positive or MetricDomainError."""
    return metric.evaluate(x, y)


# -- ambient derivative helpers ------------------------------------------------


def f_first_derivatives(metric, sample: MetricSample):
    """(F, F_x, F_y) as (scalar, n-vector, n-vector).

    Spherical metrics use the profile chain rule
    F_x = phi_r x/r + phi_v y,  F_y = phi_u y/u + phi_v x
    (for r = 0 the phi_r term vanishes with x); general metrics read the
    ambient jet.
    """
    if isinstance(metric, SphericalMetric):
        p = metric.phi_jet(sample.r, sample.u, sample.v, order=1)
        phi_r, phi_u, phi_v = p.gradient()
        xr = sample.x / sample.r if sample.r > 0.0 else np.zeros_like(sample.x)
        fx = phi_r * xr + phi_v * sample.y
        fy = (phi_u / sample.u) * sample.y + phi_v * sample.x
        return p.value, fx, fy
    j = metric.ambient_jet(sample.x, sample.y, 1)
    grad = j.gradient()
    n = len(sample.x)
    return j.value, grad[:n], grad[n:]


def energy_ambient_jet(metric, x, y, order: int) -> Jet:
    """Jet of F^2 in the ambient variables."""
    fj = metric.ambient_jet(x, y, order)
    return fj * fj


# -- fundamental tensor and determinant ----------------------------------------


def fundamental_tensor(metric, x, y) -> np.ndarray:
    """g_ij = (1/2) d^2 F^2 / dy^i dy^j.

    For a profile metric, the closed form

        g_ij = (phi phi_u / u) delta_ij
             + (phi_v^2 + phi phi_vv) x_i x_j
             + ((phi_u^2 + phi phi_uu)/u^2 - phi phi_u/u^3) y_i y_j
             + ((phi_u phi_v + phi phi_uv)/u) (x_i y_j + x_j y_i);

    for a general metric, the ambient jet of F^2.
    """
    if isinstance(metric, SphericalMetric):
        s = MetricSample.of(x, y)
        p = metric.phi_jet(s.r, s.u, s.v, order=2)
        return _g_closed_form(p, s)
    return fundamental_tensor_ad(metric, x, y)


def _g_closed_form(p: Jet, s: MetricSample) -> np.ndarray:
    phi = p.value
    phi_u, phi_v = p.partial(U), p.partial(V)
    phi_uu, phi_uv, phi_vv = p.partial(U, U), p.partial(U, V), p.partial(V, V)
    u = s.u
    x, y = s.x, s.y
    c_delta = phi * phi_u / u
    c_xx = phi_v * phi_v + phi * phi_vv
    c_yy = (phi_u * phi_u + phi * phi_uu) / (u * u) - phi * phi_u / (u * u * u)
    c_xy = (phi_u * phi_v + phi * phi_uv) / u
    n = len(x)
    g = c_delta * np.eye(n)
    g += c_xx * np.outer(x, x)
    g += c_yy * np.outer(y, y)
    g += c_xy * (np.outer(x, y) + np.outer(y, x))
    return g


def fundamental_tensor_ad(metric, x, y) -> np.ndarray:
    """g via the ambient jet of F^2; the cross-check route for profiles."""
    e = energy_ambient_jet(metric, x, y, 2)
    n = len(np.asarray(x))
    return e.hessian()[n:, n:] / 2.0


def det_g_closed_form(metric: SphericalMetric, x, y) -> float:
    """det(g) = (phi/u)^(n+1) phi_u^(n-2) [phi_u + (r^2 u^2 - v^2) phi_vv / u]."""
    s = MetricSample.of(x, y)
    p = metric.phi_jet(s.r, s.u, s.v, order=2)
    phi, phi_u, phi_vv = p.value, p.partial(U), p.partial(V, V)
    n = len(s.x)
    bracket = phi_u + (s.r * s.r * s.u * s.u - s.v * s.v) * phi_vv / s.u
    return (phi / s.u) ** (n + 1) * phi_u ** (n - 2) * bracket


@dataclass(frozen=True)
class ConvexityReport:
    lemma_ok: bool
    direct_pd: bool


def convexity_report(metric: SphericalMetric, x, y) -> ConvexityReport:
    """Strong-convexity check two ways.

    lemma_ok is the sufficient profile condition phi_u > 0 and phi_vv >= 0
    (up to PHI_VV_SLACK); direct_pd factorizes g.  lemma_ok implies
    direct_pd; factorization failure reports non-PD rather than raising.
    """
    s = MetricSample.of(x, y)
    p = metric.phi_jet(s.r, s.u, s.v, order=2)
    lemma_ok = p.partial(U) > 0.0 and p.partial(V, V) >= PHI_VV_SLACK
    g = _g_closed_form(p, s)
    try:
        np.linalg.cholesky(g)
        direct_pd = True
    except np.linalg.LinAlgError:
        direct_pd = False
    return ConvexityReport(lemma_ok, direct_pd)


# -- scale-free residual helpers -----------------------------------------------


def relative_residual(*terms: float) -> float:
    """|sum of terms| divided by the sum of their magnitudes (0 when all vanish)."""
    scale = sum(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


def homogeneity_residual(metric: SphericalMetric, r: float, u: float, v: float) -> float:
    """Largest violation of the degree-1 Euler relations of the profile.

    Checks u phi_u + v phi_v = phi (scaled by phi) and the three
    second-order identities u phi_uu + v phi_uv = 0, u phi_uv + v phi_vv = 0
    and phi_uu = (v/u)^2 phi_vv.  Each second-order identity arises from a
    first-order quantity cancelling out of a derivative of Euler's relation,
    so that quantity joins the scale: near v = 0 the identity terms shrink
    like v^2 while their rounding noise does not, and the bare term sum
    would report noise ratios.
    """
    p = metric.phi_jet(r, u, v, order=2)
    phi = p.value
    phi_u, phi_v = p.partial(U), p.partial(V)
    phi_uu, phi_uv, phi_vv = p.partial(U, U), p.partial(U, V), p.partial(V, V)

    def scaled(a: float, b: float, anchor: float) -> float:
        scale = abs(a) + abs(b) + abs(anchor)
        return abs(a + b) / scale if scale > 0.0 else 0.0

    first = abs(u * phi_u + v * phi_v - phi) / abs(phi)
    return max(
        first,
        scaled(u * phi_uu, v * phi_uv, phi_u),
        scaled(u * phi_uv, v * phi_vv, phi_v),
        scaled(phi_uu, -((v / u) ** 2) * phi_vv, phi_u / u),
    )


def reversibility_residual(metric: SphericalMetric, r: float, u: float, v: float) -> float:
    """|phi(r,u,-v) - phi(r,u,v)| / phi(r,u,v); zero iff F(x,-y) = F(x,y)."""
    forward = metric.phi_value(r, u, v)
    backward = metric.phi_value(r, u, -v)
    return abs(backward - forward) / forward


@dataclass(frozen=True)
class RiemannianProbe:
    g_deviation: float
    cartan_max: float


def riemannian_probe(metric, x, ys) -> RiemannianProbe:
    """How y-dependent is g at x?

    Reports the largest pairwise deviation of g entries over the given
    directions (relative to the largest entry) together with the largest
    Cartan tensor entry; a Riemannian metric gives zero for both.
    """
    from .symmetry import cartan_tensor

    tensors = [fundamental_tensor(metric, x, y) for y in ys]
    scale = max(float(np.abs(g).max()) for g in tensors)
    dev = 0.0
    for i in range(len(tensors)):
        for j in range(i + 1, len(tensors)):
            dev = max(dev, float(np.abs(tensors[i] - tensors[j]).max()))
    g_dev = dev / scale if scale > 0.0 else 0.0
    cartan = max(float(np.abs(cartan_tensor(metric, x, y)).max()) for y in ys)
    c_rel = cartan / scale if scale > 0.0 else 0.0
    return RiemannianProbe(g_dev, c_rel)


# -- builtin zoo ----------------------------------------------------------------


def _phi_euclidean(r, u, v):
    return u + 0.0


def _phi_klein(r, u, v):
    w = sqrt(u * u * (1.0 - r * r) + v * v)
    return w / (1.0 - r * r)


def _phi_funk(r, u, v):
    w = sqrt(u * u * (1.0 - r * r) + v * v)
    return (w + v) / (1.0 - r * r)


def _phi_berwald(r, u, v):
    one_minus = 1.0 - r * r
    w = sqrt(u * u * one_minus + v * v)
    s = w + v
    return s * s / (one_minus * one_minus * w)


def _phi_spherical(r, u, v):
    return sqrt(u * u * (1.0 + r * r) - v * v) / (1.0 + r * r)


def _make_phi_bryant(alpha: float):
    cos2a = math.cos(2.0 * alpha)
    sin2a = math.sin(2.0 * alpha)

    def phi(r, u, v):
        uu = u * u
        rr = r * r
        t = rr * uu - v * v
        b = cos2a * uu + t
        su = sin2a * uu
        a = b * b + su * su
        c = sin2a * v
        d = rr * rr + 2.0 * cos2a * rr + 1.0
        cd = c / d
        return sqrt((sqrt(a) + b) / (2.0 * d) + cd * cd) + cd

    return phi


def _build_euclidean(params):
    return SphericalMetric("euclidean", ClosedFormProfile(_phi_euclidean), math.inf, 0.0)


def _build_klein(params):
    return SphericalMetric("klein", ClosedFormProfile(_phi_klein), 1.0, -1.0)


def _build_funk(params):
    return SphericalMetric("funk", ClosedFormProfile(_phi_funk), 1.0, -0.25)


def _build_berwald(params):
    return SphericalMetric("berwald", ClosedFormProfile(_phi_berwald), 1.0, 0.0)


def _build_spherical(params):
    return SphericalMetric("spherical", ClosedFormProfile(_phi_spherical), math.inf, 1.0)


def _build_bryant(params):
    alpha = float(params.get("alpha", 0.0))
    if not 0.0 <= alpha < math.pi / 2.0:
        raise ValueError(f"bryant parameter alpha must be in [0, pi/2), got {alpha}")
    return SphericalMetric(
        "bryant",
        ClosedFormProfile(_make_phi_bryant(alpha)),
        math.inf,
        1.0,
        params={"alpha": alpha},
    )


_BUILTINS = {
    "euclidean": _build_euclidean,
    "klein": _build_klein,
    "funk": _build_funk,
    "berwald": _build_berwald,
    "spherical": _build_spherical,
    "bryant": _build_bryant,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str, **params) -> SphericalMetric:
    """Construct a builtin metric by name (parameters: bryant takes alpha)."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin metric '{name}'") from None
    return factory(params)
