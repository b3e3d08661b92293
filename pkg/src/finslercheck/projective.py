"""Projectivity and constant flag curvature for profile metrics.

A metric is projective (straight-line geodesics) iff F_{x^k y^l} y^k = F_{x^l}.
In profile coordinates this reduces to the pair of PDEs

    phi_rv v/r + phi_vv u^2 = phi_r / r        (radial component)
    phi_uv u + phi_ru v/(r u) = 0              (tangential component)

which are equivalent for 1-homogeneous phi.  For projective metrics the
spray collapses to G^i = P y^i with projective factor

    P = (v phi_r / r + u^2 phi_v) / (2 phi) = F_{x^k} y^k / (2 F),

and constant flag curvature lambda is characterized by a second pair of
PDEs in Q = v phi_r / r + u^2 phi_v:

    4 lambda r phi^4 phi_u + r phi_u Q^2 - 4 r u phi phi_v Q + 4 u phi^2 phi_r = 0
    4 lambda r phi^4 phi_v + r phi_v Q^2 + 2 phi^2 Q_r - 4 phi phi_r Q = 0.

The pointwise curvature evaluator contracts P_{x^k} = P P_{y^k} - lambda F F_{y^k}
with y^k; Euler's relation P_{y^k} y^k = P turns it into

    lambda = (P^2 - P_{x^k} y^k) / F^2,   P_{x^k} y^k = P_r v/r + P_v u^2,

which needs only second-order profile jets.  All formulas carry 1/r, so
operations here require r >= MIN_RADIUS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import (
    MetricSample,
    R,
    SphericalMetric,
    U,
    V,
    relative_residual,
)

MIN_RADIUS = 0.05


def _require_radius(r: float) -> None:
    if r < MIN_RADIUS:
        raise ValueError(f"profile-space operators need r >= {MIN_RADIUS}, got {r}")


def rapcsak_residual(metric, x, y) -> np.ndarray:
    """Component-wise scale-free residual of F_{x^k y^l} y^k - F_{x^l}.

    Profile metrics expand the difference through the chain rule,

        (phi_rv v/r + phi_vv u^2 - phi_r/r) x^l + (phi_ru v/(ru) + phi_uv u) y^l;

    general metrics read both sides off the ambient jet.
    """
    s = MetricSample.of(x, y)
    if isinstance(metric, SphericalMetric):
        _require_radius(s.r)
        p = metric.phi_jet(s.r, s.u, s.v, order=2)
        phi_r = p.partial(R)
        phi_ru, phi_rv = p.partial(R, U), p.partial(R, V)
        phi_uv, phi_vv = p.partial(U, V), p.partial(V, V)
        r, u, v = s.r, s.u, s.v
        term_xx = [phi_rv * v / r, phi_vv * u * u, -phi_r / r]
        term_yy = [phi_ru * v / (r * u), phi_uv * u]
        out = np.empty(len(s.x))
        for l in range(len(s.x)):
            terms = [t * s.x[l] for t in term_xx] + [t * s.y[l] for t in term_yy]
            out[l] = relative_residual(*terms)
        return out
    n = len(s.x)
    fj = metric.ambient_jet(s.x, s.y, 2)
    hess = fj.hessian()
    grad = fj.gradient()
    out = np.empty(n)
    for l in range(n):
        terms = [hess[k, n + l] * s.y[k] for k in range(n)] + [-grad[l]]
        out[l] = relative_residual(*terms)
    return out


def projective_pde_residuals(metric: SphericalMetric, r: float, u: float, v: float) -> tuple[float, float]:
    """Scale-free residuals of the projectivity PDE pair (radial, tangential)."""
    _require_radius(r)
    p = metric.phi_jet(r, u, v, order=2)
    phi_r = p.partial(R)
    phi_ru, phi_rv = p.partial(R, U), p.partial(R, V)
    phi_uv, phi_vv = p.partial(U, V), p.partial(V, V)
    rho1 = relative_residual(phi_rv * v / r, phi_vv * u * u, -phi_r / r)
    rho2 = relative_residual(phi_uv * u, phi_ru * v / (r * u))
    return rho1, rho2


@dataclass(frozen=True)
class _ProfileState:
    """Second-order profile data at one point, shared by the operators below."""

    r: float
    u: float
    v: float
    phi: float
    phi_r: float
    phi_u: float
    phi_v: float
    phi_rr: float
    phi_ru: float
    phi_rv: float
    phi_uu: float
    phi_uv: float
    phi_vv: float

    @classmethod
    def at(cls, metric: SphericalMetric, r: float, u: float, v: float) -> "_ProfileState":
        _require_radius(r)
        p = metric.phi_jet(r, u, v, order=2)
        return cls(
            r, u, v, p.value,
            p.partial(R), p.partial(U), p.partial(V),
            p.partial(R, R), p.partial(R, U), p.partial(R, V),
            p.partial(U, U), p.partial(U, V), p.partial(V, V),
        )

    @property
    def q(self) -> float:
        return self.v / self.r * self.phi_r + self.u * self.u * self.phi_v

    @property
    def q_r(self) -> float:
        return (
            -self.v / (self.r * self.r) * self.phi_r
            + self.v / self.r * self.phi_rr
            + self.u * self.u * self.phi_rv
        )

    @property
    def q_u(self) -> float:
        return (
            self.v / self.r * self.phi_ru
            + 2.0 * self.u * self.phi_v
            + self.u * self.u * self.phi_uv
        )

    @property
    def q_v(self) -> float:
        return (
            self.phi_r / self.r
            + self.v / self.r * self.phi_rv
            + self.u * self.u * self.phi_vv
        )


def projective_factor(metric: SphericalMetric, r: float, u: float, v: float) -> float:
    """P = (v phi_r / r + u^2 phi_v) / (2 phi); 1-homogeneous in (u, v)."""
    st = _ProfileState.at(metric, r, u, v)
    return st.q / (2.0 * st.phi)


def curvature_pde_residuals(
    metric: SphericalMetric, r: float, u: float, v: float, lam: float
) -> tuple[float, float]:
    """Scale-free residuals of the two constant-curvature PDEs at lambda."""
    st = _ProfileState.at(metric, r, u, v)
    q, q_r = st.q, st.q_r
    phi = st.phi
    c_u = relative_residual(
        4.0 * lam * r * phi**4 * st.phi_u,
        r * st.phi_u * q * q,
        -4.0 * r * u * phi * st.phi_v * q,
        4.0 * u * phi * phi * st.phi_r,
    )
    c_v = relative_residual(
        4.0 * lam * r * phi**4 * st.phi_v,
        r * st.phi_v * q * q,
        2.0 * phi * phi * q_r,
        -4.0 * phi * st.phi_r * q,
    )
    return c_u, c_v


def flag_curvature(metric: SphericalMetric, r: float, u: float, v: float) -> float:
    """Pointwise flag curvature of a projective profile metric."""
    st = _ProfileState.at(metric, r, u, v)
    phi = st.phi
    q = st.q
    p = q / (2.0 * phi)
    p_r = (st.q_r * phi - q * st.phi_r) / (2.0 * phi * phi)
    p_v = (st.q_v * phi - q * st.phi_v) / (2.0 * phi * phi)
    p_xy = p_r * v / r + p_v * u * u
    return (p * p - p_xy) / (phi * phi)


def curvature_component_residuals(metric: SphericalMetric, x, y, lam: float) -> np.ndarray:
    """Component-wise residual of P_{x^k} = P P_{y^k} - lambda F F_{y^k}.

    Cross-check for the contracted evaluator; needs the same second-order
    profile jets plus the ambient position.
    """
    s = MetricSample.of(x, y)
    st = _ProfileState.at(metric, s.r, s.u, s.v)
    phi, q = st.phi, st.q
    p = q / (2.0 * phi)
    p_r = (st.q_r * phi - q * st.phi_r) / (2.0 * phi * phi)
    p_u = (st.q_u * phi - q * st.phi_u) / (2.0 * phi * phi)
    p_v = (st.q_v * phi - q * st.phi_v) / (2.0 * phi * phi)
    out = np.empty(len(s.x))
    for k in range(len(s.x)):
        xk, yk = s.x[k], s.y[k]
        terms = [
            p_r * xk / s.r,
            p_v * yk,
            -p * (p_u * yk / s.u),
            -p * (p_v * xk),
            lam * phi * (st.phi_u * yk / s.u),
            lam * phi * (st.phi_v * xk),
        ]
        out[k] = relative_residual(*terms)
    return out


@dataclass(frozen=True)
class CurvatureVerdict:
    """Outcome of a constant-flag-curvature scan over samples."""

    status: str  # "constant" | "non_constant" | "not_projective"
    lambda_estimate: float | None
    max_deviation: float
    pde_residuals: tuple[float, float]
    samples_used: int
    lambda_hypothesis: float | None = None
    projectivity_residual: float = 0.0
    worst_sample: MetricSample | None = None

    @property
    def passed(self) -> bool:
        return self.status == "constant"


def constant_curvature_verdict(
    metric: SphericalMetric,
    samples: list[MetricSample],
    lambda_hypothesis: float | None = None,
    tolerance: float = 1e-6,
    projectivity_gate: float = 1e-6,
) -> CurvatureVerdict:
    """Estimate lambda over the samples and judge whether it is constant.

    The estimate is the median of pointwise values (robust to a few
    near-singular samples); the deviation is the max (strictest).  The
    constant-curvature PDE residuals are evaluated at the hypothesis when
    given, else at the estimate.  When the projectivity residual exceeds
    the gate the verdict refuses to run: the curvature formulas presume a
    projective metric.
    """
    gate_worst = 0.0
    for s in samples:
        gate_worst = max(gate_worst, float(rapcsak_residual(metric, s.x, s.y).max()))
        if gate_worst > projectivity_gate:
            return CurvatureVerdict(
                status="not_projective",
                lambda_estimate=None,
                max_deviation=math.inf,
                pde_residuals=(math.inf, math.inf),
                samples_used=len(samples),
                lambda_hypothesis=lambda_hypothesis,
                projectivity_residual=gate_worst,
            )
    values = np.array([flag_curvature(metric, s.r, s.u, s.v) for s in samples])
    estimate = float(np.median(values))
    deviation = float(np.abs(values - estimate).max())
    lam = lambda_hypothesis if lambda_hypothesis is not None else estimate
    worst_idx = int(np.argmax(np.abs(values - lam)))
    c_u = c_v = 0.0
    for s in samples:
        a, b = curvature_pde_residuals(metric, s.r, s.u, s.v, lam)
        c_u, c_v = max(c_u, a), max(c_v, b)
    constant = deviation <= tolerance
    if lambda_hypothesis is not None:
        constant = constant and abs(estimate - lambda_hypothesis) <= tolerance
    return CurvatureVerdict(
        status="constant" if constant else "non_constant",
        lambda_estimate=estimate,
        max_deviation=deviation,
        pde_residuals=(c_u, c_v),
        samples_used=len(samples),
        lambda_hypothesis=lambda_hypothesis,
        projectivity_residual=gate_worst,
        worst_sample=samples[worst_idx],
    )
