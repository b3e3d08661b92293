"""Named verification checks run over a sampled domain.

Each runner reduces its residual over the sample list in a fixed order
(worst sample wins ties by first occurrence), so reports are deterministic
regardless of how callers might parallelize in the future.
"""

from __future__ import annotations

import numpy as np

from . import geodesics as geo
from . import projective as proj
from . import symmetry as sym
from .metrics import (
    SphericalMetric,
    convexity_report,
    det_g_closed_form,
    fundamental_tensor,
    fundamental_tensor_ad,
    homogeneity_residual,
    relative_residual,
    reversibility_residual,
    riemannian_probe,
)
from .report import CheckRecord


class ConfigError(ValueError):
    """Bad configuration: unknown names, wrong metric kind, invalid params."""


DEFAULT_TOLERANCES = {
    "homogeneity": 1e-9,
    "convexity": 0.0,
    "symmetry": 1e-9,
    "symmetry_tensor": 1e-8,
    "cartan": 1e-9,
    "rapcsak": 1e-8,
    "projective_pde": 1e-8,
    "curvature": 1e-6,
    "curvature_pde": 1e-8,
    "det_g": 1e-8,
    "fundamental_ad": 1e-9,
    "reversibility": 1e-9,
    "geodesics": 1e-6,
    "conjecture": 1e-8,
}


def _require_profile(metric, check: str) -> None:
    if not isinstance(metric, SphericalMetric):
        raise ConfigError(f"check '{check}' needs a spherically symmetric metric")


def _scan(samples, fn):
    """(max value, worst sample) of fn over the samples, in order."""
    worst = -1.0
    worst_sample = samples[0]
    for s in samples:
        value = fn(s)
        if value > worst:
            worst, worst_sample = value, s
    return worst, worst_sample


def _record(check, metric, samples, worst, worst_sample, tol, detail=None) -> CheckRecord:
    return CheckRecord(
        check=check,
        metric=metric.name,
        samples=len(samples),
        max_residual=worst,
        tolerance=tol,
        passed=worst <= tol,
        worst_x=list(worst_sample.x) if worst_sample is not None else None,
        worst_y=list(worst_sample.y) if worst_sample is not None else None,
        detail=detail or {},
    )


def check_homogeneity(metric, samples, tol, params):
    _require_profile(metric, "homogeneity")
    worst, at = _scan(samples, lambda s: homogeneity_residual(metric, s.r, s.u, s.v))
    return [_record("homogeneity", metric, samples, worst, at, tol)]


def check_convexity(metric, samples, tol, params):
    _require_profile(metric, "convexity")
    failures = 0
    lemma_holds = 0
    worst_sample = None
    for s in samples:
        rep = convexity_report(metric, s.x, s.y)
        if rep.lemma_ok:
            lemma_holds += 1
        if not rep.direct_pd:
            failures += 1
            if worst_sample is None:
                worst_sample = s
    fraction = failures / len(samples)
    detail = {"lemma_ok_fraction": lemma_holds / len(samples)}
    return [_record("convexity", metric, samples, fraction, worst_sample or samples[0], tol, detail)]


def check_symmetry(metric, samples, tol, params):
    verdict = sym.symmetry_verdict(metric, samples, tolerance=tol)
    detail = {
        "fields_tested": verdict.fields_tested,
        "worst_field": list(verdict.worst_field),
        "conclusion": verdict.conclusion,
    }
    return [
        _record("symmetry", metric, samples, verdict.max_residual, verdict.worst_sample, tol, detail)
    ]


def check_symmetry_tensor(metric, samples, tol, params):
    fields = sym.rotation_fields(len(samples[0].x))
    worst, at = _scan(
        samples, lambda s: sym.killing_tensor_max_residual(metric, s.x, s.y, fields)
    )
    return [_record("symmetry_tensor", metric, samples, worst, at, tol)]


def check_cartan(metric, samples, tol, params):
    worst, at = _scan(samples, lambda s: sym.cartan_y_contraction_residual(metric, s.x, s.y))
    return [_record("cartan", metric, samples, worst, at, tol)]


def check_rapcsak(metric, samples, tol, params):
    worst, at = _scan(samples, lambda s: float(proj.rapcsak_residual(metric, s.x, s.y).max()))
    return [_record("rapcsak", metric, samples, worst, at, tol)]


def check_projective_pde(metric, samples, tol, params):
    _require_profile(metric, "projective_pde")
    worst, at = _scan(samples, lambda s: max(proj.projective_pde_residuals(metric, s.r, s.u, s.v)))
    return [_record("projective_pde", metric, samples, worst, at, tol)]


def check_curvature(metric, samples, tol, params, pde_tol):
    _require_profile(metric, "curvature")
    hypothesis = params.get("lambda")
    verdict = proj.constant_curvature_verdict(
        metric, samples, lambda_hypothesis=hypothesis, tolerance=tol
    )
    if verdict.status == "not_projective":
        detail = {"status": verdict.status, "projectivity_residual": verdict.projectivity_residual}
        rec = CheckRecord(
            check="curvature",
            metric=metric.name,
            samples=len(samples),
            max_residual=verdict.projectivity_residual,
            tolerance=tol,
            passed=False,
            detail=detail,
        )
        return [rec]
    deviation = verdict.max_deviation
    if hypothesis is not None:
        deviation = max(deviation, abs(verdict.lambda_estimate - hypothesis))
    detail = {
        "status": verdict.status,
        "lambda_estimate": verdict.lambda_estimate,
        "max_deviation": verdict.max_deviation,
    }
    if hypothesis is not None:
        detail["lambda_hypothesis"] = hypothesis
    worst = verdict.worst_sample
    records = [
        CheckRecord(
            check="curvature",
            metric=metric.name,
            samples=len(samples),
            max_residual=deviation,
            tolerance=tol,
            passed=verdict.passed,
            worst_x=list(worst.x) if worst is not None else None,
            worst_y=list(worst.y) if worst is not None else None,
            detail=detail,
        ),
        CheckRecord(
            check="curvature_pde",
            metric=metric.name,
            samples=len(samples),
            max_residual=max(verdict.pde_residuals),
            tolerance=pde_tol,
            passed=max(verdict.pde_residuals) <= pde_tol,
            detail={"residual_u": verdict.pde_residuals[0], "residual_v": verdict.pde_residuals[1]},
        ),
    ]
    return records


def check_det_g(metric, samples, tol, params):
    _require_profile(metric, "det_g")

    def fn(s):
        closed = det_g_closed_form(metric, s.x, s.y)
        direct = float(np.linalg.det(fundamental_tensor(metric, s.x, s.y)))
        return relative_residual(closed, -direct)

    worst, at = _scan(samples, fn)
    return [_record("det_g", metric, samples, worst, at, tol)]


def check_fundamental_ad(metric, samples, tol, params):
    _require_profile(metric, "fundamental_ad")

    def fn(s):
        closed = fundamental_tensor(metric, s.x, s.y)
        ad = fundamental_tensor_ad(metric, s.x, s.y)
        scale = float(np.abs(closed).max())
        return float(np.abs(closed - ad).max()) / scale

    worst, at = _scan(samples, fn)
    return [_record("fundamental_ad", metric, samples, worst, at, tol)]


def check_reversibility(metric, samples, tol, params):
    _require_profile(metric, "reversibility")
    worst, at = _scan(samples, lambda s: reversibility_residual(metric, s.r, s.u, s.v))
    return [_record("reversibility", metric, samples, worst, at, tol)]


def check_geodesics(metric, samples, tol, params, dump_dir=None):
    count = int(params.get("count", 20))
    steps = int(params.get("steps", 400))
    horizon = float(params.get("horizon", 0.5))
    count = min(count, len(samples))
    worst = -1.0
    worst_sample = samples[0]
    paths = []
    for s in samples[:count]:
        h = geo.safe_horizon(metric, s.x, s.y, horizon)
        path = geo.integrate_geodesic(metric, s.x, s.y, h, steps)
        paths.append(path)
        deviation = geo.straightness_deviation(path, s.x, s.y)
        if deviation > worst:
            worst, worst_sample = deviation, s
    if dump_dir is not None:
        import os

        os.makedirs(dump_dir, exist_ok=True)
        safe_name = "".join(c if c.isalnum() else "_" for c in metric.name)
        for i, path in enumerate(paths):
            with open(os.path.join(dump_dir, f"{safe_name}_geodesic{i:03d}.csv"), "w") as fh:
                geo.dump_csv(path, fh)
    detail = {"geodesics": count, "steps": steps}
    return [_record("geodesics", metric, samples[:count], worst, worst_sample, tol, detail)]


def _smooth_across_v_zero(metric, samples, delta=1e-6, threshold=1e-3):
    """Is the profile differentiable across <x,y> = 0?

    An even profile can still carry an h(r)|v| term (the reversible family
    metrics built from an integrand do); phi_v then jumps by 2 h(r) across
    v = 0 instead of varying like 2 delta phi_vv.  The conjectured statement
    assumes smooth metrics, so kinked ones must not be probed against it.
    """
    for s in samples[: min(4, len(samples))]:
        up = metric.phi_jet(s.r, s.u, delta, 1)
        down = metric.phi_jet(s.r, s.u, -delta, 1)
        jump = abs(up.partial(2) - down.partial(2))
        scale = abs(up.partial(1)) + abs(up.partial(2))
        if jump > threshold * scale:
            return False
    return True


def check_conjecture(metric, samples, tol, params, curvature_tol):
    """Reversibility + constant curvature + Riemannian probe, reported together.

    The probe can only be consistent or inconsistent with the expectation
    that reversible projective metrics of constant flag curvature are
    Riemannian; it proves nothing either way.
    """
    _require_profile(metric, "conjecture")
    rev_worst, rev_at = _scan(samples, lambda s: reversibility_residual(metric, s.r, s.u, s.v))
    reversible = rev_worst <= 1e-9
    detail: dict = {"reversible": reversible, "reversibility_residual": rev_worst}
    passed = True
    probe_max = 0.0
    if not reversible:
        detail["conclusion"] = "consistent: not reversible, no claim applies"
    else:
        verdict = proj.constant_curvature_verdict(metric, samples, tolerance=curvature_tol)
        detail["constant_curvature"] = verdict.passed
        if verdict.lambda_estimate is not None:
            detail["lambda_estimate"] = verdict.lambda_estimate
        if not verdict.passed:
            detail["conclusion"] = (
                "consistent: curvature is not constant, no claim applies"
            )
        elif not _smooth_across_v_zero(metric, samples):
            detail["smooth_across_v_zero"] = False
            detail["conclusion"] = (
                "consistent: profile has a |<x,y>| kink, so the smooth-metric "
                "claim does not apply"
            )
        else:
            xs = samples[: min(8, len(samples))]
            ys = [s.y for s in samples[: min(6, len(samples))]]
            probes = [riemannian_probe(metric, s.x, ys) for s in xs]
            probe_max = max(max(p.g_deviation, p.cartan_max) for p in probes)
            riemannian = probe_max <= tol
            detail["riemannian"] = riemannian
            detail["probe_deviation"] = probe_max
            if riemannian:
                detail["conclusion"] = (
                    "consistent: reversible, constant curvature, and Riemannian"
                )
            else:
                passed = False
                detail["conclusion"] = (
                    "inconsistent: reversible constant-curvature metric "
                    "with y-dependent fundamental tensor"
                )
    rec = CheckRecord(
        check="conjecture",
        metric=metric.name,
        samples=len(samples),
        max_residual=probe_max,
        tolerance=tol,
        passed=passed,
        worst_x=list(rev_at.x),
        worst_y=list(rev_at.y),
        detail=detail,
    )
    return [rec]


CHECK_NAMES = sorted(DEFAULT_TOLERANCES)


def run_check(name, metric, samples, params, tolerances, dump_dir=None):
    tol = tolerances.get(name, DEFAULT_TOLERANCES.get(name))
    if name == "homogeneity":
        return check_homogeneity(metric, samples, tol, params)
    if name == "convexity":
        return check_convexity(metric, samples, tol, params)
    if name == "symmetry":
        return check_symmetry(metric, samples, tol, params)
    if name == "symmetry_tensor":
        return check_symmetry_tensor(metric, samples, tol, params)
    if name == "cartan":
        return check_cartan(metric, samples, tol, params)
    if name == "rapcsak":
        return check_rapcsak(metric, samples, tol, params)
    if name == "projective_pde":
        return check_projective_pde(metric, samples, tol, params)
    if name == "curvature":
        pde_tol = tolerances.get("curvature_pde", DEFAULT_TOLERANCES["curvature_pde"])
        return check_curvature(metric, samples, tol, params, pde_tol)
    if name == "det_g":
        return check_det_g(metric, samples, tol, params)
    if name == "fundamental_ad":
        return check_fundamental_ad(metric, samples, tol, params)
    if name == "reversibility":
        return check_reversibility(metric, samples, tol, params)
    if name == "geodesics":
        return check_geodesics(metric, samples, tol, params, dump_dir=dump_dir)
    if name == "conjecture":
        curvature_tol = tolerances.get("curvature", DEFAULT_TOLERANCES["curvature"])
        return check_conjecture(metric, samples, tol, params, curvature_tol)
    raise ConfigError(f"unknown check '{name}'")
