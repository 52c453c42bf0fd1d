"""Simulated maximum likelihood: optimizer, standard errors, fit statistics.

The maximizer is a quasi-Newton (BFGS) ascent on the log-likelihood with
central finite-difference gradients and a backtracking Armijo line search.
Accepted iterates never decrease the log-likelihood. Convergence is declared
when the gradient max-norm falls below ``gradient_tol`` or the relative
log-likelihood change falls below ``rel_ll_tol``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import data as data_mod
from . import mixing
from .draws import mlhs
from .errors import (
    DegenerateSupport,
    ModeOutOfSupport,
    NoImprovingStep,
    NonFiniteObjectiveAtStart,
)
from .models import (
    ModelSpec,
    ParamLayout,
    PersonLikelihood,
    default_start,
    prepare,
)

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


@dataclass
class MaximizeSettings:
    max_iterations: int = 500
    gradient_tol: float = 1e-6
    rel_ll_tol: float = 1e-9
    multistart: int = 1
    seed: int = 0              # seeds multistart perturbations only
    perturb_scale: float = 0.25


@dataclass
class Convergence:
    status: str                # converged | max_iter | line_search_failure
    gradient_norm: float
    iterations: int
    floored_persons: int = 0


@dataclass
class FitResult:
    """Everything a fitted model reports, including per-person likelihoods."""

    param_names: list
    estimates: np.ndarray
    std_errors: np.ndarray     # nan where unavailable
    ll: float
    aic: float
    bic: float
    n_obs: int
    n_params: int
    convergence: Convergence
    fingerprint: dict
    person_ids: list = field(default_factory=list)
    person_liks: np.ndarray = field(default_factory=lambda: np.empty(0))
    spec: ModelSpec | None = None

    def params(self) -> dict:
        """name -> (estimate, standard error or None)."""
        return {
            name: (float(est), None if np.isnan(se) else float(se))
            for name, est, se in zip(self.param_names, self.estimates, self.std_errors)
        }

    def person_likelihoods(self) -> list:
        return [PersonLikelihood(pid, float(p))
                for pid, p in zip(self.person_ids, self.person_liks)]

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "fit",
            "spec": self.spec.to_dict() if self.spec is not None else None,
            "params": [
                {"name": name, "estimate": float(est),
                 "se": None if np.isnan(se) else float(se)}
                for name, est, se in zip(self.param_names, self.estimates,
                                         self.std_errors)],
            "ll": float(self.ll),
            "aic": float(self.aic),
            "bic": float(self.bic),
            "n_obs": int(self.n_obs),
            "n_params": int(self.n_params),
            "convergence": {
                "status": self.convergence.status,
                "gradient_norm": float(self.convergence.gradient_norm),
                "iterations": int(self.convergence.iterations),
                "floored_persons": int(self.convergence.floored_persons),
            },
            "fingerprint": self.fingerprint,
            "person_likelihoods": [[pid, float(p)] for pid, p in
                                   zip(self.person_ids, self.person_liks)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(doc: dict) -> "FitResult":
        params = doc["params"]
        conv = doc["convergence"]
        people = doc.get("person_likelihoods", [])
        return FitResult(
            param_names=[p["name"] for p in params],
            estimates=np.array([p["estimate"] for p in params], dtype=float),
            std_errors=np.array(
                [np.nan if p["se"] is None else p["se"] for p in params], dtype=float),
            ll=doc["ll"], aic=doc["aic"], bic=doc["bic"],
            n_obs=doc["n_obs"], n_params=doc["n_params"],
            convergence=Convergence(
                status=conv["status"], gradient_norm=conv["gradient_norm"],
                iterations=conv["iterations"],
                floored_persons=conv.get("floored_persons", 0)),
            fingerprint=doc.get("fingerprint", {}),
            person_ids=[pid for pid, _ in people],
            person_liks=np.array([p for _, p in people], dtype=float),
            spec=ModelSpec.from_dict(doc["spec"]) if doc.get("spec") else None,
        )

    @staticmethod
    def from_json(text: str) -> "FitResult":
        return FitResult.from_dict(json.loads(text))


def fit_stats(ll: float, k: int, n_obs: int) -> tuple[float, float]:
    """AIC = 2k - 2LL, BIC = k ln(n_obs) - 2LL."""
    return 2.0 * k - 2.0 * ll, k * float(np.log(n_obs)) - 2.0 * ll


def _fd_steps(theta: np.ndarray) -> np.ndarray:
    return np.maximum(1e-6, 1e-6 * np.abs(theta))


def _normalize(objective):
    """Wrap an objective so it always yields (ll, person_liks, floored)."""
    def call(theta):
        out = objective(theta)
        if isinstance(out, tuple):
            return out if len(out) == 3 else (*out, 0)
        return float(out), None, 0
    return call


def central_gradient(objective, theta: np.ndarray) -> np.ndarray:
    """Central finite-difference gradient, step max(1e-6, 1e-6|theta_i|)."""
    call = _normalize(objective)
    steps = _fd_steps(theta)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += steps[i]
        down[i] -= steps[i]
        grad[i] = (call(up)[0] - call(down)[0]) / (2.0 * steps[i])
    return grad


def _bfgs_ascent(call, start: np.ndarray, settings: MaximizeSettings):
    """One BFGS run. Returns (theta, ll, aux, floored, Convergence)."""
    theta = np.asarray(start, dtype=float).copy()
    ll, aux, floored = call(theta)
    if not np.isfinite(ll):
        raise NonFiniteObjectiveAtStart(f"objective not finite at start: {ll}")

    k = theta.size
    grad = central_gradient(lambda t: call(t)[0], theta)
    b_inv = np.eye(k)
    status = "max_iter"
    iterations = 0

    for _ in range(settings.max_iterations):
        gnorm = float(np.max(np.abs(grad))) if k else 0.0
        if gnorm < settings.gradient_tol:
            status = "converged"
            break

        direction = b_inv @ grad          # ascent direction
        slope = float(direction @ grad)
        if slope <= 0.0:                  # curvature gone bad; restart from steepest
            b_inv = np.eye(k)
            direction = grad.copy()
            slope = float(grad @ grad)

        alpha, accepted = 1.0, False
        for _ in range(_MAX_BACKTRACKS):
            candidate = theta + alpha * direction
            ll_new, aux_new, floored_new = call(candidate)
            if np.isfinite(ll_new) and ll_new >= ll + _ARMIJO_C1 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if iterations == 0:
                raise NoImprovingStep("no improving step from the starting point")
            status = "line_search_failure"
            break

        grad_new = central_gradient(lambda t: call(t)[0], candidate)
        step = candidate - theta
        y = grad_new - grad               # gradient change of the ascent problem
        sy = float(step @ -y)             # curvature of the minimization problem
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(y):
            rho = 1.0 / sy
            outer = np.outer(step, -y)
            b_inv = ((np.eye(k) - rho * outer) @ b_inv @ (np.eye(k) - rho * outer.T)
                     + rho * np.outer(step, step))

        improvement = ll_new - ll
        theta, ll, aux, floored, grad = candidate, ll_new, aux_new, floored_new, grad_new
        iterations += 1
        if improvement <= settings.rel_ll_tol * max(1.0, abs(ll)):
            status = "converged"
            break
    else:
        status = "max_iter"

    gnorm = float(np.max(np.abs(grad))) if k else 0.0
    return theta, ll, aux, floored, Convergence(status, gnorm, iterations, floored)


def std_errors(objective, theta_hat) -> np.ndarray:
    """Standard errors from the central finite-difference Hessian of the LL.

    Returns nan for parameters whose curvature is degenerate (flat directions,
    non-invertible Hessian) instead of failing the fit.
    """
    call = _normalize(objective)
    theta_hat = np.asarray(theta_hat, dtype=float)
    k = theta_hat.size
    h = np.maximum(1e-4, 1e-4 * np.abs(theta_hat))
    f0 = call(theta_hat)[0]

    def at(offsets):
        point = theta_hat.copy()
        for i, d in offsets:
            point[i] += d
        return call(point)[0]

    hessian = np.empty((k, k))
    for i in range(k):
        hessian[i, i] = (at([(i, h[i])]) - 2.0 * f0 + at([(i, -h[i])])) / h[i] ** 2
        for j in range(i + 1, k):
            hessian[i, j] = hessian[j, i] = (
                at([(i, h[i]), (j, h[j])]) - at([(i, h[i]), (j, -h[j])])
                - at([(i, -h[i]), (j, h[j])]) + at([(i, -h[i]), (j, -h[j])])
            ) / (4.0 * h[i] * h[j])

    out = np.full(k, np.nan)
    scale = max(np.max(np.abs(hessian)), 1.0)
    keep = [i for i in range(k) if np.max(np.abs(hessian[i])) > 1e-10 * scale]
    if not keep:
        return out
    sub = -hessian[np.ix_(keep, keep)]
    try:
        cov = np.linalg.inv(sub)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(sub)
    diag = np.diag(cov)
    for idx, i in enumerate(keep):
        if diag[idx] > 0.0:
            out[i] = float(np.sqrt(diag[idx]))
    return out


def maximize(objective, start, settings: MaximizeSettings | None = None, *,
             param_names=None, n_obs: int = 1, fingerprint=None,
             person_ids=None, spec: ModelSpec | None = None,
             compute_se: bool = True) -> FitResult:
    """Maximize a log-likelihood and assemble a FitResult.

    ``objective`` maps a parameter vector to the LL, optionally returning
    (LL, per-person likelihoods, floored count). With ``multistart`` > 1,
    additional runs start from seeded perturbations of ``start`` and the best
    final LL wins.
    """
    settings = settings or MaximizeSettings()
    call = _normalize(objective)
    start = np.asarray(start, dtype=float)

    best = _bfgs_ascent(call, start, settings)
    rng = np.random.default_rng(settings.seed)
    for _ in range(settings.multistart - 1):
        perturbed = start + settings.perturb_scale * rng.standard_normal(start.size)
        try:
            candidate = _bfgs_ascent(call, perturbed, settings)
        except (NonFiniteObjectiveAtStart, NoImprovingStep):
            continue
        if candidate[1] > best[1]:
            best = candidate

    theta, ll, aux, floored, convergence = best
    k = theta.size
    se = std_errors(call, theta) if (compute_se and k) else np.full(k, np.nan)
    aic, bic = fit_stats(ll, k, n_obs)

    names = list(param_names) if param_names is not None else [f"p{i}" for i in range(k)]
    ids = list(person_ids) if person_ids is not None else []
    liks = np.asarray(aux, dtype=float) if aux is not None else np.empty(0)
    return FitResult(
        param_names=names, estimates=theta, std_errors=se,
        ll=ll, aic=aic, bic=bic, n_obs=n_obs, n_params=k,
        convergence=convergence, fingerprint=fingerprint or {},
        person_ids=ids, person_liks=liks, spec=spec)


# ---------------------------------------------------------------------------
# model-level fitting front end
# ---------------------------------------------------------------------------

def _mnl_variant(spec: ModelSpec) -> ModelSpec:
    """All-fixed version of a preference-space spec, for warm starts."""
    fixed = tuple(replace(c, family=mixing.FIXED, sign_flip=False)
                  for c in spec.coefficients)
    return replace(spec, coefficients=fixed)


def fit_model(spec: ModelSpec, dataset: data_mod.ChoiceDataset, *,
              n_draws: int = 500, draw_seed: int = 1,
              settings: MaximizeSettings | None = None,
              warm_start: bool = False, start=None,
              compute_se: bool = True) -> FitResult:
    """Estimate one model: generate draws, optimize, attach fit statistics.

    The same draw block is reused across all optimizer iterations, so the
    simulated likelihood is smooth in the parameters. ``warm_start`` first
    fits the all-fixed (MNL) variant and initializes location parameters at
    its estimates (preference-space panels only).
    """
    layout = ParamLayout.build(spec)
    block = mlhs(dataset.n_persons, n_draws, layout.n_dims, draw_seed) \
        if layout.n_dims > 0 else None
    prepared = prepare(spec, dataset, block)

    def objective(theta):
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                return prepared.loglik(theta)
        except (DegenerateSupport, ModeOutOfSupport):
            return -np.inf, None, 0

    if start is None:
        warm = None
        if warm_start and spec.space == "preference" and spec.rp is None:
            mnl_spec = _mnl_variant(spec)
            mnl = fit_model(mnl_spec, dataset, n_draws=1, draw_seed=draw_seed,
                            settings=settings, warm_start=False, compute_se=False)
            warm = {c.name: est for c, est in zip(mnl_spec.coefficients, mnl.estimates)}
        start = default_start(spec, warm)

    fingerprint = {"seed": draw_seed, "n_draws": n_draws, "families": spec.families()}
    return maximize(
        objective, start, settings,
        param_names=layout.names, n_obs=prepared.n_obs, fingerprint=fingerprint,
        person_ids=list(prepared.person_ids),
        spec=spec, compute_se=compute_se)
