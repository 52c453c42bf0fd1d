"""Sequential latent-class model averaging.

Constituent models are fitted separately and frozen; only the K-1 free weight
parameters are estimated here, by maximizing

    LL_MA(theta) = sum_n ln( sum_k pi_k(theta) * P_n^k )

with pi_k the softmax of (0, theta_2, ..., theta_K). The first weight
parameter is pinned to 0 for identification. The interface is label-free: the
weights are estimated from the person-by-model likelihood matrix alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingPersonLikelihoods, NonPositiveLikelihood, PersonSetMismatch
from .estimation import FitResult, MaximizeSettings, maximize


@dataclass
class MAResult:
    model_ids: list
    theta: np.ndarray          # full K vector, theta[0] == 0
    pi: np.ndarray
    ll_ma: float
    aic_conservative: float | None = None
    person_ids: list = field(default_factory=list)
    person_liks: np.ndarray = field(default_factory=lambda: np.empty(0))
    convergence_status: str = "converged"

    @property
    def n_models(self) -> int:
        return len(self.model_ids)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "ma",
            "model_ids": list(self.model_ids),
            "theta": [float(t) for t in self.theta],
            "pi": [float(p) for p in self.pi],
            "ll_ma": float(self.ll_ma),
            "aic_conservative": None if self.aic_conservative is None
            else float(self.aic_conservative),
            "convergence_status": self.convergence_status,
            "person_likelihoods": [[pid, float(p)] for pid, p in
                                   zip(self.person_ids, self.person_liks)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(doc: dict) -> "MAResult":
        people = doc.get("person_likelihoods", [])
        return MAResult(
            model_ids=list(doc["model_ids"]),
            theta=np.array(doc["theta"], dtype=float),
            pi=np.array(doc["pi"], dtype=float),
            ll_ma=doc["ll_ma"],
            aic_conservative=doc.get("aic_conservative"),
            person_ids=[pid for pid, _ in people],
            person_liks=np.array([p for _, p in people], dtype=float),
            convergence_status=doc.get("convergence_status", "converged"),
        )

    @staticmethod
    def from_json(text: str) -> "MAResult":
        return MAResult.from_dict(json.loads(text))


def stack(fits) -> np.ndarray:
    """Person-by-model likelihood matrix from already-fitted models.

    All fits must cover the same persons in the same order; constituent
    parameters are never touched again.
    """
    fits = list(fits)
    if not fits:
        raise MissingPersonLikelihoods("no fits to stack")
    for fit in fits:
        if len(fit.person_liks) == 0:
            raise MissingPersonLikelihoods("fit has no stored person likelihoods")
    first = fits[0].person_ids
    for fit in fits[1:]:
        if fit.person_ids != first:
            raise PersonSetMismatch(
                f"fits cover different persons ({len(first)} vs {len(fit.person_ids)}, "
                "or different ordering)")
    return np.column_stack([fit.person_liks for fit in fits])


def _softmax_weights(theta_free: np.ndarray) -> np.ndarray:
    theta = np.concatenate(([0.0], theta_free))
    e = np.exp(theta - theta.max())
    return e / e.sum()


def estimate_weights(matrix: np.ndarray, model_ids=None, person_ids=None,
                     settings: MaximizeSettings | None = None) -> MAResult:
    """Estimate the averaging weights over a stacked likelihood matrix.

    Starts at theta = 0 (equal weights 1/K); a second run starting near the
    best single constituent guards against flat directions when the optimum
    sits on the boundary of the simplex. Ties keep the equal-weight solution.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] < 2:
        raise NonPositiveLikelihood(
            f"need a person-by-model matrix with K >= 2 columns, got {matrix.shape}")
    if not (matrix > 0.0).all():
        raise NonPositiveLikelihood("all person likelihoods must be strictly positive")

    n, K = matrix.shape
    ids = list(model_ids) if model_ids is not None else [f"model_{k}" for k in range(K)]
    pids = list(person_ids) if person_ids is not None else [str(i) for i in range(n)]

    def objective(theta_free):
        pi = _softmax_weights(np.asarray(theta_free, dtype=float))
        mix = matrix @ pi
        return float(np.log(mix).sum()), mix, 0

    def run(start):
        return maximize(objective, start, settings, n_obs=n, compute_se=False)

    best = run(np.zeros(K - 1))
    column_lls = np.log(matrix).sum(axis=0)
    top = int(np.argmax(column_lls))
    degenerate = np.zeros(K - 1)
    if top == 0:
        degenerate[:] = -40.0
    else:
        degenerate[top - 1] = 40.0
    challenger = run(degenerate)
    if challenger.ll > best.ll:
        best = challenger

    theta_free = best.estimates
    pi = _softmax_weights(theta_free)
    return MAResult(
        model_ids=ids,
        theta=np.concatenate(([0.0], theta_free)),
        pi=pi,
        ll_ma=best.ll,
        person_ids=pids,
        person_liks=np.asarray(best.person_liks, dtype=float),
        convergence_status=best.convergence.status,
    )


def ma_fit_stats(result: MAResult, fits) -> float:
    """Conservative AIC: count every constituent parameter plus the K-1 weights."""
    fits = list(fits)
    k_total = sum(fit.n_params for fit in fits) + (len(fits) - 1)
    aic = 2.0 * k_total - 2.0 * result.ll_ma
    result.aic_conservative = aic
    return aic


def average(fits, model_ids=None, settings: MaximizeSettings | None = None) -> MAResult:
    """stack + estimate_weights + ma_fit_stats in one call."""
    fits = list(fits)
    matrix = stack(fits)
    result = estimate_weights(matrix, model_ids=model_ids,
                              person_ids=fits[0].person_ids, settings=settings)
    ma_fit_stats(result, fits)
    return result
