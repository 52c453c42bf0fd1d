"""Post-estimation outputs: predicted shares, unconditionals, WTP, densities.

All operations are pure functions of a fitted model (or model average) and
are seeded where they sample, so pipeline outputs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri

from . import data as data_mod
from . import mixing
from .draws import STD_NORMAL, UNIFORM01, mlhs
from .errors import ConstituentMismatch, GridMismatch, NotWTPSpace, SpecDataMismatch
from .estimation import FitResult
from .models import WTP, ParamLayout, PreparedRP, prepare


@dataclass(frozen=True)
class UnconditionalDraws:
    """Sampled population coefficient values, keyed by coefficient name."""

    samples: dict
    source: str            # "fit" or "ma"
    n_samples: int


@dataclass(frozen=True)
class WTPRow:
    name: str
    mean: float
    lower: float
    upper: float

    @property
    def mean_mrs(self) -> float:
        return -self.mean

    @property
    def lower_mrs(self) -> float:
        return -self.upper

    @property
    def upper_mrs(self) -> float:
        return -self.lower


@dataclass(frozen=True)
class WTPSummary:
    """Per-attribute WTP means and 95% CIs, in both sign conventions.

    `mean` is the coefficient as it enters the money-metric utility bracket;
    `mean_mrs` is its negative, the marginal rate of substitution against
    price. Both are reported because either convention is found in use.
    """

    rows: list


@dataclass(frozen=True)
class DensityGrid:
    """Piecewise-constant density: edges has one more entry than density."""

    edges: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        edges, density = np.asarray(self.edges), np.asarray(self.density)
        if edges.ndim != 1 or density.ndim != 1 or edges.size != density.size + 1:
            raise GridMismatch(
                f"bad grid shapes: {edges.shape} edges, {density.shape} densities")
        if not (np.diff(edges) > 0).all():
            raise GridMismatch("grid edges must be strictly increasing")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def integral(self) -> float:
        return float((self.density * self.widths).sum())


# ---------------------------------------------------------------------------
# predicted shares (sample enumeration)
# ---------------------------------------------------------------------------

def predict_shares(fit: FitResult, dataset: data_mod.ChoiceDataset) -> dict:
    """Average simulated choice probabilities by alternative label.

    Draws are regenerated from the fit's settings fingerprint, so shares are
    reproducible from the artifact alone. For RP fits the result holds each
    outcome's probability alongside its complement (``no_<label>``).
    """
    if fit.spec is None:
        raise SpecDataMismatch("fit artifact carries no model spec")
    layout = ParamLayout.build(fit.spec)
    fp = fit.fingerprint
    block = mlhs(dataset.n_persons, fp.get("n_draws", 1), layout.n_dims,
                 fp.get("seed", 1)) if layout.n_dims > 0 else None
    prepared = prepare(fit.spec, dataset, block)
    theta = fit.estimates

    if isinstance(prepared, PreparedRP):
        shares = {}
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if layout.rho_dim is not None and prepared.normal is not None:
                rho = theta[layout.sigma_rho_index] * prepared.normal.dims(
                    layout.rho_dim, 1)[:, :, 0]
            else:
                rho = np.zeros((prepared.n_persons, prepared.n_draws))
            for outcome, (_, cols) in zip(fit.spec.rp.outcomes, prepared.outcomes):
                v = rho.copy()
                for coef_name, column in cols:
                    coef = fit.spec.coefficient(coef_name)
                    v += prepared._realize(coef, theta) * column[:, None]
                p = float(expit(v).mean())
                shares[outcome.label] = p
                shares[f"no_{outcome.label}"] = 1.0 - p
        return shares

    index = prepared.index
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = prepared.utilities(theta)
        rect = index.rect_shape
        if rect is not None:
            _, _, J = rect
            v3 = v.reshape(index.n_tasks, J, prepared.n_draws)
            vmax = v3.max(axis=1)
            expv = np.exp(v3 - vmax[:, None, :])
            prob = (expv / expv.sum(axis=1, keepdims=True)).reshape(
                index.n_rows, prepared.n_draws)
        else:
            starts = index.task_starts
            vmax = np.maximum.reduceat(v, starts, axis=0)
            expv = np.exp(v - np.repeat(vmax, index.task_sizes, axis=0))
            sums = np.add.reduceat(expv, starts, axis=0)
            prob = expv / np.repeat(sums, index.task_sizes, axis=0)
    row_mean = prob.mean(axis=1)
    shares = {}
    for k, label in enumerate(index.alternative_labels):
        shares[label] = float(row_mean[index.row_label == k].sum() / index.n_tasks)
    return shares


def ma_shares(ma, constituent_shares) -> dict:
    """Weight-averaged shares: the MA choice probability is the pi-mixture."""
    out: dict = {}
    for weight, shares in zip(ma.pi, constituent_shares):
        for label, value in shares.items():
            out[label] = out.get(label, 0.0) + float(weight) * value
    return out


# ---------------------------------------------------------------------------
# unconditionals
# ---------------------------------------------------------------------------

def _sample_coefficient(coef: mixing.MixingSpec, params, rng, n_samples: int) -> np.ndarray:
    dims = max(mixing.draw_dims(coef.family), 1)
    u = rng.random((n_samples, dims))
    kind = mixing.draw_kind(coef.family)
    if kind is None:
        kind, values = UNIFORM01, u
    elif kind == STD_NORMAL:
        values = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    else:
        values = u
    return mixing.realize(coef, params, values, kind)


def sample_unconditionals(fit: FitResult, n_samples: int, seed: int) -> UnconditionalDraws:
    """Fresh pseudo-random draws pushed through each coefficient at the estimates."""
    if fit.spec is None:
        raise SpecDataMismatch("fit artifact carries no model spec")
    layout = ParamLayout.build(fit.spec)
    rng = np.random.default_rng(seed)
    samples = {}
    for coef in fit.spec.coefficients:
        params = fit.estimates[layout.slices[coef.name]]
        samples[coef.name] = _sample_coefficient(coef, params, rng, n_samples)
    return UnconditionalDraws(samples=samples, source="fit", n_samples=n_samples)


def sample_ma_unconditionals(ma, fits, n_samples: int, seed: int) -> UnconditionalDraws:
    """Mixture unconditionals: pick a constituent with probability pi_k, then draw."""
    fits = list(fits)
    if len(fits) != ma.n_models:
        raise ConstituentMismatch(
            f"model average references {ma.n_models} fits, got {len(fits)}")
    names = None
    for fit in fits:
        if fit.spec is None:
            raise ConstituentMismatch("constituent fit carries no model spec")
        coef_names = [c.name for c in fit.spec.coefficients]
        if names is None:
            names = coef_names
        elif coef_names != names:
            raise ConstituentMismatch(
                f"constituents disagree on coefficients: {names} vs {coef_names}")

    rng = np.random.default_rng(seed)
    picks = rng.choice(ma.n_models, size=n_samples, p=ma.pi / ma.pi.sum())
    samples = {name: np.empty(n_samples) for name in names}
    for k, fit in enumerate(fits):
        where = np.flatnonzero(picks == k)
        if where.size == 0:
            continue
        part = sample_unconditionals(fit, where.size, int(rng.integers(2 ** 31)))
        for name in names:
            samples[name][where] = part.samples[name]
    return UnconditionalDraws(samples=samples, source="ma", n_samples=n_samples)


# ---------------------------------------------------------------------------
# WTP summaries
# ---------------------------------------------------------------------------

# families whose population mean is itself a single estimated parameter
_SINGLE_MEAN_PARAM = {mixing.FIXED: 0, mixing.NORMAL: 0}


def wtp_summary(fit: FitResult, n_redraws: int = 200, seed: int = 0) -> WTPSummary:
    """Mean WTP and 95% CI per money-metric coefficient of a WTP-space fit.

    Where the mean is a single parameter (fixed, normal location) the CI is
    estimate +/- 1.96 se; otherwise the analytic mean is re-evaluated over
    parametric re-draws of the estimates (diagonal covariance) and the CI
    taken from the 2.5/97.5 percentiles.
    """
    if fit.spec is None or fit.spec.space != WTP:
        raise NotWTPSpace("WTP summaries require a fit estimated in WTP space")
    layout = ParamLayout.build(fit.spec)
    rng = np.random.default_rng(seed)
    rows = []
    for coef in fit.spec.coefficients:
        if coef.name == fit.spec.price_coefficient:
            continue
        sl = layout.slices[coef.name]
        params = fit.estimates[sl]
        se = fit.std_errors[sl]
        mean, _ = mixing.analytic_moments(coef, params)
        if coef.family in _SINGLE_MEAN_PARAM:
            pos = _SINGLE_MEAN_PARAM[coef.family]
            half = 1.96 * se[pos] if np.isfinite(se[pos]) else np.nan
            sign = -1.0 if coef.sign_flip else 1.0
            lo, hi = sorted((sign * (params[pos] - half), sign * (params[pos] + half)))
        else:
            spread = np.where(np.isfinite(se), se, 0.0)
            means = np.empty(n_redraws)
            for j in range(n_redraws):
                redraw = params + spread * rng.standard_normal(params.size)
                means[j], _ = mixing.analytic_moments(coef, redraw)
            lo, hi = np.percentile(means, [2.5, 97.5])
        if np.isfinite(lo) and np.isfinite(hi):
            lo, hi = min(lo, mean), max(hi, mean)
        rows.append(WTPRow(name=coef.name, mean=float(mean),
                           lower=float(lo), upper=float(hi)))
    return WTPSummary(rows=rows)


# ---------------------------------------------------------------------------
# density grids and recovery
# ---------------------------------------------------------------------------

def _histogram(values: np.ndarray, n_bins: int) -> DensityGrid:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        # degenerate sample: report a single spike bin of unit mass
        half = max(abs(lo) * 1e-9, 1e-9)
        return DensityGrid(edges=np.array([lo - half, lo + half]),
                           density=np.array([0.5 / half]))
    pad = 0.05 * (hi - lo)
    density, edges = np.histogram(values, bins=n_bins, range=(lo - pad, hi + pad),
                                  density=True)
    return DensityGrid(edges=edges, density=density)


def density_grid(draws: UnconditionalDraws, n_bins: int = 100) -> dict:
    """Normalized histogram per coefficient; bin range pads the sample range 5%."""
    if n_bins < 2:
        raise GridMismatch(f"need at least 2 bins, got {n_bins}")
    return {name: _histogram(np.asarray(values, dtype=float), n_bins)
            for name, values in draws.samples.items()}


def grid_from_pdf(pdf, lo: float, hi: float, n_bins: int = 200) -> DensityGrid:
    """Evaluate a pdf at bin centers and normalize the result to unit mass."""
    edges = np.linspace(lo, hi, n_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = np.asarray(pdf(centers), dtype=float)
    mass = (density * np.diff(edges)).sum()
    if mass <= 0:
        raise GridMismatch("pdf has no mass on the requested range")
    return DensityGrid(edges=edges, density=density / mass)


def recovery_score(estimated: DensityGrid, truth: DensityGrid) -> float:
    """Exact L1 distance between two piecewise-constant densities.

    Integrates |f_est - f_truth| over the union of both supports (each density
    is zero outside its own grid), so two disjoint unit-mass grids score 2.
    """
    breaks = np.unique(np.concatenate([estimated.edges, truth.edges]))

    def value_on(grid: DensityGrid, left: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(grid.edges, left, side="right") - 1
        inside = (idx >= 0) & (idx < grid.density.size)
        out = np.zeros(left.size)
        out[inside] = grid.density[idx[inside]]
        return out

    lefts = breaks[:-1]
    widths = np.diff(breaks)
    diff = np.abs(value_on(estimated, lefts) - value_on(truth, lefts))
    return float((diff * widths).sum())
