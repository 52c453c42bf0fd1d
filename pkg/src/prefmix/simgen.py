"""Simulated drug-choice data with known heterogeneous preferences.

Each simulated person draws one taste vector from the true distributions
(tastes vary across persons, not tasks), then answers choice tasks over two
branded and two unbranded alternatives described by country of production,
drug characteristic, side-effect risk, and price. Choices come from MNL
probabilities inverted against a uniform draw.

The default true distributions are implementation-defined constants chosen to
exercise multimodality (branded), skew with a sign constraint (price), and
bounded asymmetric support (risk); the truth table and analytic truth
densities are exported next to the dataset so recovery can be scored.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .data import STATED_PANEL, ChoiceDataset, CodingPlan, CodingRule, PanelPerson, Task
from .errors import InvalidLevels
from .mixing import at_inverse_cdf
from .postest import DensityGrid, grid_from_pdf

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _normal_pdf(x, mean, sd):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return np.exp(-0.5 * z * z) / (sd * _SQRT2PI)


@dataclass(frozen=True)
class TruthDist:
    """One true coefficient distribution: family name plus parameters.

    Families: fixed(value) | normal(mean, sd) | uniform(lo, hi) |
    lognormal_neg(mu, sigma) | at(a, b, c) | normal_mixture(w..., mean..., sd...)
    """

    family: str
    params: tuple

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        f, p = self.family, self.params
        if f == "fixed":
            return np.full(n, p[0])
        if f == "normal":
            return p[0] + p[1] * rng.standard_normal(n)
        if f == "uniform":
            return rng.uniform(p[0], p[1], n)
        if f == "lognormal_neg":
            return -np.exp(p[0] + p[1] * rng.standard_normal(n))
        if f == "at":
            return at_inverse_cdf(p[0], p[1], p[2], rng.random(n))
        if f == "normal_mixture":
            weights, means, sds = self._mixture()
            comp = rng.choice(len(weights), size=n, p=weights)
            return means[comp] + sds[comp] * rng.standard_normal(n)
        raise InvalidLevels(f"unknown truth family {f!r}")

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        f, p = self.family, self.params
        if f == "normal":
            return _normal_pdf(x, p[0], p[1])
        if f == "uniform":
            lo, hi = p
            return np.where((x >= lo) & (x <= hi), 1.0 / (hi - lo), 0.0)
        if f == "lognormal_neg":
            mu, sigma = p
            out = np.zeros_like(x)
            neg = x < 0
            z = (np.log(-x[neg]) - mu) / sigma
            out[neg] = np.exp(-0.5 * z * z) / (-x[neg] * sigma * _SQRT2PI)
            return out
        if f == "at":
            a, b, c = p
            mode = (a + b) / 2.0 + c
            up = 2.0 * (x - a) / ((b - a) * (mode - a))
            down = 2.0 * (b - x) / ((b - a) * (b - mode))
            return np.where((x >= a) & (x <= b), np.where(x <= mode, up, down), 0.0)
        if f == "normal_mixture":
            weights, means, sds = self._mixture()
            return sum(w * _normal_pdf(x, m, s) for w, m, s in zip(weights, means, sds))
        raise InvalidLevels(f"no density for truth family {self.family!r}")

    def mean(self) -> float:
        f, p = self.family, self.params
        if f == "fixed":
            return p[0]
        if f == "normal":
            return p[0]
        if f == "uniform":
            return (p[0] + p[1]) / 2.0
        if f == "lognormal_neg":
            return -math.exp(p[0] + p[1] ** 2 / 2.0)
        if f == "at":
            a, b, c = p
            return (a + b + (a + b) / 2.0 + c) / 3.0
        if f == "normal_mixture":
            weights, means, _ = self._mixture()
            return float((weights * means).sum())
        raise InvalidLevels(f"unknown truth family {f!r}")

    def grid_range(self) -> tuple[float, float]:
        f, p = self.family, self.params
        if f == "fixed":
            return p[0] - 0.5, p[0] + 0.5
        if f == "normal":
            return p[0] - 4 * p[1], p[0] + 4 * p[1]
        if f == "uniform":
            span = p[1] - p[0]
            return p[0] - 0.05 * span, p[1] + 0.05 * span
        if f == "lognormal_neg":
            mu, sigma = p
            return -math.exp(mu + 3.5 * sigma), -math.exp(mu - 3.5 * sigma)
        if f == "at":
            span = p[1] - p[0]
            return p[0] - 0.05 * span, p[1] + 0.05 * span
        weights, means, sds = self._mixture()
        return float((means - 4 * sds).min()), float((means + 4 * sds).max())

    def _mixture(self):
        k = len(self.params) // 3
        weights = np.array(self.params[:k], dtype=float)
        means = np.array(self.params[k:2 * k], dtype=float)
        sds = np.array(self.params[2 * k:], dtype=float)
        return weights / weights.sum(), means, sds


def default_truth() -> dict:
    """Documented default generating distributions (coded-attribute names)."""
    return {
        "branded": TruthDist("normal_mixture", (0.5, 0.5, -1.0, 1.0, 0.5, 0.5)),
        "country_abroad": TruthDist("uniform", (-0.7, 0.3)),
        "char_fastacting": TruthDist("normal", (0.4, 0.35)),
        "char_doublestrength": TruthDist("normal", (0.7, 0.5)),
        "risk": TruthDist("at", (-0.12, 0.04, -0.02)),
        "price": TruthDist("lognormal_neg", (math.log(0.2), 0.5)),
    }


@dataclass(frozen=True)
class SimConfig:
    n_persons: int = 1000
    n_tasks: int = 10
    seed: int = 42
    labels: tuple = ("branded_a", "branded_b", "generic_a", "generic_b")
    branded_labels: tuple = ("branded_a", "branded_b")
    country_levels: tuple = ("home", "abroad")
    characteristic_levels: tuple = ("standard", "fastacting", "doublestrength")
    risk_levels: tuple = (2.0, 5.0, 10.0, 15.0)
    price_levels: tuple = (2.0, 2.5, 3.0, 3.5, 4.0)
    truths: dict = field(default_factory=default_truth)

    def validate(self):
        if self.n_persons < 1 or self.n_tasks < 1:
            raise InvalidLevels("n_persons and n_tasks must be >= 1")
        for name, levels in (("country", self.country_levels),
                             ("characteristic", self.characteristic_levels),
                             ("risk", self.risk_levels),
                             ("price", self.price_levels)):
            if len(levels) < 1:
                raise InvalidLevels(f"attribute {name!r} has no levels")
        for name in self.coefficient_names():
            if name not in self.truths:
                raise InvalidLevels(f"no true distribution for coefficient {name!r}")

    def coefficient_names(self) -> list:
        names = ["branded"]
        names += [f"country_{lv}" for lv in self.country_levels[1:]]
        names += [f"char_{lv}" for lv in self.characteristic_levels[1:]]
        names += ["risk", "price"]
        return names

    def coding_plan(self) -> CodingPlan:
        return CodingPlan({
            "country": CodingRule("dummy", self.country_levels[0]),
            "char": CodingRule("dummy", self.characteristic_levels[0]),
        })

    def schema(self) -> dict:
        return {"person": "person", "task": "task", "alternative": "alt",
                "chosen": "chosen",
                "attributes": ["branded", "country", "char", "risk", "price"]}


def generate(config: SimConfig) -> tuple[ChoiceDataset, dict, dict]:
    """Simulate the dataset; return (dataset, per-person truth betas, truth grids).

    The returned dataset is the raw (uncoded) long-format panel; estimation
    applies `config.coding_plan()`. The truth table maps coefficient names to
    arrays of the per-person betas actually used to generate choices.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    names = config.coefficient_names()

    betas = {name: config.truths[name].sample(rng, config.n_persons) for name in names}

    country_dummies = list(config.country_levels[1:])
    char_dummies = list(config.characteristic_levels[1:])
    n_alts = len(config.labels)
    branded_flag = np.array([1.0 if lab in config.branded_labels else 0.0
                             for lab in config.labels])

    persons = []
    for p in range(config.n_persons):
        beta = np.array([betas[name][p] for name in names])
        tasks = []
        for _ in range(config.n_tasks):
            country = rng.choice(config.country_levels, size=n_alts)
            char = rng.choice(config.characteristic_levels, size=n_alts)
            risk = rng.choice(config.risk_levels, size=n_alts)
            price = rng.choice(config.price_levels, size=n_alts)

            coded = np.empty((n_alts, len(names)))
            col = 0
            coded[:, col] = branded_flag
            col += 1
            for lv in country_dummies:
                coded[:, col] = (country == lv).astype(float)
                col += 1
            for lv in char_dummies:
                coded[:, col] = (char == lv).astype(float)
                col += 1
            coded[:, col] = risk
            coded[:, col + 1] = price

            v = coded @ beta
            e = np.exp(v - v.max())
            prob = e / e.sum()
            chosen = int(np.searchsorted(np.cumsum(prob), rng.random()))
            chosen = min(chosen, n_alts - 1)

            alts = tuple(
                (config.labels[i],
                 (branded_flag[i], str(country[i]), str(char[i]),
                  float(risk[i]), float(price[i])))
                for i in range(n_alts))
            tasks.append(Task(alternatives=alts, chosen_index=chosen))
        persons.append(PanelPerson(id=str(p + 1), tasks=tuple(tasks)))

    dataset = ChoiceDataset(
        individuals=tuple(persons),
        attribute_names=("branded", "country", "char", "risk", "price"),
        alternative_labels=tuple(config.labels),
        mode=STATED_PANEL,
    )

    grids = {name: truth_grid(config.truths[name]) for name in names
             if config.truths[name].family != "fixed"}
    return dataset, betas, grids


def truth_grid(truth: TruthDist, n_bins: int = 200) -> DensityGrid:
    lo, hi = truth.grid_range()
    return grid_from_pdf(truth.pdf, lo, hi, n_bins)


def write_truth_table(betas: dict, path) -> None:
    names = list(betas)
    n = len(betas[names[0]]) if names else 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["person", *names])
        for i in range(n):
            writer.writerow([i + 1, *(repr(float(betas[name][i])) for name in names)])


def write_truth_grids(grids: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["coefficient", "center", "density", "width"])
        for name, grid in grids.items():
            for center, density, width in zip(grid.centers, grid.density, grid.widths):
                writer.writerow([name, repr(float(center)), repr(float(density)),
                                 repr(float(width))])


def read_truth_grids(path) -> dict:
    rows: dict[str, list] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(row["coefficient"], []).append(
                (float(row["center"]), float(row["density"]), float(row["width"])))
    grids = {}
    for name, entries in rows.items():
        centers = np.array([c for c, _, _ in entries])
        density = np.array([d for _, d, _ in entries])
        widths = np.array([w for _, _, w in entries])
        edges = np.concatenate([centers - widths / 2, [centers[-1] + widths[-1] / 2]])
        grids[name] = DensityGrid(edges=edges, density=density)
    return grids
