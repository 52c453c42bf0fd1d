"""Utility specifications and simulated choice-model likelihoods.

A `ModelSpec` declares utility rows (attribute terms plus alternative-specific
constants), one mixing family per coefficient, and the estimation space. The
likelihood engines evaluate, for every person and draw, the panel product of
chosen-alternative logit probabilities, then average over draws:

    P_n = mean_r  prod_t  P(chosen | V(beta_nr))
    LL  = sum_n ln P_n          (P_n floored at 1e-300)

`prepare_panel` / `prepare_rp` build vectorized evaluators reused across
optimizer iterations; `mixed_panel_ll` and `rp_pair_ll` are one-shot wrappers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import data as data_mod
from . import mixing
from .draws import STD_NORMAL, UNIFORM01, DrawBlock, to_std_normal
from .errors import (
    DrawDimensionMismatch,
    MissingCoefficient,
    MissingIndicator,
    NonNumericAttribute,
    SpecDataMismatch,
)

PREFERENCE = "preference"
WTP = "wtp"

PROB_FLOOR = 1e-300

# families whose realizations carry a sign constraint, as WTP space requires
# of its price coefficient
_SIGNED_FAMILIES = {mixing.LOGNORMAL, mixing.LOGUNIFORM}


@dataclass(frozen=True)
class UtilityTerm:
    coefficient: str
    attribute: str


@dataclass(frozen=True)
class AscTerm:
    coefficient: str
    alternative: str


@dataclass(frozen=True)
class RPOutcome:
    """One binary outcome of the revealed-preference pair."""

    label: str
    indicator: str  # covariate holding the observed 0/1 outcome
    asc: str | None = None
    terms: tuple = ()  # UtilityTerm with attribute = covariate name


@dataclass(frozen=True)
class RPBlock:
    outcomes: tuple
    sigma_rho: str = "sigma_rho"


@dataclass(frozen=True)
class PersonLikelihood:
    id: str
    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"person likelihood must lie in (0, 1], got {self.p}")


@dataclass(frozen=True)
class ModelSpec:
    coefficients: tuple  # MixingSpec, in parameter-packing order
    terms: tuple = ()
    ascs: tuple = ()
    space: str = PREFERENCE
    price_coefficient: str | None = None
    price_attribute: str | None = None
    rp: RPBlock | None = None

    def __post_init__(self):
        names = [c.name for c in self.coefficients]
        if len(set(names)) != len(names):
            raise MissingCoefficient(f"duplicate coefficient names in {names}")
        known = set(names)
        referenced = [t.coefficient for t in self.terms] + [a.coefficient for a in self.ascs]
        if self.rp is not None:
            for outcome in self.rp.outcomes:
                referenced.extend(t.coefficient for t in outcome.terms)
                if outcome.asc is not None:
                    referenced.append(outcome.asc)
        for name in referenced:
            if name not in known:
                raise MissingCoefficient(f"utility references {name!r} with no mixing spec")
        if self.space == WTP:
            if self.price_coefficient is None or self.price_attribute is None:
                raise MissingCoefficient("wtp space needs price_coefficient and price_attribute")
            price = self.coefficient(self.price_coefficient)
            if price.family not in _SIGNED_FAMILIES:
                raise MissingCoefficient(
                    "wtp space needs a mixed, sign-constrained price coefficient "
                    f"(lognormal or loguniform), got {price.family!r}")

    def coefficient(self, name: str) -> mixing.MixingSpec:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise MissingCoefficient(f"no mixing spec for coefficient {name!r}")

    def families(self) -> dict:
        return {c.name: c.family for c in self.coefficients}

    def to_dict(self) -> dict:
        spec = {
            "schema_version": 1,
            "space": self.space,
            "coefficients": [
                {"name": c.name, "family": c.family, "sign_flip": c.sign_flip,
                 "pin_c_zero": c.pin_c_zero}
                for c in self.coefficients],
            "terms": [{"coefficient": t.coefficient, "attribute": t.attribute}
                      for t in self.terms],
            "ascs": [{"coefficient": a.coefficient, "alternative": a.alternative}
                     for a in self.ascs],
        }
        if self.space == WTP:
            spec["price"] = {"coefficient": self.price_coefficient,
                             "attribute": self.price_attribute}
        if self.rp is not None:
            spec["rp"] = {
                "sigma_rho": self.rp.sigma_rho,
                "outcomes": [
                    {"label": o.label, "indicator": o.indicator, "asc": o.asc,
                     "terms": [{"coefficient": t.coefficient, "attribute": t.attribute}
                               for t in o.terms]}
                    for o in self.rp.outcomes],
            }
        return spec

    @staticmethod
    def from_dict(spec: dict) -> "ModelSpec":
        coeffs = tuple(
            mixing.MixingSpec(
                name=c["name"], family=c["family"],
                sign_flip=bool(c.get("sign_flip", False)),
                pin_c_zero=bool(c.get("pin_c_zero", True)))
            for c in spec.get("coefficients", []))
        terms = tuple(UtilityTerm(t["coefficient"], t["attribute"])
                      for t in spec.get("terms", []))
        ascs = tuple(AscTerm(a["coefficient"], a["alternative"])
                     for a in spec.get("ascs", []))
        price = spec.get("price", {})
        rp = None
        if "rp" in spec:
            rp = RPBlock(
                outcomes=tuple(
                    RPOutcome(label=o["label"], indicator=o["indicator"],
                              asc=o.get("asc"),
                              terms=tuple(UtilityTerm(t["coefficient"], t["attribute"])
                                          for t in o.get("terms", [])))
                    for o in spec["rp"]["outcomes"]),
                sigma_rho=spec["rp"].get("sigma_rho", "sigma_rho"))
        return ModelSpec(
            coefficients=coeffs, terms=terms, ascs=ascs,
            space=spec.get("space", PREFERENCE),
            price_coefficient=price.get("coefficient"),
            price_attribute=price.get("attribute"),
            rp=rp)


@dataclass
class ParamLayout:
    """Packing of the structural parameter vector and draw dimensions."""

    names: list
    slices: dict          # coefficient name -> slice into theta
    dim_offsets: dict     # coefficient name -> first reserved draw dimension
    n_dims: int
    rho_dim: int | None = None
    sigma_rho_index: int | None = None

    @property
    def n_params(self) -> int:
        return len(self.names)

    @staticmethod
    def build(spec: ModelSpec) -> "ParamLayout":
        names: list[str] = []
        slices: dict[str, slice] = {}
        dim_offsets: dict[str, int] = {}
        dim = 0
        for coef in spec.coefficients:
            lo = len(names)
            names.extend(f"{coef.name}:{label}" for label in coef.free_labels())
            slices[coef.name] = slice(lo, len(names))
            dim_offsets[coef.name] = dim
            dim += mixing.draw_dims(coef.family)
        rho_dim = None
        sigma_rho_index = None
        if spec.rp is not None:
            sigma_rho_index = len(names)
            names.append(spec.rp.sigma_rho)
            rho_dim = dim
            dim += 1
        return ParamLayout(names=names, slices=slices, dim_offsets=dim_offsets,
                           n_dims=dim, rho_dim=rho_dim, sigma_rho_index=sigma_rho_index)


_DEFAULT_STARTS = {
    mixing.FIXED: (0.0,),
    mixing.NORMAL: (0.0, 0.1),
    mixing.UNIFORM: (-0.05, 0.1),
    mixing.TRIANGULAR: (-0.1, 0.1),
    mixing.LOGNORMAL: (float(np.log(0.5)), 0.1),
    mixing.LOGUNIFORM: (float(np.log(0.5)) - 0.05, 0.1),
    mixing.AT: (-0.1, 0.1, 0.0),
    mixing.FM2: (0.0, 0.1, 0.1),
    mixing.FM3: (0.0, 0.1, 0.1, 0.1),
}


def default_start(spec: ModelSpec, warm: dict | None = None) -> np.ndarray:
    """Default starting vector: means at 0, scales at 0.1, lognormal mu at ln 0.5.

    `warm` optionally maps coefficient names to location values (e.g. prior
    MNL estimates); location-type parameters are then initialized there.
    """
    layout = ParamLayout.build(spec)
    theta = np.zeros(layout.n_params)
    for coef in spec.coefficients:
        start = list(_DEFAULT_STARTS[coef.family])
        if coef.family == mixing.AT and coef.pin_c_zero:
            start = start[:2]
        if warm and coef.name in warm:
            m = float(warm[coef.name])
            if coef.sign_flip:
                m = -m
            if coef.family in (mixing.FIXED, mixing.NORMAL, mixing.FM2, mixing.FM3):
                start[0] = m
            elif coef.family == mixing.UNIFORM:
                start[0] = m - 0.05
            elif coef.family == mixing.TRIANGULAR:
                start[0] = m - 0.1
            elif coef.family == mixing.LOGNORMAL:
                start[0] = float(np.log(max(abs(m), 0.05)))
            elif coef.family == mixing.LOGUNIFORM:
                start[0] = float(np.log(max(abs(m), 0.05))) - 0.05
            elif coef.family == mixing.AT:
                start[0], start[1] = m - 0.1, m + 0.1
        theta[layout.slices[coef.name]] = start
    if layout.sigma_rho_index is not None:
        theta[layout.sigma_rho_index] = 0.1
    return theta


def mnl_prob(v) -> np.ndarray:
    """Softmax of one task's utilities, computed with max subtraction."""
    v = np.asarray(v, dtype=float)
    e = np.exp(v - v.max())
    return e / e.sum()


def build_utility(spec: ModelSpec, task: data_mod.Task, coeffs: dict,
                  attribute_names) -> np.ndarray:
    """Scalar reference path: utilities of one task for one coefficient draw.

    `coeffs` maps coefficient names to realized values; `attribute_names`
    gives the position of each attribute in the task's value vectors.
    """
    index = {name: k for k, name in enumerate(attribute_names)}
    labels = [label for label, _ in task.alternatives]
    n_alts = len(task.alternatives)

    def coef(name):
        if name not in coeffs:
            raise MissingCoefficient(f"no realized value for coefficient {name!r}")
        return coeffs[name]

    inner = np.zeros(n_alts)
    for term in spec.terms:
        col = index.get(term.attribute)
        if col is None:
            raise SpecDataMismatch(f"attribute {term.attribute!r} not in dataset")
        x = np.array([task.alternatives[i][1][col] for i in range(n_alts)], dtype=float)
        inner += coef(term.coefficient) * x
    for asc in spec.ascs:
        ind = np.array([1.0 if lab == asc.alternative else 0.0 for lab in labels])
        inner += coef(asc.coefficient) * ind

    if spec.space == WTP:
        col = index.get(spec.price_attribute)
        if col is None:
            raise SpecDataMismatch(f"price attribute {spec.price_attribute!r} not in dataset")
        price = np.array([task.alternatives[i][1][col] for i in range(n_alts)], dtype=float)
        return coef(spec.price_coefficient) * (price + inner)
    return inner


# ---------------------------------------------------------------------------
# vectorized panel engine
# ---------------------------------------------------------------------------

@dataclass
class PanelIndex:
    """Flat-array view of a stated-preference panel."""

    X: np.ndarray                # [n_rows, n_attrs]
    row_person: np.ndarray       # person ordinal per row
    row_label: np.ndarray        # alternative-label ordinal per row
    task_starts: np.ndarray      # first row of each task
    task_sizes: np.ndarray
    chosen_rows: np.ndarray      # global row index of the chosen alternative
    person_task_starts: np.ndarray  # first task of each person, plus sentinel
    person_ids: list
    attribute_names: tuple
    alternative_labels: tuple
    rect_shape: tuple | None     # (n_persons, tasks_per_person, alts_per_task) if rectangular

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_tasks(self) -> int:
        return len(self.task_starts)

    @property
    def n_persons(self) -> int:
        return len(self.person_ids)

    @staticmethod
    def build(dataset: data_mod.ChoiceDataset) -> "PanelIndex":
        label_index = {lab: k for k, lab in enumerate(dataset.alternative_labels)}
        rows, row_person, row_label = [], [], []
        task_starts, task_sizes, chosen_rows = [], [], []
        person_task_starts = [0]
        for p, person in enumerate(dataset.individuals):
            for task in person.tasks:
                task_starts.append(len(rows))
                task_sizes.append(len(task.alternatives))
                chosen_rows.append(len(rows) + task.chosen_index)
                for label, values in task.alternatives:
                    for name, value in zip(dataset.attribute_names, values):
                        if isinstance(value, str):
                            raise NonNumericAttribute(
                                f"attribute {name!r} holds label {value!r}; apply coding first")
                    rows.append(values)
                    row_person.append(p)
                    row_label.append(label_index[label])
            person_task_starts.append(len(task_starts))

        sizes = np.array(task_sizes)
        tasks_per = np.diff(person_task_starts)
        rect = None
        if len(set(sizes.tolist())) == 1 and len(set(tasks_per.tolist())) == 1:
            rect = (len(dataset.individuals), int(tasks_per[0]), int(sizes[0]))
        return PanelIndex(
            X=np.array(rows, dtype=float),
            row_person=np.array(row_person),
            row_label=np.array(row_label),
            task_starts=np.array(task_starts),
            task_sizes=sizes,
            chosen_rows=np.array(chosen_rows),
            person_task_starts=np.array(person_task_starts),
            person_ids=dataset.person_ids(),
            attribute_names=dataset.attribute_names,
            alternative_labels=dataset.alternative_labels,
            rect_shape=rect,
        )


def _coefficient_columns(spec: ModelSpec, index: PanelIndex):
    """Per-coefficient combined data column (attribute terms + ASC indicators)."""
    attr_index = {name: k for k, name in enumerate(index.attribute_names)}
    label_index = {lab: k for k, lab in enumerate(index.alternative_labels)}
    cols: dict[str, np.ndarray] = {}

    def add(name, column):
        cols[name] = cols.get(name, 0.0) + column

    for term in spec.terms:
        if term.attribute not in attr_index:
            raise SpecDataMismatch(f"attribute {term.attribute!r} not in dataset")
        add(term.coefficient, index.X[:, attr_index[term.attribute]])
    for asc in spec.ascs:
        if asc.alternative not in label_index:
            raise SpecDataMismatch(f"alternative {asc.alternative!r} not in dataset")
        add(asc.coefficient, (index.row_label == label_index[asc.alternative]).astype(float))

    price_col = None
    if spec.space == WTP:
        if spec.price_attribute not in attr_index:
            raise SpecDataMismatch(f"price attribute {spec.price_attribute!r} not in dataset")
        price_col = index.X[:, attr_index[spec.price_attribute]]
    return cols, price_col


class PreparedPanel:
    """Reusable likelihood evaluator for one (spec, dataset, draws) triple."""

    def __init__(self, spec: ModelSpec, dataset: data_mod.ChoiceDataset,
                 draws: DrawBlock | None):
        if dataset.mode != data_mod.STATED_PANEL:
            raise SpecDataMismatch(f"panel likelihood needs {data_mod.STATED_PANEL} data")
        if spec.rp is not None:
            raise SpecDataMismatch("spec has an rp block; use the rp likelihood")
        self.spec = spec
        self.index = PanelIndex.build(dataset)
        self.layout = ParamLayout.build(spec)
        cols, self.price_col = _coefficient_columns(spec, self.index)

        # coefficients entering the linear index, in spec order
        self.linear = [c for c in spec.coefficients
                       if c.name in cols and c.name != spec.price_coefficient]
        self.columns = np.column_stack([cols[c.name] for c in self.linear]) \
            if self.linear else np.zeros((self.index.n_rows, 0))

        if self.layout.n_dims > 0:
            if draws is None:
                raise DrawDimensionMismatch("spec has mixed coefficients but no draws")
            if draws.kind != UNIFORM01:
                raise DrawDimensionMismatch("pass the uniform01 block; normals are derived")
            if draws.n_persons != self.index.n_persons:
                raise DrawDimensionMismatch(
                    f"draws cover {draws.n_persons} persons, dataset has "
                    f"{self.index.n_persons}")
            if draws.n_dims < self.layout.n_dims:
                raise DrawDimensionMismatch(
                    f"spec needs {self.layout.n_dims} draw dimensions, block has "
                    f"{draws.n_dims}")
            self.uniform = draws
            self.normal = to_std_normal(draws)
            self.n_draws = draws.n_draws
        else:
            self.uniform = self.normal = None
            self.n_draws = 1

    def _realize(self, coef: mixing.MixingSpec, theta: np.ndarray) -> np.ndarray:
        """Realized [person, draw] values for one coefficient."""
        params = theta[self.layout.slices[coef.name]]
        dims = mixing.draw_dims(coef.family)
        if dims == 0:
            values = np.zeros((self.index.n_persons, self.n_draws, 0))
            kind = UNIFORM01
        else:
            kind = mixing.draw_kind(coef.family)
            block = self.normal if kind == STD_NORMAL else self.uniform
            offset = self.layout.dim_offsets[coef.name]
            values = block.dims(offset, dims)
        return mixing.realize(coef, params, values, kind)

    def utilities(self, theta: np.ndarray) -> np.ndarray:
        """Row-by-draw utility matrix V [n_rows, n_draws]."""
        theta = np.asarray(theta, dtype=float)
        n_persons, n_draws = self.index.n_persons, self.n_draws
        B = np.empty((n_persons, n_draws, len(self.linear)))
        for m, coef in enumerate(self.linear):
            B[:, :, m] = self._realize(coef, theta)

        rect = self.index.rect_shape
        if rect is not None:
            rows_pp = rect[1] * rect[2]
            X3 = self.columns.reshape(n_persons, rows_pp, len(self.linear))
            inner = X3 @ B.transpose(0, 2, 1)  # [N, rows_pp, R]
            if self.spec.space == WTP:
                inner += self.price_col.reshape(n_persons, rows_pp, 1)
                inner *= self._realize(
                    self.spec.coefficient(self.spec.price_coefficient), theta)[:, None, :]
            return inner.reshape(self.index.n_rows, n_draws)

        pidx = self.index.row_person
        inner = np.zeros((self.index.n_rows, n_draws))
        for m in range(len(self.linear)):
            inner += self.columns[:, m:m + 1] * B[pidx, :, m]
        if self.spec.space == WTP:
            inner += self.price_col[:, None]
            inner *= self._realize(
                self.spec.coefficient(self.spec.price_coefficient), theta)[pidx]
        return inner

    def loglik(self, theta) -> tuple[float, np.ndarray, int]:
        """Return (LL, per-person likelihoods P_n, count of floored persons)."""
        V = self.utilities(theta)
        index = self.index
        rect = index.rect_shape
        if rect is not None:
            n_persons, T, J = rect
            V3 = V.reshape(index.n_tasks, J, self.n_draws)
            vmax = V3.max(axis=1)
            esum = np.exp(V3 - vmax[:, None, :]).sum(axis=1)
            logp = V[index.chosen_rows] - vmax - np.log(esum)
            ln_panel = logp.reshape(n_persons, T, self.n_draws).sum(axis=1)
        else:
            starts = index.task_starts
            vmax = np.maximum.reduceat(V, starts, axis=0)
            expanded = np.repeat(vmax, index.task_sizes, axis=0)
            esum = np.add.reduceat(np.exp(V - expanded), starts, axis=0)
            logp = V[index.chosen_rows] - vmax - np.log(esum)
            ln_panel = np.add.reduceat(logp, index.person_task_starts[:-1], axis=0)
        p_n = np.exp(ln_panel).mean(axis=1)
        floored = int((p_n < PROB_FLOOR).sum())
        p_n = np.maximum(p_n, PROB_FLOOR)
        return float(np.log(p_n).sum()), p_n, floored

    @property
    def n_obs(self) -> int:
        return self.index.n_tasks

    @property
    def person_ids(self) -> list:
        return self.index.person_ids


def prepare_panel(spec, dataset, draws) -> PreparedPanel:
    return PreparedPanel(spec, dataset, draws)


def mixed_panel_ll(spec: ModelSpec, dataset: data_mod.ChoiceDataset,
                   draws: DrawBlock | None, params) -> tuple[float, list]:
    """Simulated panel log-likelihood plus per-person likelihoods."""
    prepared = PreparedPanel(spec, dataset, draws)
    ll, p_n, _ = prepared.loglik(np.asarray(params, dtype=float))
    people = [PersonLikelihood(pid, float(p))
              for pid, p in zip(prepared.index.person_ids, p_n)]
    return ll, people


# ---------------------------------------------------------------------------
# revealed-preference pair engine
# ---------------------------------------------------------------------------

class PreparedRP:
    """Likelihood evaluator for the correlated dual-logit RP model."""

    def __init__(self, spec: ModelSpec, dataset: data_mod.ChoiceDataset,
                 draws: DrawBlock | None):
        if dataset.mode != data_mod.RP_PAIR:
            raise SpecDataMismatch(f"rp likelihood needs {data_mod.RP_PAIR} data")
        if spec.rp is None:
            raise SpecDataMismatch("spec has no rp block")
        self.spec = spec
        self.layout = ParamLayout.build(spec)
        self.person_ids = dataset.person_ids()
        n = len(dataset.individuals)

        def covariate(name):
            out = np.empty(n)
            for i, person in enumerate(dataset.individuals):
                if name not in person.covariates:
                    raise MissingIndicator(f"person {person.id}: covariate {name!r} absent")
                out[i] = person.covariates[name]
            return out

        self.outcomes = []
        for outcome in spec.rp.outcomes:
            y = covariate(outcome.indicator)
            if not np.isin(y, (0.0, 1.0)).all():
                raise MissingIndicator(f"indicator {outcome.indicator!r} must be 0/1")
            cols = []
            for term in outcome.terms:
                cols.append((term.coefficient, covariate(term.attribute)))
            if outcome.asc is not None:
                cols.append((outcome.asc, np.ones(n)))
            self.outcomes.append((y, cols))

        if self.layout.n_dims > 0:
            if draws is None:
                raise DrawDimensionMismatch("rp spec needs draws (one dimension for rho)")
            if draws.n_persons != n:
                raise DrawDimensionMismatch(
                    f"draws cover {draws.n_persons} persons, dataset has {n}")
            if draws.n_dims < self.layout.n_dims:
                raise DrawDimensionMismatch(
                    f"spec needs {self.layout.n_dims} draw dimensions, block has "
                    f"{draws.n_dims}")
            self.uniform = draws
            self.normal = to_std_normal(draws)
            self.n_draws = draws.n_draws
        else:
            self.uniform = self.normal = None
            self.n_draws = 1
        self.n_persons = n

    def _realize(self, coef: mixing.MixingSpec, theta: np.ndarray) -> np.ndarray:
        params = theta[self.layout.slices[coef.name]]
        dims = mixing.draw_dims(coef.family)
        if dims == 0:
            values = np.zeros((self.n_persons, self.n_draws, 0))
            kind = UNIFORM01
        else:
            kind = mixing.draw_kind(coef.family)
            block = self.normal if kind == STD_NORMAL else self.uniform
            values = block.dims(self.layout.dim_offsets[coef.name], dims)
        return mixing.realize(coef, params, values, kind)

    def loglik(self, theta) -> tuple[float, np.ndarray, int]:
        theta = np.asarray(theta, dtype=float)
        if self.layout.rho_dim is not None and self.normal is not None:
            rho = theta[self.layout.sigma_rho_index] * self.normal.dims(
                self.layout.rho_dim, 1)[:, :, 0]
        else:
            rho = np.zeros((self.n_persons, self.n_draws))
        lik = np.ones((self.n_persons, self.n_draws))
        for y, cols in self.outcomes:
            v = rho.copy()
            for coef_name, column in cols:
                coef = self.spec.coefficient(coef_name)
                v += self._realize(coef, theta) * column[:, None]
            p = expit(v)
            lik *= np.where(y[:, None] == 1.0, p, 1.0 - p)
        p_n = lik.mean(axis=1)
        floored = int((p_n < PROB_FLOOR).sum())
        p_n = np.maximum(p_n, PROB_FLOOR)
        return float(np.log(p_n).sum()), p_n, floored

    @property
    def n_obs(self) -> int:
        return 2 * self.n_persons


def prepare_rp(spec, dataset, draws) -> PreparedRP:
    return PreparedRP(spec, dataset, draws)


def rp_pair_ll(spec: ModelSpec, dataset: data_mod.ChoiceDataset,
               draws: DrawBlock | None, params) -> tuple[float, list]:
    """Correlated dual-logit log-likelihood plus per-person likelihoods."""
    prepared = PreparedRP(spec, dataset, draws)
    ll, p_n, _ = prepared.loglik(np.asarray(params, dtype=float))
    people = [PersonLikelihood(pid, float(p))
              for pid, p in zip(prepared.person_ids, p_n)]
    return ll, people


def prepare(spec: ModelSpec, dataset: data_mod.ChoiceDataset, draws: DrawBlock | None):
    """Dispatch to the panel or RP evaluator based on the dataset mode."""
    if dataset.mode == data_mod.RP_PAIR:
        return PreparedRP(spec, dataset, draws)
    return PreparedPanel(spec, dataset, draws)
