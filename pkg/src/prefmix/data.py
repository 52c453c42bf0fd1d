"""Choice data model, long-format CSV ingestion, and dummy coding.

Datasets are long format: one row per alternative, grouped into tasks by a
task id, grouped into persons by a person id. Row order within a task is the
alternative order. Attribute cells are parsed as numbers where possible and
kept as category labels otherwise; `apply_coding` turns category labels into
indicator columns. Datasets are immutable once built and safe to share.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .errors import (
    DataError,
    InvalidIndicator,
    MissingColumn,
    NonNumericAttribute,
    TaskWithMultipleChoices,
    TaskWithoutChoice,
    UnknownAttribute,
    UnknownLevel,
)

STATED_PANEL = "stated_panel"
RP_PAIR = "rp_pair"


@dataclass(frozen=True)
class Task:
    """One choice task: ordered alternatives and the index of the chosen one."""

    alternatives: tuple  # of (label, tuple of attribute values)
    chosen_index: int

    def __post_init__(self):
        if not 0 <= self.chosen_index < len(self.alternatives):
            raise TaskWithoutChoice(
                f"chosen_index {self.chosen_index} outside 0..{len(self.alternatives) - 1}")


@dataclass(frozen=True)
class PanelPerson:
    id: str
    tasks: tuple = ()
    covariates: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ChoiceDataset:
    individuals: tuple
    attribute_names: tuple
    alternative_labels: tuple
    mode: str = STATED_PANEL

    def __post_init__(self):
        seen = set()
        for person in self.individuals:
            if person.id in seen:
                raise DataError(f"duplicate person id {person.id!r}")
            seen.add(person.id)
            if self.mode == STATED_PANEL:
                if not person.tasks:
                    raise DataError(f"person {person.id} has no tasks")
                for task in person.tasks:
                    if len(task.alternatives) < 2:
                        raise DataError(
                            f"person {person.id}: task with fewer than 2 alternatives")

    @property
    def n_persons(self) -> int:
        return len(self.individuals)

    @property
    def n_tasks(self) -> int:
        return sum(len(p.tasks) for p in self.individuals)

    def person_ids(self) -> list[str]:
        return [p.id for p in self.individuals]


@dataclass(frozen=True)
class CodingRule:
    kind: str  # "continuous" | "dummy"
    reference: str | None = None


@dataclass(frozen=True)
class CodingPlan:
    """Per-attribute coding rules; attributes not listed stay continuous."""

    rules: dict

    @staticmethod
    def dummy(**references) -> "CodingPlan":
        """Shorthand: CodingPlan.dummy(flavour="tobacco") dummy-codes flavour."""
        return CodingPlan({k: CodingRule("dummy", v) for k, v in references.items()})


def _parse_cell(raw, column, context):
    if isinstance(raw, (int, float)):
        value = float(raw)
        if not math.isfinite(value):
            raise NonNumericAttribute(f"{context}: non-finite value in {column!r}")
        return value
    text = raw.strip() if raw is not None else ""
    if text == "":
        raise NonNumericAttribute(f"{context}: empty cell in {column!r}")
    try:
        value = float(text)
    except ValueError:
        return text  # category label, resolved by apply_coding
    if not math.isfinite(value):
        raise NonNumericAttribute(f"{context}: non-finite value in {column!r}")
    return value


def load_long_csv(path, schema: dict) -> ChoiceDataset:
    """Read a long-format stated-preference panel.

    `schema` maps roles to column names: person, task, alternative, chosen,
    and attributes (a list of attribute column names). Row order within a
    task is preserved as the alternative order.
    """
    required = ["person", "task", "alternative", "chosen"]
    for role in required:
        if role not in schema:
            raise MissingColumn(f"schema is missing the {role!r} role")
    attributes = list(schema.get("attributes", []))

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in [schema[r] for r in required] + attributes:
            if column not in header:
                raise MissingColumn(f"column {column!r} not found in {path}")

        persons: dict[str, dict] = {}
        for i, row in enumerate(reader, start=2):
            context = f"{path}:{i}"
            pid = row[schema["person"]].strip()
            tid = row[schema["task"]].strip()
            label = row[schema["alternative"]].strip()
            chosen_raw = row[schema["chosen"]].strip()
            if chosen_raw not in ("0", "1"):
                raise InvalidIndicator(f"{context}: chosen flag must be 0 or 1, got {chosen_raw!r}")
            values = tuple(_parse_cell(row[a], a, context) for a in attributes)
            tasks = persons.setdefault(pid, {})
            tasks.setdefault(tid, []).append((label, values, chosen_raw == "1"))

    individuals = []
    labels_seen: list[str] = []
    for pid, tasks in persons.items():
        built = []
        for tid, rows in tasks.items():
            chosen = [k for k, (_, _, flag) in enumerate(rows) if flag]
            if not chosen:
                raise TaskWithoutChoice(f"person {pid}, task {tid}: no chosen alternative")
            if len(chosen) > 1:
                raise TaskWithMultipleChoices(
                    f"person {pid}, task {tid}: {len(chosen)} chosen alternatives")
            for label, _, _ in rows:
                if label not in labels_seen:
                    labels_seen.append(label)
            built.append(Task(tuple((label, vals) for label, vals, _ in rows), chosen[0]))
        individuals.append(PanelPerson(id=pid, tasks=tuple(built)))

    return ChoiceDataset(
        individuals=tuple(individuals),
        attribute_names=tuple(attributes),
        alternative_labels=tuple(labels_seen),
        mode=STATED_PANEL,
    )


def load_rp_csv(path, schema: dict) -> ChoiceDataset:
    """Read a one-row-per-person revealed-preference table.

    `schema` maps: person, covariates (list), indicators (list of 0/1
    outcome columns, stored as covariates alongside the rest).
    """
    if "person" not in schema:
        raise MissingColumn("schema is missing the 'person' role")
    covariates = list(schema.get("covariates", []))
    indicators = list(schema.get("indicators", []))

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in [schema["person"]] + covariates + indicators:
            if column not in header:
                raise MissingColumn(f"column {column!r} not found in {path}")
        individuals = []
        for i, row in enumerate(reader, start=2):
            context = f"{path}:{i}"
            pid = row[schema["person"]].strip()
            cov = {}
            for column in covariates + indicators:
                value = _parse_cell(row[column], column, context)
                if isinstance(value, str):
                    raise NonNumericAttribute(f"{context}: {column!r} must be numeric")
                if column in indicators and value not in (0.0, 1.0):
                    raise InvalidIndicator(f"{context}: {column!r} must be 0 or 1, got {value}")
                cov[column] = value
            individuals.append(PanelPerson(id=pid, covariates=cov))

    return ChoiceDataset(
        individuals=tuple(individuals),
        attribute_names=tuple(covariates + indicators),
        alternative_labels=(),
        mode=RP_PAIR,
    )


def apply_coding(dataset: ChoiceDataset, plan: CodingPlan) -> ChoiceDataset:
    """Replace categorical columns by L-1 indicator columns.

    Indicator columns are named ``attr_level`` in level order of first
    appearance; the reference level maps to the all-zero vector. Continuous
    columns pass through unchanged and must already be numeric.
    """
    for attr in plan.rules:
        if attr not in dataset.attribute_names:
            raise UnknownAttribute(f"coding rule for unknown attribute {attr!r}")

    # level inventory in first-appearance order
    levels: dict[str, list] = {a: [] for a in dataset.attribute_names}
    for person in dataset.individuals:
        for task in person.tasks:
            for _, values in task.alternatives:
                for attr, value in zip(dataset.attribute_names, values):
                    if isinstance(value, str) and value not in levels[attr]:
                        levels[attr].append(value)

    new_names: list[str] = []
    emitters = []  # per source attribute: function value -> list of floats
    for idx, attr in enumerate(dataset.attribute_names):
        rule = plan.rules.get(attr, CodingRule("continuous"))
        if rule.kind == "continuous":
            if levels[attr]:
                raise NonNumericAttribute(
                    f"attribute {attr!r} is continuous but holds labels {levels[attr][:3]}")
            new_names.append(attr)
            emitters.append((idx, None))
        elif rule.kind == "dummy":
            observed = levels[attr]
            # numeric levels are allowed too; collect them for completeness
            if not observed:
                numeric_levels: list = []
                for person in dataset.individuals:
                    for task in person.tasks:
                        for _, values in task.alternatives:
                            if values[idx] not in numeric_levels:
                                numeric_levels.append(values[idx])
                observed = numeric_levels
            if rule.reference not in observed:
                raise UnknownLevel(
                    f"reference {rule.reference!r} is not a level of {attr!r} "
                    f"(observed: {observed})")
            kept = [lv for lv in observed if lv != rule.reference]
            new_names.extend(f"{attr}_{lv}" for lv in kept)
            emitters.append((idx, kept))
        else:
            raise UnknownAttribute(f"unknown coding rule kind {rule.kind!r}")

    def recode(values: tuple) -> tuple:
        out = []
        for idx, kept in emitters:
            if kept is None:
                out.append(float(values[idx]))
            else:
                out.extend(1.0 if values[idx] == lv else 0.0 for lv in kept)
        return tuple(out)

    individuals = tuple(
        PanelPerson(
            id=person.id,
            tasks=tuple(
                Task(tuple((label, recode(vals)) for label, vals in task.alternatives),
                     task.chosen_index)
                for task in person.tasks),
            covariates=dict(person.covariates),
        )
        for person in dataset.individuals)

    return ChoiceDataset(
        individuals=individuals,
        attribute_names=tuple(new_names),
        alternative_labels=dataset.alternative_labels,
        mode=dataset.mode,
    )


def export_long_csv(dataset: ChoiceDataset, path) -> None:
    """Write the dataset back out; reloading yields an identical dataset."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["person", "task", "alt", "chosen", *dataset.attribute_names])
        for person in dataset.individuals:
            for t, task in enumerate(person.tasks, start=1):
                for k, (label, values) in enumerate(task.alternatives):
                    cells = [value if isinstance(value, str) else repr(float(value))
                             for value in values]
                    writer.writerow(
                        [person.id, t, label, int(k == task.chosen_index), *cells])


LONG_SCHEMA_DEFAULT = {
    "person": "person",
    "task": "task",
    "alternative": "alt",
    "chosen": "chosen",
}
