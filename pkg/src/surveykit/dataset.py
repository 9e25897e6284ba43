"""Weighted categorical survey microdata: schema, CSV I/O and synthetic fixtures.

Variable spec file grammar (UTF-8 text)::

    # comments start with '#'; blank lines separate nothing in particular
    weight: WEIGHT                 # optional, name of the weight column
    variable: CITTADX              # starts a new variable block
    kind: binary                   # nominal | ordinal | binary (default nominal)
    categories: Yes | No           # inline list, '|' separated
    variable: TIPSCU
    categories:                    # or one '- label' per following line
      - Kindergarten
      - Not applicable

Category codes are 0-based in declaration order. Files always carry labels.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    AllZeroWeights,
    InvalidMarginal,
    MissingCell,
    NegativeWeight,
    SchemaMismatch,
    UnknownCategory,
)

KINDS = ("nominal", "ordinal", "binary")
DEFAULT_WEIGHT_COL = "WEIGHT"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    categories: tuple[str, ...]
    kind: str = "nominal"

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        if not self.name:
            raise SchemaMismatch("variable name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaMismatch(f"{self.name}: unknown kind {self.kind!r}")
        if len(self.categories) < 2:
            raise SchemaMismatch(f"{self.name}: at least 2 categories required")
        if len(set(self.categories)) != len(self.categories):
            raise SchemaMismatch(f"{self.name}: duplicate category labels")

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    def code(self, label: str) -> int:
        return self.categories.index(label)


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """n x p matrix of category codes plus one survey weight per row."""

    specs: tuple[VariableSpec, ...]
    rows: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        specs = tuple(self.specs)
        rows = np.array(self.rows, dtype=np.int64, copy=True)
        if rows.ndim == 1 and len(specs) == 0:
            rows = rows.reshape(0, 0)
        if rows.ndim != 2 or rows.shape[1] != len(specs):
            raise SchemaMismatch(
                f"rows have shape {rows.shape}, expected (n, {len(specs)})")
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate variable names")
        for j, s in enumerate(specs):
            col = rows[:, j]
            if col.size and (col.min() < 0 or col.max() >= s.n_categories):
                bad = int(np.flatnonzero((col < 0) | (col >= s.n_categories))[0])
                raise UnknownCategory(s.name, int(col[bad]), bad)
        if self.weights is None:
            weights = np.ones(rows.shape[0])
        else:
            weights = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if weights.shape[0] != rows.shape[0]:
            raise SchemaMismatch("one weight per row required")
        if not np.all(np.isfinite(weights)):
            raise SchemaMismatch("weights must be finite")
        neg = np.flatnonzero(weights < 0)
        if neg.size:
            raise NegativeWeight(int(neg[0]))
        if rows.shape[0] and not np.any(weights > 0):
            raise AllZeroWeights("at least one weight must be positive")
        rows.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.specs]

    def subset(self, index) -> "CategoricalDataset":
        """Rows selected by an index array or boolean mask, order kept."""
        index = np.asarray(index)
        return CategoricalDataset(self.specs, self.rows[index], self.weights[index])

    def with_rows(self, rows) -> "CategoricalDataset":
        return CategoricalDataset(self.specs, rows, self.weights)

    def labels(self, i: int) -> list[str]:
        return [s.categories[c] for s, c in zip(self.specs, self.rows[i])]

    def __eq__(self, other):
        if not isinstance(other, CategoricalDataset):
            return NotImplemented
        return (self.specs == other.specs
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None


def normalize_weights(data_or_weights) -> np.ndarray:
    """Scale survey weights so they sum to one."""
    w = getattr(data_or_weights, "weights", data_or_weights)
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise NegativeWeight(int(np.flatnonzero(w < 0)[0]))
    total = w.sum()
    if not total > 0:
        raise AllZeroWeights("weights sum to zero")
    return w / total


# spec file ---------------------------------------------------------------

def parse_spec_text(text: str) -> tuple[list[VariableSpec], str | None]:
    """Parse the variable spec grammar; returns (specs, weight column or None)."""
    blocks: list[dict] = []
    weight_col = None
    pending_list = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip() if not raw.lstrip().startswith("-") else raw.rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("- "):
            if pending_list is None:
                raise SchemaMismatch(f"line {lineno}: list item outside a 'categories:' key")
            pending_list.append(stripped[2:].strip())
            continue
        if ":" not in stripped:
            raise SchemaMismatch(f"line {lineno}: expected 'key: value'")
        key, value = (part.strip() for part in stripped.split(":", 1))
        pending_list = None
        if key == "weight":
            weight_col = value
        elif key == "variable":
            blocks.append({"name": value, "kind": "nominal", "categories": []})
        elif not blocks:
            raise SchemaMismatch(f"line {lineno}: {key!r} before any 'variable:'")
        elif key == "kind":
            blocks[-1]["kind"] = value
        elif key == "categories":
            if value:
                blocks[-1]["categories"] = [c.strip() for c in value.split("|")]
            else:
                pending_list = blocks[-1]["categories"]
        else:
            raise SchemaMismatch(f"line {lineno}: unknown key {key!r}")
    if not blocks:
        raise SchemaMismatch("spec declares no variables")
    specs = [VariableSpec(b["name"], b["categories"], b["kind"]) for b in blocks]
    return specs, weight_col


def load_spec(path) -> tuple[list[VariableSpec], str | None]:
    return parse_spec_text(Path(path).read_text(encoding="utf-8"))


def format_spec(specs: Sequence[VariableSpec], weight_col: str | None = None) -> str:
    out = []
    if weight_col:
        out.append(f"weight: {weight_col}")
    for s in specs:
        out.append(f"variable: {s.name}")
        out.append(f"kind: {s.kind}")
        out.append("categories:")
        out.extend(f"  - {c}" for c in s.categories)
    return "\n".join(out) + "\n"


def save_spec(specs, path, weight_col: str | None = None) -> None:
    Path(path).write_text(format_spec(specs, weight_col), encoding="utf-8")


# CSV ---------------------------------------------------------------------

def load_csv(path, spec_path=None, *, specs=None,
             weight_col: str | None = None) -> CategoricalDataset:
    """Read a labelled CSV into a dataset, validating every cell.

    Unit weights are used when the weight column is absent from the header.
    """
    spec_weight = None
    if specs is None:
        if spec_path is None:
            raise SchemaMismatch("a variable spec is required")
        specs, spec_weight = load_spec(spec_path)
    weight_col = weight_col or spec_weight or DEFAULT_WEIGHT_COL
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        names = [s.name for s in specs]
        missing = [nm for nm in names if nm not in header]
        extra = [h for h in header if h not in names and h != weight_col]
        if missing or extra or len(set(header)) != len(header):
            raise SchemaMismatch(
                f"header mismatch: missing={missing} unexpected={extra}")
        pos = [header.index(nm) for nm in names]
        wpos = header.index(weight_col) if weight_col in header else None
        lookup = [{c: k for k, c in enumerate(s.categories)} for s in specs]
        rows, weights = [], []
        for i, rec in enumerate(reader):
            if not rec:
                continue
            if len(rec) != len(header):
                raise SchemaMismatch(f"row {i}: expected {len(header)} fields, got {len(rec)}")
            codes = []
            for s, j, table in zip(specs, pos, lookup):
                cell = rec[j]
                if cell == "":
                    raise MissingCell(i, s.name)
                try:
                    codes.append(table[cell])
                except KeyError:
                    raise UnknownCategory(s.name, cell, i) from None
            rows.append(codes)
            if wpos is not None:
                if rec[wpos] == "":
                    raise MissingCell(i, weight_col)
                try:
                    wt = float(rec[wpos])
                except ValueError:
                    raise SchemaMismatch(f"row {i}: weight {rec[wpos]!r} is not a number") from None
                if wt < 0:
                    raise NegativeWeight(i)
                weights.append(wt)
    rows_arr = np.array(rows, dtype=np.int64).reshape(len(rows), len(specs))
    return CategoricalDataset(specs, rows_arr, weights if wpos is not None else None)


def to_csv_text(data: CategoricalDataset, weight_col: str = DEFAULT_WEIGHT_COL) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.names + [weight_col])
    for i in range(data.n):
        writer.writerow(data.labels(i) + [repr(float(data.weights[i]))])
    return buf.getvalue()


def save_csv(data: CategoricalDataset, path, weight_col: str = DEFAULT_WEIGHT_COL) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv_text(data, weight_col))


# fixtures ----------------------------------------------------------------

def _check_marginal(name, probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0 or np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise InvalidMarginal(f"{name}: frequencies must be nonnegative and finite")
    if abs(probs.sum() - 1.0) > 0.01 + 1e-12:
        raise InvalidMarginal(f"{name}: frequencies sum to {probs.sum():.4f}, not 1 +/- 0.01")
    return probs / probs.sum()


def generate_fixture(marginals: Mapping[str, Mapping[str, float]] | Sequence,
                     n: int, seed: int,
                     kinds: Mapping[str, str] | None = None) -> CategoricalDataset:
    """Draw n unit-weight rows, each variable independently from its marginal.

    ``marginals`` maps variable name -> {label: frequency}; rounded
    frequencies summing to 0.99-1.01 are renormalized. A sequence of
    (VariableSpec, probabilities) pairs is also accepted.
    """
    if n < 1:
        raise InvalidMarginal("n must be >= 1")
    kinds = dict(kinds or {})
    if isinstance(marginals, Mapping):
        pairs = []
        for name, freq in marginals.items():
            labels = list(freq)
            if len(labels) == 1:
                # degenerate marginals still need two declared categories
                labels.append("__other__")
                probs = [freq[labels[0]], 0.0]
            else:
                probs = [freq[c] for c in labels]
            kind = kinds.get(name, "binary" if len(labels) == 2 else "nominal")
            pairs.append((VariableSpec(name, labels, kind), probs))
    else:
        pairs = list(marginals)
    rng = np.random.default_rng(seed)
    specs, cols = [], []
    for spec, probs in pairs:
        probs = _check_marginal(spec.name, probs)
        if probs.size != spec.n_categories:
            raise InvalidMarginal(f"{spec.name}: {probs.size} frequencies for "
                                  f"{spec.n_categories} categories")
        specs.append(spec)
        cols.append(rng.choice(spec.n_categories, size=n, p=probs))
    return CategoricalDataset(specs, np.column_stack(cols))
