"""Correspondence codes for linguistic labels and the intermediate numeric matrix.

Each label of an FTYPE2/FTYPE3/FTYPE4 attribute gets a code
``(attr_index, level)`` with ``level = base_offset + (rank - 1) * step``,
where rank follows the declared (semantically ascending) label order and
the step is the attribute threshold. With ``base_offset = 10`` an Age
attribute with threshold 10 gets levels 10/20/30 (shown ``1.10``, ``1.20``,
``1.30``) and an Experience attribute with threshold 5 gets 10/15/20/25.

FTYPE1 and crisp attributes are passed through unchanged.
"""

from __future__ import annotations

import csv
import io
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fuzzy_domain import FuzzyValue, TrapezoidLabel, ValueKind, trapezoid_membership
from .schema import AttributeDef, SchemaCatalog

DEFAULT_BASE_OFFSET = 10
DEFAULT_STEP = 10

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_MARKERS = {
    "#UNKNOWN": ValueKind.UNKNOWN,
    "#UNDEFINED": ValueKind.UNDEFINED,
    "#NULL": ValueKind.NULL,
}


class EncodingError(ValueError):
    pass


class DataError(ValueError):
    """Malformed input records."""


class SeriationWarning(UserWarning):
    """Declared FTYPE3 label order disagrees with the similarity relation."""


@dataclass(frozen=True)
class LabelCode:
    attr_index: int
    level_value: int | float

    def display(self) -> str:
        level = self.level_value
        if float(level).is_integer():
            return f"{self.attr_index}.{int(level):02d}"
        return f"{self.attr_index}.{level:g}"


@dataclass(frozen=True)
class AttributeCoding:
    """How one attribute enters the intermediate matrix.

    ``codes`` is empty for identity (FTYPE1/crisp) attributes.
    """

    attribute: str
    kind: int | None
    numeric: bool
    attr_index: int | None = None
    threshold: float | None = None
    base_offset: float = DEFAULT_BASE_OFFSET
    codes: Mapping[str, LabelCode] = field(default_factory=dict)
    trapezoids: tuple[TrapezoidLabel, ...] = ()

    @property
    def is_identity(self) -> bool:
        return not self.codes

    @property
    def labels(self) -> list[str]:
        if self.codes:
            return list(self.codes)
        return [t.name for t in self.trapezoids]

    def code(self, label: str) -> LabelCode:
        key = label.casefold()
        for name, code in self.codes.items():
            if name.casefold() == key:
                return code
        raise EncodingError(f"label {label!r} not in codebook for attribute {self.attribute}")


@dataclass(frozen=True)
class CodeBook:
    attributes: Mapping[str, AttributeCoding]

    def __getitem__(self, name: str) -> AttributeCoding:
        try:
            return self.attributes[name.upper()]
        except KeyError:
            raise EncodingError(f"unknown attribute {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name.upper() in self.attributes


def _seriation_order(attr: AttributeDef) -> list[str]:
    rel = attr.similarity
    idx = [rel.index(lab) for lab in attr.labels]
    sim = rel.as_array()[np.ix_(idx, idx)]
    order = [0]
    remaining = set(range(1, len(attr.labels)))
    while remaining:
        last = order[-1]
        nxt = max(sorted(remaining), key=lambda j: sim[last, j])
        order.append(nxt)
        remaining.remove(nxt)
    return [attr.labels[i] for i in order]


def assign_codes(
    catalog: SchemaCatalog,
    base_offset: float = DEFAULT_BASE_OFFSET,
    default_step: float = DEFAULT_STEP,
) -> CodeBook:
    """Build the codebook for every attribute of ``catalog``."""
    entries: dict[str, AttributeCoding] = {}
    attr_index = 0
    for attr in catalog.attributes:
        if attr.kind in (2, 3, 4) and attr.labels:
            step = attr.threshold
            if step is None and attr.kind in (3, 4):
                step = default_step
            if step is None or not step > 0:
                raise EncodingError(
                    f"attribute {attr.name} has labels but no positive threshold to step codes"
                )
            if attr.kind == 3 and attr.similarity is not None and len(attr.labels) > 2:
                greedy = _seriation_order(attr)
                if greedy != list(attr.labels) and greedy[::-1] != list(attr.labels):
                    warnings.warn(
                        f"{attr.name}: declared label order {list(attr.labels)} disagrees with "
                        f"similarity seriation {greedy}",
                        SeriationWarning,
                        stacklevel=2,
                    )
            attr_index += 1
            codes = {
                label: LabelCode(attr_index, base_offset + rank * step)
                for rank, label in enumerate(attr.labels)
            }
            entries[attr.name] = AttributeCoding(
                attr.name, attr.kind, True, attr_index, step, base_offset, codes, attr.trapezoids
            )
        else:
            entries[attr.name] = AttributeCoding(
                attr.name,
                attr.kind,
                attr.is_numeric,
                threshold=attr.threshold,
                base_offset=base_offset,
                trapezoids=attr.trapezoids,
            )
    return CodeBook(entries)


# --------------------------------------------------------------------------
# Records


@dataclass(frozen=True)
class Record:
    id: str
    values: Mapping[str, FuzzyValue]


def parse_cell(text: str, attr: AttributeDef) -> FuzzyValue:
    """Cell syntax: number = crisp, ``~x`` = approximate, word = label, ``#UNKNOWN`` etc."""
    s = text.strip()
    if not s:
        return FuzzyValue.special(ValueKind.NULL)
    if s.upper() in _MARKERS:
        return FuzzyValue.special(_MARKERS[s.upper()])
    if s.startswith("~"):
        body = s[1:].strip()
        if not _NUMBER_RE.fullmatch(body):
            raise DataError(f"{attr.name}: malformed approximate value {s!r}")
        if attr.kind != 2:
            raise DataError(f"{attr.name}: approximate values need an FTYPE2 attribute")
        return FuzzyValue.approximate(float(body), attr.margin)
    if _NUMBER_RE.fullmatch(s) and (attr.is_numeric or attr.is_crisp):
        return FuzzyValue.crisp(float(s))
    if attr.is_crisp:
        return FuzzyValue.crisp(s)
    return FuzzyValue.label(s)


def read_records(source: str | io.TextIOBase, catalog: SchemaCatalog) -> list[Record]:
    """Read CSV data whose header names catalog attributes.

    The record id is the first primary-key column when present, otherwise
    the 1-based row number.
    """
    handle = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(handle)
    try:
        header = [h.strip().upper() for h in next(reader)]
    except StopIteration:
        raise DataError("empty data file") from None
    for h in header:
        if h not in catalog:
            raise DataError(f"column {h!r} is not an attribute of {catalog.table_name}")
    if len(set(header)) != len(header):
        raise DataError("duplicate column in header")
    id_col = None
    if catalog.primary_key and catalog.primary_key[0] in header:
        id_col = header.index(catalog.primary_key[0])

    records, seen = [], set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        rid = row[id_col].strip() if id_col is not None else str(len(records) + 1)
        if rid in seen:
            raise DataError(f"line {lineno}: duplicate record id {rid!r}")
        seen.add(rid)
        values = {}
        for name, cell in zip(header, row):
            try:
                values[name] = parse_cell(cell, catalog[name])
            except DataError as exc:
                raise DataError(f"line {lineno}: {exc}") from None
        records.append(Record(rid, values))
    return records


# --------------------------------------------------------------------------
# Intermediate matrix


@dataclass(frozen=True)
class CodeMatrix:
    row_ids: tuple[str, ...]
    selected_attrs: tuple[str, ...]
    cells: np.ndarray
    excluded_rows: tuple[tuple[str, str], ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def column(self, attr: str) -> np.ndarray:
        return self.cells[:, self.selected_attrs.index(attr.upper())]

    def to_csv(self, codebook: CodeBook, id_header: str = "ID") -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow([id_header, *self.selected_attrs])
        for rid, row in zip(self.row_ids, self.cells):
            cells = []
            for attr, v in zip(self.selected_attrs, row):
                coding = codebook[attr]
                if coding.is_identity:
                    cells.append(f"{v:g}")
                else:
                    cells.append(LabelCode(coding.attr_index, _tidy(v)).display())
            w.writerow([rid, *cells])
        return out.getvalue()


def _tidy(v: float) -> int | float:
    return int(v) if float(v).is_integer() else float(v)


def numeric_to_code(x: float, coding: AttributeCoding) -> float:
    """Place a domain value of a coded FTYPE2 attribute on the code scale.

    Membership-weighted mean of the label levels; a value outside every
    label support takes the level of the label with the nearest plateau.
    """
    if not coding.trapezoids:
        raise EncodingError(
            f"attribute {coding.attribute} has no trapezoids to place numeric value {x:g}"
        )
    mu = np.array([trapezoid_membership(x, t) for t in coding.trapezoids])
    levels = np.array([float(coding.code(t.name).level_value) for t in coding.trapezoids])
    if mu.sum() > 0:
        return float(mu @ levels / mu.sum())
    gaps = [max(t.b - x, x - t.c, 0.0) for t in coding.trapezoids]
    return float(levels[int(np.argmin(gaps))])


def _encode_cell(value: FuzzyValue, coding: AttributeCoding) -> float:
    if value.kind is ValueKind.LABEL:
        if coding.is_identity:
            raise EncodingError(
                f"label {value.value!r} not in codebook: attribute {coding.attribute} stores crisp values"
            )
        return float(coding.code(value.value).level_value)
    if value.kind in (ValueKind.CRISP, ValueKind.APPROXIMATE):
        if not isinstance(value.value, (int, float)):
            raise EncodingError(
                f"non-numeric crisp cell {value.value!r} for attribute {coding.attribute}"
            )
        if not coding.is_identity:
            return numeric_to_code(float(value.value), coding)
        return float(value.value)
    raise AssertionError(value)


def build_intermediate_matrix(
    records: Iterable[Record], codebook: CodeBook, selected: Sequence[str]
) -> CodeMatrix:
    """Encode ``records`` over the ``selected`` attributes.

    Rows holding a special marker in any selected attribute are moved to
    ``excluded_rows`` with the reason.
    """
    attrs = tuple(a.upper() for a in selected)
    if not attrs:
        raise EncodingError("no attributes selected")
    codings = [codebook[a] for a in attrs]
    ids, rows, excluded = [], [], []
    for rec in records:
        reason = None
        row = []
        for attr, coding in zip(attrs, codings):
            value = rec.values.get(attr)
            if value is None:
                value = FuzzyValue.special(ValueKind.NULL)
            if value.is_special:
                reason = f"{attr} is {value.kind.name}"
                break
            try:
                row.append(_encode_cell(value, coding))
            except EncodingError as exc:
                raise EncodingError(f"record {rec.id}: {exc}") from None
        if reason is not None:
            excluded.append((rec.id, reason))
            continue
        ids.append(rec.id)
        rows.append(row)
    cells = np.array(rows, dtype=float).reshape(len(rows), len(attrs))
    return CodeMatrix(tuple(ids), attrs, cells, tuple(excluded))


def column_bounds(cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return cells.min(axis=0), cells.max(axis=0)


def normalize_matrix(m: CodeMatrix | np.ndarray) -> np.ndarray:
    """Per-column min-max scaling to [0, 1]; constant columns map to 0.5."""
    cells = m.cells if isinstance(m, CodeMatrix) else np.asarray(m, dtype=float)
    if cells.ndim != 2 or cells.shape[0] == 0:
        raise EncodingError("cannot normalize a matrix with no kept rows")
    lo, hi = column_bounds(cells)
    span = hi - lo
    out = np.full(cells.shape, 0.5)
    varying = span > 0
    out[:, varying] = (cells[:, varying] - lo[varying]) / span[varying]
    return out


def denormalize(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Map normalized coordinates back to code space (constant columns to their value)."""
    values = np.asarray(values, dtype=float)
    return lo + values * (hi - lo)
