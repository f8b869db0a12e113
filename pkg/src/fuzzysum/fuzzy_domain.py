"""Trapezoidal possibility distributions, approximate values and similarity relations."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """Invalid fuzzy-domain object (bad trapezoid, unknown label, ...)."""


@dataclass(frozen=True)
class TrapezoidLabel:
    """Linguistic label with a trapezoidal possibility distribution ``(a, b, c, d)``."""

    name: str
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise DomainError(
                f"non-monotone trapezoid for label {self.name!r}: "
                f"({self.a}, {self.b}, {self.c}, {self.d})"
            )

    @property
    def points(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def membership(self, x):
        return trapezoid_membership(x, self)


def trapezoid_membership(x, t: TrapezoidLabel):
    """Degree of ``x`` in trapezoid ``t``.

    Plateau ``[b, c]`` is closed, so degenerate ramps (``a == b`` or
    ``c == d``) give 1 at the shared point. Accepts scalars or arrays.
    """
    xs = np.asarray(x, dtype=float)
    mu = np.zeros_like(xs)
    plateau = (xs >= t.b) & (xs <= t.c)
    mu[plateau] = 1.0
    if t.b > t.a:
        rising = (xs > t.a) & (xs < t.b)
        mu[rising] = (xs[rising] - t.a) / (t.b - t.a)
    if t.d > t.c:
        falling = (xs > t.c) & (xs < t.d)
        mu[falling] = (t.d - xs[falling]) / (t.d - t.c)
    if mu.ndim == 0:
        return float(mu)
    return mu


def approximate_distribution(x: float, margin: float, name: str | None = None) -> TrapezoidLabel:
    """Triangular distribution for "approximately x": ``(x-margin, x, x, x+margin)``."""
    if margin < 0:
        raise DomainError(f"margin must be non-negative, got {margin}")
    return TrapezoidLabel(name or f"~{x:g}", x - margin, x, x, x + margin)


@dataclass(frozen=True)
class SimilarityRelation:
    labels: tuple[str, ...]
    degrees: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.degrees) != n or any(len(row) != n for row in self.degrees):
            raise DomainError(
                f"similarity matrix must be {n}x{n} to match labels {list(self.labels)}"
            )
        if len({lab.casefold() for lab in self.labels}) != n:
            raise DomainError(f"duplicate labels in similarity relation: {list(self.labels)}")

    @classmethod
    def from_matrix(cls, labels: Sequence[str], matrix) -> "SimilarityRelation":
        rows = tuple(tuple(float(v) for v in row) for row in matrix)
        return cls(tuple(labels), rows)

    def as_array(self) -> np.ndarray:
        return np.array(self.degrees, dtype=float)

    def index(self, label: str) -> int:
        key = label.casefold()
        for i, lab in enumerate(self.labels):
            if lab.casefold() == key:
                return i
        raise DomainError(f"unknown label {label!r}; expected one of {list(self.labels)}")

    def problems(self) -> list[str]:
        """Violated relation properties, empty when reflexive, symmetric and in [0, 1]."""
        s = self.as_array()
        out = []
        if np.any((s < 0) | (s > 1)):
            out.append("degrees must lie in [0, 1]")
        if not np.all(np.diag(s) == 1.0):
            out.append("relation is not reflexive (diagonal must be 1)")
        if not np.array_equal(s, s.T):
            out.append("relation is not symmetric")
        return out


def similarity_degree(l1: str, l2: str, r: SimilarityRelation) -> float:
    return r.degrees[r.index(l1)][r.index(l2)]


class ValueKind(enum.Enum):
    CRISP = "crisp"
    APPROXIMATE = "approximate"
    LABEL = "label"
    UNKNOWN = "unknown"
    UNDEFINED = "undefined"
    NULL = "null"


SPECIAL_KINDS = (ValueKind.UNKNOWN, ValueKind.UNDEFINED, ValueKind.NULL)


@dataclass(frozen=True)
class FuzzyValue:
    """One cell of a fuzzy relation.

    ``value`` holds the number (crisp/approximate), the raw text of a
    non-numeric crisp cell, or the label name.
    """

    kind: ValueKind
    value: float | str | None = None
    margin: float = 0.0

    @classmethod
    def crisp(cls, x) -> "FuzzyValue":
        return cls(ValueKind.CRISP, x)

    @classmethod
    def approximate(cls, x: float, margin: float) -> "FuzzyValue":
        return cls(ValueKind.APPROXIMATE, float(x), float(margin))

    @classmethod
    def label(cls, name: str) -> "FuzzyValue":
        return cls(ValueKind.LABEL, name)

    @classmethod
    def special(cls, kind: ValueKind) -> "FuzzyValue":
        if kind not in SPECIAL_KINDS:
            raise DomainError(f"{kind} is not a special marker")
        return cls(kind)

    @property
    def is_special(self) -> bool:
        return self.kind in SPECIAL_KINDS

    def distribution(self) -> TrapezoidLabel | None:
        """Possibility distribution of a numeric value; None for labels and markers."""
        if self.kind is ValueKind.CRISP and isinstance(self.value, (int, float)):
            return approximate_distribution(float(self.value), 0.0)
        if self.kind is ValueKind.APPROXIMATE:
            return approximate_distribution(float(self.value), self.margin)
        return None
