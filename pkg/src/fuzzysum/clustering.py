"""Fuzzy c-means over the intermediate matrix, alpha-cut and cluster labelling."""

from __future__ import annotations

import csv
import dataclasses
import io
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .encoder import (
    CodeBook,
    EncodingError,
    Record,
    assign_codes,
    build_intermediate_matrix,
    column_bounds,
    denormalize,
    normalize_matrix,
)
from .fuzzy_domain import trapezoid_membership
from .schema import SchemaCatalog

DEFAULT_ALPHA = 0.2


class ClusterError(ValueError):
    def __init__(self, message: str, attribute: str | None = None):
        self.attribute = attribute
        super().__init__(f"{attribute}: {message}" if attribute else message)


@dataclass(frozen=True)
class FcmConfig:
    n_clusters: int
    fuzzifier: float = 2.0
    tolerance: float = 1e-6
    max_iterations: int = 300
    seed: int = 0

    def check(self, n_rows: int) -> None:
        if n_rows == 0:
            raise ClusterError("empty data")
        if self.n_clusters < 2:
            raise ClusterError(f"n_clusters must be at least 2, got {self.n_clusters}")
        if self.n_clusters > n_rows:
            raise ClusterError(f"n_clusters={self.n_clusters} exceeds the {n_rows} data rows")
        if not self.fuzzifier > 1:
            raise ClusterError(f"fuzzifier must be > 1, got {self.fuzzifier}")
        if self.max_iterations < 1:
            raise ClusterError("max_iterations must be positive")


@dataclass(frozen=True)
class MembershipMatrix:
    """N x C membership degrees.

    After an alpha-cut, ``kept`` marks surviving entries and cut entries of
    ``u`` are zero.
    """

    rows: tuple[str, ...]
    clusters: tuple[str, ...]
    u: np.ndarray
    purified: bool = False
    alpha: float | None = None
    kept: np.ndarray | None = None

    def degree(self, row: str, cluster: str) -> float:
        return float(self.u[self.rows.index(row), self.clusters.index(cluster)])

    def entries(self):
        """Surviving ``(row, cluster, degree)`` triples in row-major order."""
        mask = self.kept if self.kept is not None else np.ones(self.u.shape, bool)
        for i, r in enumerate(self.rows):
            for k, c in enumerate(self.clusters):
                if mask[i, k]:
                    yield r, c, float(self.u[i, k])

    @property
    def empty_rows(self) -> tuple[str, ...]:
        if self.kept is None:
            return ()
        return tuple(r for r, keep in zip(self.rows, self.kept.any(axis=1)) if not keep)

    def with_clusters(self, names: Sequence[str]) -> "MembershipMatrix":
        return dataclasses.replace(self, clusters=tuple(names))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["record_id", "descriptor", "degree"])
        for r, c, d in self.entries():
            w.writerow([r, c, f"{d:.6f}"])
        return out.getvalue()


@dataclass(frozen=True)
class FcmResult:
    memberships: MembershipMatrix
    centroids: np.ndarray
    n_iter: int
    objective: tuple[float, ...]
    converged: bool

    def __iter__(self):
        return iter((self.memberships, self.centroids))


def _row_key(row_id) -> int:
    return zlib.crc32(str(row_id).encode("utf-8"))


def initial_memberships(row_ids: Sequence, n_clusters: int, seed: int) -> np.ndarray:
    """Random row-stochastic start; each row is seeded by its id so a row
    permutation permutes the start identically."""
    u = np.empty((len(row_ids), n_clusters))
    for i, rid in enumerate(row_ids):
        rng = np.random.default_rng([seed, _row_key(rid)])
        u[i] = rng.random(n_clusters) + 1e-3
    return u / u.sum(axis=1, keepdims=True)


def _memberships(d2: np.ndarray, m: float) -> np.ndarray:
    u = np.empty_like(d2)
    zero = d2 <= 0.0
    hit = zero.any(axis=1)
    if hit.any():
        # a point sitting on centroid(s) belongs to them only
        z = zero[hit].astype(float)
        u[hit] = z / z.sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        d = d2[rest]
        ratio = (d.min(axis=1, keepdims=True) / d) ** (1.0 / (m - 1.0))
        u[rest] = ratio / ratio.sum(axis=1, keepdims=True)
    return u


def _centroids(x: np.ndarray, um: np.ndarray, previous: np.ndarray | None) -> np.ndarray:
    weights = um.sum(axis=0)
    v = um.T @ x
    empty = weights <= 0
    if empty.any():
        weights = np.where(empty, 1.0, weights)
        v[empty] = previous[empty] if previous is not None else 0.0
    return v / weights[:, None]


def _sq_dist(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - v[None, :, :]) ** 2).sum(axis=2)
    return np.maximum(d2, 0.0)


def objective(x: np.ndarray, u: np.ndarray, v: np.ndarray, m: float) -> float:
    """J_m = sum_i sum_k u_ik^m ||x_i - v_k||^2."""
    return float(((u ** m) * _sq_dist(x, v)).sum())


def fcm(data, cfg: FcmConfig, row_ids: Sequence | None = None) -> FcmResult:
    """Standard fuzzy c-means by alternating centroid and membership updates.

    Stops when the largest membership change falls below ``cfg.tolerance``
    or after ``cfg.max_iterations`` updates.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.size == 0:
        raise ClusterError("empty data")
    n = x.shape[0]
    cfg.check(n)
    if row_ids is None:
        row_ids = list(range(n))
    if len(row_ids) != n:
        raise ClusterError("row_ids length does not match data")
    m = cfg.fuzzifier

    u = initial_memberships(row_ids, cfg.n_clusters, cfg.seed)
    v = None
    history = []
    converged = False
    n_iter = 0
    for n_iter in range(1, cfg.max_iterations + 1):
        v = _centroids(x, u ** m, v)
        d2 = _sq_dist(x, v)
        u_new = _memberships(d2, m)
        history.append(float(((u_new ** m) * d2).sum()))
        delta = float(np.abs(u_new - u).max())
        u = u_new
        if delta < cfg.tolerance:
            converged = True
            break
    v = _centroids(x, u ** m, v)
    u = np.clip(u, 0.0, 1.0)
    mm = MembershipMatrix(
        tuple(str(r) for r in row_ids),
        tuple(f"cluster-{k + 1}" for k in range(cfg.n_clusters)),
        u,
    )
    return FcmResult(mm, v, n_iter, tuple(history), converged)


def alpha_cut(u: MembershipMatrix, alpha: float) -> MembershipMatrix:
    """Drop every degree below ``alpha``; rows left empty show in ``empty_rows``."""
    if not 0.0 <= alpha <= 1.0:
        raise ClusterError(f"alpha must lie in [0, 1], got {alpha}")
    kept = u.u >= alpha
    if u.kept is not None:
        kept &= u.kept
    cut = np.where(kept, u.u, 0.0)
    level = alpha if u.alpha is None else max(alpha, u.alpha)
    return dataclasses.replace(u, u=cut, purified=True, alpha=level, kept=kept)


def _disambiguate(names: list[str]) -> list[str]:
    counts = Counter(names)
    seen: Counter = Counter()
    out = []
    for name in names:
        if counts[name] > 1:
            seen[name] += 1
            out.append(f"{name}-{seen[name]}")
        else:
            out.append(name)
    return out


def label_clusters(centroids, codebook: CodeBook, attribute: str) -> list[str]:
    """Name each centroid (in code space) after the closest expert label.

    Coded attributes use the nearest label code, ties going to the lower
    rank. FTYPE1 attributes use the trapezoid with the highest membership.
    Attributes without labels get ``cluster-k``.
    """
    coding = codebook[attribute]
    c = np.asarray(centroids, dtype=float).reshape(-1)
    if coding.codes:
        names = list(coding.codes)
        levels = np.array([float(coding.codes[n].level_value) for n in names])
        picked = [names[int(np.argmin(np.abs(levels - x)))] for x in c]
    elif coding.trapezoids:
        picked = []
        for x in c:
            def score(item):
                rank, t = item
                gap = max(t.b - x, x - t.c, 0.0)
                return (-trapezoid_membership(x, t), gap, rank)

            picked.append(min(enumerate(coding.trapezoids), key=score)[1].name)
    else:
        return [f"cluster-{k + 1}" for k in range(len(c))]
    return _disambiguate(picked)


@dataclass(frozen=True)
class ClusterInfo:
    id: str
    centroid: tuple[float, ...]
    descriptor: str


@dataclass(frozen=True)
class AttributePartition:
    attribute: str
    clusters: tuple[ClusterInfo, ...]
    memberships: MembershipMatrix
    n_iter: int = 0
    converged: bool = True
    excluded_rows: tuple[tuple[str, str], ...] = ()

    @property
    def descriptors(self) -> tuple[str, ...]:
        return tuple(c.descriptor for c in self.clusters)


def _cluster_attributes(
    records: Sequence[Record],
    codebook: CodeBook,
    attrs: Sequence[str],
    cfg: FcmConfig,
    alpha: float,
    name: str,
) -> AttributePartition:
    try:
        matrix = build_intermediate_matrix(records, codebook, attrs)
    except EncodingError as exc:
        raise EncodingError(f"{name}: {exc}") from None
    if not matrix.row_ids:
        raise ClusterError("no data for attribute", name)
    norm = normalize_matrix(matrix)
    try:
        result = fcm(norm, cfg, matrix.row_ids)
    except ClusterError as exc:
        raise ClusterError(str(exc), name) from None

    lo, hi = column_bounds(matrix.cells)
    centroids = denormalize(result.centroids, lo, hi)
    # order clusters by centroid so output does not depend on the random start
    order = sorted(range(cfg.n_clusters), key=lambda k: tuple(centroids[k]))
    centroids = centroids[order]
    u = result.memberships.u[:, order]

    if len(attrs) == 1:
        names = label_clusters(centroids[:, 0], codebook, attrs[0])
    else:
        per_attr = [label_clusters(centroids[:, j], codebook, a) for j, a in enumerate(attrs)]
        names = _disambiguate(["+".join(parts) for parts in zip(*per_attr)])
    ids = tuple(f"cluster-{k + 1}" for k in range(cfg.n_clusters))
    mm = MembershipMatrix(matrix.row_ids, tuple(names), u)
    mm = alpha_cut(mm, alpha)
    clusters = tuple(
        ClusterInfo(cid, tuple(float(c) for c in cen), nm) for cid, cen, nm in zip(ids, centroids, names)
    )
    return AttributePartition(
        name, clusters, mm, result.n_iter, result.converged, matrix.excluded_rows
    )


def _config_for(attr_labels: int, override: Mapping | None, base: Mapping | None, name: str) -> FcmConfig:
    params = dict(base or {})
    params.update(override or {})
    if "n_clusters" not in params:
        if attr_labels < 1:
            raise ClusterError("n_clusters must be given for an attribute without labels", name)
        params["n_clusters"] = attr_labels
    return FcmConfig(**params)


def per_attribute_partitions(
    records: Sequence[Record],
    catalog: SchemaCatalog,
    selected: Sequence[str] | None = None,
    alpha: float = DEFAULT_ALPHA,
    overrides: Mapping[str, Mapping] | None = None,
    defaults: Mapping | None = None,
    codebook: CodeBook | None = None,
) -> list[AttributePartition]:
    """Cluster each selected attribute on its own.

    ``defaults`` holds FcmConfig fields shared by all attributes and
    ``overrides`` per-attribute FcmConfig fields. The cluster count defaults
    to the attribute's label count. Descriptors that collide across
    attributes are prefixed with the attribute name.
    """
    codebook = codebook or assign_codes(catalog)
    if selected is None:
        selected = [a.name for a in catalog.fuzzy_attributes]
    overrides = {k.upper(): v for k, v in (overrides or {}).items()}
    partitions = []
    for name in selected:
        name = name.upper()
        if name not in catalog:
            raise ClusterError("unknown attribute", name)
        cfg = _config_for(len(catalog[name].labels), overrides.get(name), defaults, name)
        partitions.append(_cluster_attributes(records, codebook, [name], cfg, alpha, name))

    counts = Counter(d for p in partitions for d in p.descriptors)
    clashing = {d for d, n in counts.items() if n > 1}
    if clashing:
        partitions = [_prefix_descriptors(p, clashing) for p in partitions]
    return partitions


def _prefix_descriptors(p: AttributePartition, clashing: set[str]) -> AttributePartition:
    names = [f"{p.attribute}.{d}" if d in clashing else d for d in p.descriptors]
    clusters = tuple(dataclasses.replace(c, descriptor=n) for c, n in zip(p.clusters, names))
    return dataclasses.replace(p, clusters=clusters, memberships=p.memberships.with_clusters(names))


def joint_partition(
    records: Sequence[Record],
    catalog: SchemaCatalog,
    selected: Sequence[str],
    cfg: FcmConfig,
    alpha: float = DEFAULT_ALPHA,
    codebook: CodeBook | None = None,
) -> AttributePartition:
    """Cluster the selected attributes together; descriptors join per-attribute labels with '+'."""
    codebook = codebook or assign_codes(catalog)
    attrs = [a.upper() for a in selected]
    return _cluster_attributes(records, codebook, attrs, cfg, alpha, "+".join(attrs))
