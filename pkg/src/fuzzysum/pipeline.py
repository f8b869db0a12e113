"""End-to-end summarization: schema -> labels -> records -> partitions -> hierarchy."""

from __future__ import annotations

import configparser
import dataclasses
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .clustering import DEFAULT_ALPHA, AttributePartition, ClusterError, per_attribute_partitions
from .encoder import DataError, EncodingError, Record, assign_codes, read_records
from .lattice import FuzzyContext, LatticeError, SummaryHierarchy, build_fuzzy_context, build_hierarchy
from .schema import (
    LabelDefinitionError,
    SchemaCatalog,
    SchemaError,
    load_label_definitions,
    parse_fsql_schema,
    validate_catalog,
)

log = logging.getLogger(__name__)

CONFIG_ENV = "FUZZYSUM_CONFIG"

EXIT_OK = 0
EXIT_CODES = {"parse": 3, "catalog": 4, "data": 5, "cluster": 6, "lattice": 7, "io": 8}
FCM_FIELDS = ("n_clusters", "fuzzifier", "tolerance", "max_iterations", "seed")


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        self.message = message
        self.exit_code = EXIT_CODES[stage]
        super().__init__(f"[{stage}] {message}")


@dataclass
class PipelineConfig:
    schema_path: str | None = None
    labels_path: str | None = None
    data_path: str | None = None
    selected_attributes: list[str] = field(default_factory=list)
    alpha: float = DEFAULT_ALPHA
    fuzzifier: float = 2.0
    tolerance: float = 1e-6
    max_iterations: int = 300
    seed: int = 0
    overrides: dict[str, dict] = field(default_factory=dict)
    out: str | None = None
    format: str = "json"
    nested: tuple[str, str] | None = None

    def check(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise PipelineError("catalog", f"alpha must lie in [0, 1], got {self.alpha}")
        if self.format not in ("json", "dot"):
            raise PipelineError("io", f"unknown format {self.format!r}")

    @property
    def fcm_defaults(self) -> dict:
        return {
            "fuzzifier": self.fuzzifier,
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "seed": self.seed,
        }


def _coerce(key: str, value: str):
    if key in ("n_clusters", "max_iterations", "seed"):
        return int(value)
    if key in ("fuzzifier", "tolerance", "alpha"):
        return float(value)
    if key in ("attrs", "selected_attributes"):
        return [a.strip().upper() for a in value.split(",") if a.strip()]
    if key == "nested":
        parts = [a.strip().upper() for a in value.split(",")]
        if len(parts) != 2:
            raise ValueError("nested expects 'outer,inner'")
        return tuple(parts)
    return value


_KEY_ALIASES = {"schema": "schema_path", "labels": "labels_path", "data": "data_path",
                "attrs": "selected_attributes"}


def load_config(path: str | os.PathLike) -> PipelineConfig:
    """Read a key=value config: a ``[pipeline]`` section plus one section per
    attribute holding FcmConfig overrides."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise PipelineError("io", f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise PipelineError("parse", f"bad config {path}: {exc}") from None
    cfg = PipelineConfig()
    base = Path(path).parent
    for section in parser.sections():
        items = dict(parser.items(section))
        if section.lower() == "pipeline":
            for key, value in items.items():
                name = _KEY_ALIASES.get(key, key)
                if not hasattr(cfg, name) or name == "overrides":
                    raise PipelineError("parse", f"unknown config key {key!r}")
                try:
                    val = _coerce(key, value)
                except ValueError as exc:
                    raise PipelineError("parse", f"config key {key}: {exc}") from None
                if name.endswith("_path") or name == "out":
                    val = str(base / val)
                setattr(cfg, name, val)
        else:
            override = {}
            for key, value in items.items():
                if key not in FCM_FIELDS:
                    raise PipelineError("parse", f"unknown override {key!r} in [{section}]")
                try:
                    override[key] = _coerce(key, value)
                except ValueError as exc:
                    raise PipelineError("parse", f"[{section}] {key}: {exc}") from None
            cfg.overrides[section.upper()] = override
    return cfg


def _read(path: str | None, what: str) -> str:
    if not path:
        raise PipelineError("io", f"no {what} file given")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PipelineError("io", f"cannot read {what} file {path}: {exc}") from None


def load_catalog(cfg: PipelineConfig) -> SchemaCatalog:
    text = _read(cfg.schema_path, "schema")
    try:
        catalog = parse_fsql_schema(text)
    except SchemaError as exc:
        raise PipelineError("parse", str(exc)) from None
    try:
        labels = _read(cfg.labels_path, "labels") if cfg.labels_path else ""
    except PipelineError as exc:
        needing = [a.name for a in catalog.fuzzy_attributes if a.kind in (2, 3, 4)]
        raise PipelineError(
            "catalog", f"{exc.message}; labels required for {', '.join(needing)}"
        ) from None
    try:
        catalog = load_label_definitions(catalog, labels)
    except (LabelDefinitionError, SchemaError) as exc:
        raise PipelineError("catalog", str(exc)) from None
    diags = validate_catalog(catalog)
    if diags:
        raise PipelineError("catalog", "; ".join(str(d) for d in diags))
    return catalog


def load_records(cfg: PipelineConfig, catalog: SchemaCatalog) -> list[Record]:
    text = _read(cfg.data_path, "data")
    try:
        return read_records(text, catalog)
    except DataError as exc:
        raise PipelineError("data", str(exc)) from None


def selected_attributes(cfg: PipelineConfig, catalog: SchemaCatalog) -> list[str]:
    attrs = cfg.selected_attributes or [a.name for a in catalog.fuzzy_attributes]
    if not attrs:
        raise PipelineError("catalog", "no attributes selected and the schema has no fuzzy attributes")
    for a in attrs:
        if a.upper() not in catalog:
            raise PipelineError("catalog", f"unknown attribute {a}")
    return [a.upper() for a in attrs]


@dataclass
class RunReport:
    excluded_rows: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    dropped_records: list[str] = field(default_factory=list)
    dropped_descriptors: list[str] = field(default_factory=list)
    iterations: dict[str, int] = field(default_factory=dict)
    concept_count: int = 0
    depth: int = 0
    wall_time: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def render(self) -> str:
        lines = [f"concepts: {self.concept_count} (levels 0..{self.depth})"]
        for attr, n in self.iterations.items():
            lines.append(f"fcm {attr}: {n} iterations")
        for attr, rows in self.excluded_rows.items():
            for rid, why in rows:
                lines.append(f"excluded {rid} from {attr}: {why}")
        if self.dropped_records:
            lines.append("records dropped from context: " + ", ".join(self.dropped_records))
        if self.dropped_descriptors:
            lines.append("empty descriptors dropped: " + ", ".join(self.dropped_descriptors))
        lines.extend(f"warning: {w}" for w in self.warnings)
        lines.append(f"wall time: {self.wall_time:.3f}s")
        return "\n".join(lines)


@dataclass
class PipelineResult:
    catalog: SchemaCatalog
    partitions: list[AttributePartition]
    context: FuzzyContext
    hierarchy: SummaryHierarchy
    report: RunReport


def cluster_stage(cfg: PipelineConfig, catalog: SchemaCatalog, records: list[Record]) -> list[AttributePartition]:
    attrs = selected_attributes(cfg, catalog)
    try:
        codebook = assign_codes(catalog)
    except EncodingError as exc:
        raise PipelineError("catalog", str(exc)) from None
    try:
        return per_attribute_partitions(
            records, catalog, attrs, cfg.alpha, cfg.overrides, cfg.fcm_defaults, codebook
        )
    except ClusterError as exc:
        raise PipelineError("cluster", str(exc)) from None
    except (EncodingError, DataError) as exc:
        raise PipelineError("data", str(exc)) from None


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    started = time.perf_counter()
    cfg.check()
    catalog = load_catalog(cfg)
    records = load_records(cfg, catalog)
    partitions = cluster_stage(cfg, catalog, records)
    report = RunReport()
    for p in partitions:
        report.iterations[p.attribute] = p.n_iter
        if p.excluded_rows:
            report.excluded_rows[p.attribute] = list(p.excluded_rows)
        if not p.converged:
            report.warnings.append(f"fcm on {p.attribute} stopped at max_iterations")
    try:
        ctx = build_fuzzy_context(partitions)
        hierarchy = build_hierarchy(ctx)
    except LatticeError as exc:
        raise PipelineError("lattice", str(exc)) from None
    report.dropped_records = list(ctx.dropped_objects)
    report.dropped_descriptors = list(ctx.dropped_attributes)
    if not ctx.attributes:
        report.warnings.append(
            f"degenerate context: alpha={cfg.alpha} cut every membership; hierarchy is the root only"
        )
    report.concept_count = len(hierarchy.concepts)
    report.depth = hierarchy.depth
    report.wall_time = time.perf_counter() - started
    log.info("summarized %d records into %d concepts", len(ctx.objects), report.concept_count)
    return PipelineResult(catalog, partitions, ctx, hierarchy, report)


def merge(cfg: PipelineConfig, updates: Mapping) -> PipelineConfig:
    """Overlay non-None values (command line wins over the config file)."""
    changes = {k: v for k, v in updates.items() if v is not None}
    overrides = {k: dict(v) for k, v in cfg.overrides.items()}
    for attr, vals in changes.pop("overrides", {}).items():
        overrides.setdefault(attr, {}).update(vals)
    return dataclasses.replace(cfg, overrides=overrides, **changes)
