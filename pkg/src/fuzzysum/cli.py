"""Command-line driver.

Subcommands: validate, encode, cluster, summarize, query, export. Options
may come from a config file (``--config`` or $FUZZYSUM_CONFIG); the
command line wins.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .clustering import ClusterError, FcmConfig, joint_partition
from .encoder import EncodingError, assign_codes, build_intermediate_matrix
from .export import hierarchy_from_json, hierarchy_to_dot, hierarchy_to_json, nested_to_dot, write_atomic
from .lattice import LatticeError, nested_diagram, query_level
from .pipeline import (
    CONFIG_ENV,
    EXIT_CODES,
    EXIT_OK,
    PipelineConfig,
    PipelineError,
    cluster_stage,
    load_catalog,
    load_config,
    load_records,
    merge,
    run_pipeline,
    selected_attributes,
)
from .schema import LabelDefinitionError, SchemaError, load_label_definitions, parse_fsql_schema, validate_catalog

log = logging.getLogger("fuzzysum")


def _clusters_arg(values: list[str] | None) -> dict | None:
    if not values:
        return None
    out = {}
    for item in values:
        for part in item.split(","):
            attr, sep, k = part.partition("=")
            if not sep:
                raise argparse.ArgumentTypeError(f"--clusters expects attr=k, got {part!r}")
            out[attr.strip().upper()] = {"n_clusters": int(k)}
    return out


def _pair(value: str) -> tuple[str, str]:
    parts = [p.strip().upper() for p in value.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError("expected 'outer,inner'")
    return parts[0], parts[1]


def _attrs(value: str) -> list[str]:
    return [a.strip().upper() for a in value.split(",") if a.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key=value config file (default: ${CONFIG_ENV})")
    common.add_argument("--schema", help="FSQL CREATE TABLE script")
    common.add_argument("--labels", help="label definition sidecar")
    common.add_argument("--data", help="CSV records")
    common.add_argument("--attrs", type=_attrs, help="comma-separated attributes to summarize")
    common.add_argument("--alpha", type=float, help="alpha-cut on memberships (default 0.2)")
    common.add_argument("--clusters", action="append", help="per-attribute cluster count, attr=k")
    common.add_argument("--fuzzifier", type=float, help="FCM fuzzifier m > 1 (default 2.0)")
    common.add_argument("--seed", type=int, help="initialization seed (default 0)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "dot"], help="hierarchy format")
    common.add_argument("--nested", type=_pair, help="nested diagram attributes outer,inner")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fuzzysum", description="Summaries of fuzzy relational data")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check schema and label definitions")
    sub.add_parser("encode", parents=[common], help="emit the intermediate code matrix as CSV")
    p = sub.add_parser("cluster", parents=[common], help="emit purified memberships as CSV")
    p.add_argument("--joint", action="store_true", help="cluster selected attributes together")
    sub.add_parser("summarize", parents=[common], help="run the full pipeline")
    p = sub.add_parser("query", parents=[common], help="list the summaries at one level")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--hierarchy", help="read a saved JSON hierarchy instead of running the pipeline")
    p = sub.add_parser("export", parents=[common], help="render a hierarchy as JSON or DOT")
    p.add_argument("--hierarchy", help="read a saved JSON hierarchy instead of running the pipeline")
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = load_config(path) if path else PipelineConfig()
    return merge(
        cfg,
        {
            "schema_path": args.schema,
            "labels_path": args.labels,
            "data_path": args.data,
            "selected_attributes": args.attrs,
            "alpha": args.alpha,
            "fuzzifier": args.fuzzifier,
            "seed": args.seed,
            "out": args.out,
            "format": args.format,
            "nested": args.nested,
            "overrides": _clusters_arg(args.clusters),
        },
    )


def _emit(cfg: PipelineConfig, text: str) -> None:
    if cfg.out:
        try:
            write_atomic(cfg.out, text)
        except OSError as exc:
            raise PipelineError("io", f"cannot write {cfg.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _render(cfg: PipelineConfig, result) -> str:
    if cfg.nested:
        try:
            return nested_to_dot(nested_diagram(result.context, *cfg.nested))
        except LatticeError as exc:
            raise PipelineError("lattice", str(exc)) from None
    if cfg.format == "dot":
        return hierarchy_to_dot(result.hierarchy)
    return hierarchy_to_json(result.hierarchy)


def cmd_validate(cfg: PipelineConfig) -> int:
    if not cfg.schema_path:
        raise PipelineError("io", "no schema file given")
    try:
        catalog = parse_fsql_schema(open(cfg.schema_path, encoding="utf-8").read())
    except OSError as exc:
        raise PipelineError("io", str(exc)) from None
    except SchemaError as exc:
        raise PipelineError("parse", str(exc)) from None
    if cfg.labels_path:
        try:
            catalog = load_label_definitions(catalog, open(cfg.labels_path, encoding="utf-8").read())
        except OSError as exc:
            raise PipelineError("io", str(exc)) from None
        except (LabelDefinitionError, SchemaError) as exc:
            raise PipelineError("catalog", str(exc)) from None
    diags = validate_catalog(catalog)
    for d in diags:
        print(d)
    if diags:
        return EXIT_CODES["catalog"]
    print(f"{catalog.table_name}: {len(catalog.attributes)} attributes, "
          f"{len(catalog.fuzzy_attributes)} fuzzy, ok")
    return EXIT_OK


def cmd_encode(cfg: PipelineConfig) -> int:
    catalog = load_catalog(cfg)
    records = load_records(cfg, catalog)
    try:
        codebook = assign_codes(catalog)
        matrix = build_intermediate_matrix(records, codebook, selected_attributes(cfg, catalog))
    except EncodingError as exc:
        raise PipelineError("data", str(exc)) from None
    for rid, why in matrix.excluded_rows:
        log.warning("excluded %s: %s", rid, why)
    id_header = catalog.primary_key[0] if catalog.primary_key else "ID"
    _emit(cfg, matrix.to_csv(codebook, id_header))
    return EXIT_OK


def cmd_cluster(cfg: PipelineConfig, joint: bool) -> int:
    catalog = load_catalog(cfg)
    records = load_records(cfg, catalog)
    if joint:
        attrs = selected_attributes(cfg, catalog)
        k = next((o["n_clusters"] for o in cfg.overrides.values() if "n_clusters" in o), None)
        if k is None:
            k = max(len(catalog[a].labels) for a in attrs)
        try:
            parts = [joint_partition(records, catalog, attrs, FcmConfig(k, **cfg.fcm_defaults), cfg.alpha)]
        except ClusterError as exc:
            raise PipelineError("cluster", str(exc)) from None
        except EncodingError as exc:
            raise PipelineError("data", str(exc)) from None
    else:
        parts = cluster_stage(cfg, catalog, records)
    lines = ["record_id,descriptor,degree"]
    for p in parts:
        lines.extend(p.memberships.to_csv().splitlines()[1:])
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_summarize(cfg: PipelineConfig) -> int:
    result = run_pipeline(cfg)
    _emit(cfg, _render(cfg, result))
    print(result.report.render(), file=sys.stderr)
    return EXIT_OK


def _load_hierarchy(path: str):
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise PipelineError("io", str(exc)) from None
    try:
        return hierarchy_from_json(text)
    except (ValueError, KeyError) as exc:
        raise PipelineError("lattice", f"bad hierarchy file {path}: {exc}") from None


def cmd_query(cfg: PipelineConfig, level: int, hierarchy_path: str | None) -> int:
    h = _load_hierarchy(hierarchy_path) if hierarchy_path else run_pipeline(cfg).hierarchy
    try:
        entries = query_level(h, level)
    except LatticeError as exc:
        raise PipelineError("lattice", str(exc)) from None
    doc = [
        {
            "id": e.concept,
            "intent": list(e.intent),
            "card": e.card,
            "count": e.count,
            "top_records": [[r, d] for r, d in e.top_records],
        }
        for e in entries
    ]
    _emit(cfg, json.dumps({"level": level, "summaries": doc}, indent=2) + "\n")
    return EXIT_OK


def cmd_export(cfg: PipelineConfig, hierarchy_path: str | None) -> int:
    if hierarchy_path and not cfg.nested:
        h = _load_hierarchy(hierarchy_path)
        text = hierarchy_to_dot(h) if cfg.format == "dot" else hierarchy_to_json(h)
    else:
        text = _render(cfg, run_pipeline(cfg))
    _emit(cfg, text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        cfg.check()
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "encode":
            return cmd_encode(cfg)
        if args.command == "cluster":
            return cmd_cluster(cfg, args.joint)
        if args.command == "summarize":
            return cmd_summarize(cfg)
        if args.command == "query":
            return cmd_query(cfg, args.level, args.hierarchy)
        return cmd_export(cfg, args.hierarchy)
    except PipelineError as exc:
        print(f"fuzzysum: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
