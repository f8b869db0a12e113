"""JSON and DOT renderings of summary hierarchies. Output is byte-stable."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .lattice import ConceptSummary, NestedDiagram, SummaryHierarchy, assign_levels

FORMAT_VERSION = 1


def _sorted_intent(h: SummaryHierarchy, z: ConceptSummary) -> list[str]:
    pos = {a: i for i, a in enumerate(h.attributes)}
    return sorted(z.intent, key=pos.__getitem__)


def hierarchy_to_json(h: SummaryHierarchy) -> str:
    nodes = [
        {
            "id": i,
            "level": h.level[i],
            "intent": _sorted_intent(h, z),
            "extent": [[r, d] for r, d in z.extent],
            "card": z.card,
            "count": z.count,
        }
        for i, z in enumerate(h.concepts)
    ]
    doc = {
        "format": FORMAT_VERSION,
        "objects": list(h.objects),
        "attributes": list(h.attributes),
        "nodes": nodes,
        "edges": [list(e) for e in h.edges],
    }
    return json.dumps(doc, indent=2) + "\n"


def hierarchy_from_json(text: str) -> SummaryHierarchy:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported hierarchy format {doc.get('format')!r}")
    nodes = sorted(doc["nodes"], key=lambda n: n["id"])
    concepts = tuple(
        ConceptSummary(frozenset(n["intent"]), tuple((r, float(d)) for r, d in n["extent"]))
        for n in nodes
    )
    edges = tuple(tuple(e) for e in doc["edges"])
    levels = tuple(n["level"] for n in nodes)
    if list(levels) != assign_levels(len(concepts), edges):
        raise ValueError("stored levels disagree with the edge structure")
    return SummaryHierarchy(
        tuple(doc["objects"]), tuple(doc["attributes"]), concepts, edges, levels
    )


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_label(h: SummaryHierarchy, z: ConceptSummary) -> str:
    intent = ", ".join(_sorted_intent(h, z)) or "(all records)"
    return f"{intent} / card={z.card:.6g}"


def hierarchy_to_dot(h: SummaryHierarchy, name: str = "summaries") -> str:
    """Hasse diagram, root at the top."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;", "  node [shape=box];"]
    for i, z in enumerate(h.concepts):
        lines.append(f"  n{i} [label={_quote(_node_label(h, z))}];")
    for p, c in h.edges:
        lines.append(f"  n{p} -> n{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def nested_to_dot(nd: NestedDiagram, name: str = "nested") -> str:
    """One cluster per outer concept holding the inner lattice."""
    lines = [f"digraph {_quote(name)} {{", "  compound=true;", "  node [shape=box];"]
    for i, (z, inner) in enumerate(zip(nd.outer.concepts, nd.inner)):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_quote(_node_label(nd.outer, z))};")
        for k, w in enumerate(inner.concepts):
            lines.append(f"    o{i}_i{k} [label={_quote(_node_label(inner, w))}];")
        for p, c in inner.edges:
            lines.append(f"    o{i}_i{p} -> o{i}_i{c};")
        lines.append("  }")
    for p, c in nd.outer.edges:
        lines.append(f"  o{p}_i0 -> o{c}_i0 [ltail=cluster_{p}, lhead=cluster_{c}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
