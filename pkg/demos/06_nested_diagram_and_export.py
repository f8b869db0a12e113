"""
Nested line diagrams and exports
================================

Render the hierarchy as JSON and DOT, and nest the SALARY lattice inside
the AGE lattice.
"""

import tempfile
from pathlib import Path

from fuzzysum import datasets
from fuzzysum.clustering import per_attribute_partitions
from fuzzysum.export import hierarchy_from_json, hierarchy_to_dot, hierarchy_to_json, nested_to_dot, write_atomic
from fuzzysum.lattice import build_fuzzy_context, build_hierarchy, nested_diagram

records = datasets.synthetic_employee_records(30)
parts = per_attribute_partitions(records, datasets.employee_catalog(), ["AGE", "SALARY"])
ctx = build_fuzzy_context(parts)
h = build_hierarchy(ctx)

text = hierarchy_to_json(h)
assert hierarchy_from_json(text) == h
print(text[:400], "...")

print(hierarchy_to_dot(h))

nd = nested_diagram(ctx, "AGE", "SALARY")
print(f"outer concepts: {len(nd.outer.concepts)}; inner sizes: {[len(i.concepts) for i in nd.inner]}")

out = Path(tempfile.mkdtemp()) / "nested.dot"
write_atomic(out, nested_to_dot(nd))
print("wrote", out, "- render with: dot -Tsvg", out)
