"""
A hierarchy of concept summaries
================================

Build the fuzzy context from the per-attribute partitions, enumerate its
concepts and browse them level by level.
"""

from fuzzysum import datasets
from fuzzysum.clustering import per_attribute_partitions
from fuzzysum.lattice import build_fuzzy_context, build_hierarchy, query_level

records = datasets.synthetic_employee_records(30)
parts = per_attribute_partitions(records, datasets.employee_catalog(), ["AGE", "SALARY"])
ctx = build_fuzzy_context(parts)
print(f"context: {len(ctx.objects)} records x {len(ctx.attributes)} descriptors")
print("dropped records:", ctx.dropped_objects)

h = build_hierarchy(ctx)
print(f"{len(h.concepts)} concepts, depth {h.depth}")

for k in range(h.depth + 1):
    print(f"\nlevel {k}")
    for e in query_level(h, k):
        intent = ", ".join(e.intent) or "(all records)"
        top = " ".join(f"{r}({d:.2f})" for r, d in e.top_records)
        print(f"  {{{intent}}}  card={e.card:.2f} count={e.count}  {top}")
