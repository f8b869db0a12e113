"""
Fuzzy schemas and expert labels
===============================

Parse an FSQL CREATE TABLE script, attach the expert's label sidecar and
look at the resulting catalog.
"""

from fuzzysum import datasets
from fuzzysum.schema import load_label_definitions, parse_fsql_schema, serialize_catalog, validate_catalog

schema_text = datasets.read_text("employee.fsql")
print(schema_text)

catalog = parse_fsql_schema(schema_text)
for attr in catalog.attributes:
    kind = attr.fuzzy_class.render() if attr.fuzzy_class else "crisp"
    print(f"{attr.position}. {attr.name:<13} {kind:<14} {attr.base_type}")

# Without labels the fuzzy attributes are incomplete
for diag in validate_catalog(catalog):
    print("  ", diag)

catalog = load_label_definitions(catalog, datasets.read_text("employee.labels"))
print("\nafter loading labels:", validate_catalog(catalog) or "no problems")

age = catalog["AGE"]
for t in age.trapezoids:
    print(f"  {t.name:<6} {t.points}")

prod = catalog["PRODUCTIVITY"]
print("\nproductivity similarity:")
print(prod.similarity.as_array())

# The catalog serializes back to a script that parses to the same catalog
print(serialize_catalog(catalog))
