"""
Trapezoids, approximate values and similarity
=============================================

Membership degrees of linguistic labels, the triangle behind an
approximate value and lookups in a similarity relation.
"""

import numpy as np

from fuzzysum import datasets
from fuzzysum.fuzzy_domain import FuzzyValue, similarity_degree, trapezoid_membership

catalog = datasets.employee_catalog()
young = catalog["AGE"].trapezoid("Young")

for x in (20, 25, 32.5, 40):
    print(f"mu_Young({x}) = {trapezoid_membership(x, young):.3f}")

# Vectorized evaluation over a grid
ages = np.arange(15, 75, 5)
for t in catalog["AGE"].trapezoids:
    print(f"{t.name:<6}", np.round(trapezoid_membership(ages, t), 2))

# "about 30" with the attribute's margin of 5
about_30 = FuzzyValue.approximate(30, catalog["AGE"].margin)
print("\n~30 ->", about_30.distribution().points)

rel = catalog["PRODUCTIVITY"].similarity
for a in rel.labels:
    print(a.ljust(8), [similarity_degree(a, b, rel) for b in rel.labels])
