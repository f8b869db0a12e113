"""
Fuzzy c-means and the alpha-cut
===============================

Cluster three point clouds, then cluster each EMPLOYEE attribute and name
the clusters after the expert's labels.
"""

import numpy as np

from fuzzysum import datasets
from fuzzysum.clustering import FcmConfig, alpha_cut, fcm, per_attribute_partitions

rng = np.random.default_rng(0)
centres = np.array([[0.0, 0.0], [5.0, 5.0], [10.0, 0.0]])
points = np.vstack([c + rng.normal(0, 0.3, size=(20, 2)) for c in centres])

result = fcm(points, FcmConfig(n_clusters=3, seed=1))
print("centroids:\n", np.round(result.centroids, 2))
print("iterations:", result.n_iter, "converged:", result.converged)
print("objective:", [round(j, 3) for j in result.objective[:5]], "...")

# Memberships below the cut are dropped
cut = alpha_cut(result.memberships, 0.2)
print("entries kept after cut:", int(cut.kept.sum()), "of", cut.u.size)

records = datasets.synthetic_employee_records(30)
for part in per_attribute_partitions(records, datasets.employee_catalog()):
    cents = ", ".join(f"{c.descriptor}@{c.centroid[0]:.1f}" for c in part.clusters)
    print(f"{part.attribute:<13} {cents}")
