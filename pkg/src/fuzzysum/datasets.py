"""Bundled example tables: EMPLOYEE (schema, labels, synthetic rows) and PERSONAL."""

from __future__ import annotations

import csv
import io
from importlib import resources

import numpy as np

from .encoder import Record, read_records
from .schema import SchemaCatalog, load_label_definitions, parse_fsql_schema


def read_text(name: str) -> str:
    return resources.files("fuzzysum").joinpath("data", name).read_text(encoding="utf-8")


def employee_catalog() -> SchemaCatalog:
    return load_label_definitions(
        parse_fsql_schema(read_text("employee.fsql")), read_text("employee.labels")
    )


def personal_catalog() -> SchemaCatalog:
    return load_label_definitions(
        parse_fsql_schema(read_text("personal.fsql")), read_text("personal.labels")
    )


def personal_records() -> list[Record]:
    return read_records(read_text("personal.csv"), personal_catalog())


_FIRST = ["Amel", "Ines", "Sami", "Rania", "Karim", "Leila", "Omar", "Nadia", "Yassine", "Salma"]
_LAST = ["Ben Ali", "Trabelsi", "Gharbi", "Jaziri", "Haddad", "Mansour", "Saidi", "Bouazizi"]
_PROFILES = [
    # (age centre, salary centre, productivity weights Bad/Regular/Good)
    (24, 100, (0.5, 0.4, 0.1)),
    (38, 350, (0.1, 0.5, 0.4)),
    (58, 700, (0.1, 0.3, 0.6)),
]


def synthetic_employee_csv(n: int = 30, seed: int = 7) -> str:
    """Deterministic EMPLOYEE rows mixing crisp, approximate, label and unknown ages."""
    rng = np.random.default_rng(seed)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["ID#", "NAME", "SURNAME", "ADDRESS", "AGE", "SALARY", "PRODUCTIVITY"])
    age_labels = ["Young", "Adult", "Old"]
    for i in range(n):
        g = i % len(_PROFILES)
        age_c, sal_c, prod_w = _PROFILES[g]
        age = int(np.clip(round(rng.normal(age_c, 3)), 18, 70))
        style = rng.random()
        if i == n - 1:
            age_cell = "#UNKNOWN"
        elif style < 0.2:
            age_cell = age_labels[g]
        elif style < 0.4:
            age_cell = f"~{age}"
        else:
            age_cell = str(age)
        salary = int(np.clip(round(rng.normal(sal_c, sal_c * 0.12)), 50, 1000))
        prod = ["Bad", "Regular", "Good"][int(rng.choice(3, p=prod_w))]
        w.writerow([
            f"E{i + 1:03d}",
            _FIRST[int(rng.integers(len(_FIRST)))],
            _LAST[int(rng.integers(len(_LAST)))],
            f"{int(rng.integers(1, 200))} Rue de Tunis",
            age_cell,
            salary,
            prod,
        ])
    return out.getvalue()


def synthetic_employee_records(n: int = 30, seed: int = 7) -> list[Record]:
    return read_records(synthetic_employee_csv(n, seed), employee_catalog())
