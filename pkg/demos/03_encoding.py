"""
From fuzzy records to the intermediate matrix
=============================================

Every label gets a code ``attr.level``; levels start at 10 and step by the
attribute's threshold. The PERSONAL table encodes to four code pairs.
"""

from fuzzysum import datasets
from fuzzysum.encoder import assign_codes, build_intermediate_matrix, normalize_matrix

catalog = datasets.personal_catalog()
codebook = assign_codes(catalog)
for name in ("AGE", "EXPERIENCE"):
    coding = codebook[name]
    print(name, {lab: code.display() for lab, code in coding.codes.items()})

records = datasets.personal_records()
matrix = build_intermediate_matrix(records, codebook, ["AGE", "EXPERIENCE"])
print()
print(matrix.to_csv(codebook, "ID"))

print("normalized for clustering:")
print(normalize_matrix(matrix))

# Rows with a special marker in a selected attribute are set aside
employees = datasets.synthetic_employee_records(30)
emp_codes = assign_codes(datasets.employee_catalog())
m = build_intermediate_matrix(employees, emp_codes, ["AGE", "PRODUCTIVITY"])
print(m.shape, "kept;", "excluded:", m.excluded_rows)
