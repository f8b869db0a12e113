import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EMPLOYEE_DDL
from fuzzysum.fuzzy_domain import ValueKind
from fuzzysum.schema import (
    AttributeDef,
    FsqlSyntaxError,
    FuzzyTypeClass,
    LabelDefinitionError,
    SchemaCatalog,
    SchemaError,
    load_label_definitions,
    parse_fsql_schema,
    serialize_catalog,
    serialize_label_definitions,
    validate_catalog,
)


def test_employee_ddl_parse():
    cat = parse_fsql_schema(EMPLOYEE_DDL)
    assert cat.table_name == "EMPLOYEE"
    assert cat.names == ["ID#", "NAME", "SURNAME", "ADDRESS", "AGE", "SALARY", "PRODUCTIVITY"]
    assert cat["AGE"].fuzzy_class == FuzzyTypeClass(2, margin=5, threshold=10)
    assert cat["AGE"].default_special is ValueKind.UNKNOWN
    assert cat["AGE"].base_type == "NUMBER(3)"
    assert not cat["AGE"].nullable
    assert cat["SALARY"].fuzzy_class == FuzzyTypeClass(1, margin=10, threshold=50)
    assert cat["PRODUCTIVITY"].fuzzy_class == FuzzyTypeClass(3, n=1)
    assert cat["PRODUCTIVITY"].base_type is None
    assert cat["NAME"].is_crisp
    assert cat.primary_key == ("ID#",)
    assert [a.position for a in cat.attributes] == list(range(1, 8))


def test_minimal_crisp_table():
    cat = parse_fsql_schema("CREATE TABLE T (A VARCHAR(4) NOT NULL, PRIMARY KEY (A));")
    assert cat.table_name == "T"
    assert cat["A"].is_crisp
    assert cat.primary_key == ("A",)


def test_identifiers_are_case_insensitive():
    cat = parse_fsql_schema("create table emp (age ftype2(5,10) number(3), primary key (AGE))")
    assert cat.table_name == "EMP"
    assert "age" in cat and cat["Age"].name == "AGE"


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        ("CREATE TABLE T (A FTYPE2(5) NUMBER(3));", "FTYPE2 takes 2", 1),
        ("CREATE TABLE T (A FTYPE3(1,2));", "FTYPE3 takes 1", 1),
        ("CREATE TABLE T (A FTYPE5(1));", "unknown fuzzy type", 1),
        ("CREATE TABLE T (\n  A INT,\n  A INT);", "duplicate column", 3),
        ("CREATE TABLE T (A INT,\n PRIMARY KEY (B));", "unknown column B", 2),
        ("CREATE TABLE T (A INT DEFAULT ZERO);", "expected UNKNOWN", 1),
        ("CREATE TABLE T (A);", "expected a type", 1),
        ("CREATE TABLE T (A INT) extra", "end of statement", 1),
        ("SELECT A FROM T", "expected CREATE", 1),
        ("CREATE TABLE T (A INT", "expected ')'", 1),
        ("CREATE TABLE T (A INT @)", "unexpected character", 1),
    ],
)
def test_rejections_carry_position(text, fragment, line):
    with pytest.raises(FsqlSyntaxError) as err:
        parse_fsql_schema(text)
    assert fragment in str(err.value)
    assert err.value.line == line
    assert err.value.column is not None and err.value.column >= 1


def test_syntax_error_column():
    with pytest.raises(FsqlSyntaxError) as err:
        parse_fsql_schema("CREATE TABLE T (\n  A FTYPE2(5) NUMBER(3));")
    assert (err.value.line, err.value.column) == (2, 5)


def test_primary_key_implies_not_null():
    cat = parse_fsql_schema("CREATE TABLE T (A INT, PRIMARY KEY (A))")
    assert not cat["A"].nullable


def test_empty_catalog_cannot_be_constructed():
    with pytest.raises(SchemaError):
        SchemaCatalog("T", ())


def test_serialize_roundtrip_and_determinism():
    cat = parse_fsql_schema(EMPLOYEE_DDL)
    text = serialize_catalog(cat)
    assert parse_fsql_schema(text) == cat
    assert serialize_catalog(parse_fsql_schema(text)).encode() == text.encode()


# -- generated schemas -----------------------------------------------------

_KEYWORDS = {"CREATE", "TABLE", "PRIMARY", "KEY", "NOT", "NULL", "DEFAULT"}
idents = st.from_regex(r"[A-Z][A-Z0-9_#]{0,7}", fullmatch=True).filter(
    lambda s: s not in _KEYWORDS and not s.startswith("FTYPE")
)
numbers = st.one_of(st.integers(0, 500), st.floats(0, 500, allow_nan=False).map(lambda x: round(x, 3)))
ftypes = st.one_of(
    st.none(),
    st.builds(lambda k, m, t: FuzzyTypeClass(k, margin=m, threshold=t), st.sampled_from([1, 2]), numbers, numbers),
    st.builds(lambda k, n: FuzzyTypeClass(k, n=n), st.sampled_from([3, 4]), st.integers(1, 9)),
)
base_types = st.one_of(
    st.none(),
    st.sampled_from(["INT", "DATE", "FLOAT"]),
    st.builds(lambda b, n: f"{b}({n})", st.sampled_from(["VARCHAR", "NUMBER", "CHAR"]), st.integers(1, 99)),
    st.builds(lambda p, s: f"NUMBER({p},{s})", st.integers(1, 20), st.integers(0, 5)),
)


@st.composite
def catalogs(draw):
    names = draw(st.lists(idents, min_size=1, max_size=7, unique=True))
    attrs = []
    for pos, name in enumerate(names, start=1):
        fc = draw(ftypes)
        base = draw(base_types)
        if fc is None and base is None:
            base = "INT"
        attrs.append(
            AttributeDef(
                name,
                pos,
                fuzzy_class=fc,
                base_type=base,
                nullable=draw(st.booleans()),
                default_special=draw(st.sampled_from([None, ValueKind.UNKNOWN, ValueKind.UNDEFINED, ValueKind.NULL])),
            )
        )
    pk = draw(st.lists(st.sampled_from(names), max_size=2, unique=True))
    attrs = [dataclasses.replace(a, nullable=False) if a.name in pk else a for a in attrs]
    return SchemaCatalog(draw(idents), tuple(attrs), tuple(pk))


@settings(max_examples=100, deadline=None)
@given(catalogs())
def test_generated_schemas_roundtrip(cat):
    text = serialize_catalog(cat)
    parsed = parse_fsql_schema(text)
    assert parsed == cat
    assert parse_fsql_schema(serialize_catalog(parsed)) == parsed
    assert serialize_catalog(parsed) == text


# -- label sidecar ---------------------------------------------------------

AGE_ONLY = "CREATE TABLE P (ID INT, AGE FTYPE2(5,10) NUMBER(3), PRIMARY KEY (ID))"


def test_load_age_labels():
    cat = load_label_definitions(
        parse_fsql_schema(AGE_ONLY),
        """attribute AGE
label Young trapezoid 18 22 30 35
label Adult trapezoid 25 32 45 50
label Old trapezoid 50 55 62 70
""",
    )
    assert cat["AGE"].labels == ("Young", "Adult", "Old")
    assert cat["AGE"].trapezoid("old").points == (50, 55, 62, 70)
    assert validate_catalog(cat) == []


def test_non_monotone_trapezoid_rejected():
    with pytest.raises(LabelDefinitionError, match="non-monotone trapezoid") as err:
        load_label_definitions(parse_fsql_schema(AGE_ONLY), "attribute AGE\nlabel Young trapezoid 22 18 30 35\n")
    assert err.value.line == 2


def test_productivity_similarity(employee_catalog):
    prod = employee_catalog["PRODUCTIVITY"]
    assert prod.labels == ("Bad", "Regular", "Good")
    assert prod.similarity.degrees[1][2] == 0.7
    assert prod.similarity.problems() == []


def test_missing_definitions_named():
    with pytest.raises(LabelDefinitionError, match="AGE"):
        load_label_definitions(parse_fsql_schema(AGE_ONLY), "")


def test_similarity_not_square():
    schema = parse_fsql_schema("CREATE TABLE T (P FTYPE3(1))")
    with pytest.raises(LabelDefinitionError, match="not square"):
        load_label_definitions(schema, "attribute P\nlabels a b c\nsimilarity\n1 0.5\n0.5 1\n")
    with pytest.raises(LabelDefinitionError, match="not square"):
        load_label_definitions(schema, "attribute P\nlabels a b\nsimilarity\n1 0.5\n")


def test_ftype4_rejects_similarity_and_ftype3_requires_it():
    with pytest.raises(LabelDefinitionError, match="must not carry"):
        load_label_definitions(
            parse_fsql_schema("CREATE TABLE T (P FTYPE4(1))"),
            "attribute P\nlabels a b\nsimilarity\n1 0\n0 1\n",
        )
    with pytest.raises(LabelDefinitionError, match="similarity"):
        load_label_definitions(parse_fsql_schema("CREATE TABLE T (P FTYPE3(1))"), "attribute P\nlabels a b\n")


def test_definitions_for_crisp_or_unknown_attribute():
    schema = parse_fsql_schema("CREATE TABLE T (A INT, P FTYPE4(1))")
    with pytest.raises(LabelDefinitionError, match="crisp"):
        load_label_definitions(schema, "attribute A\nlabels x\nattribute P\nlabels a\n")
    with pytest.raises(LabelDefinitionError, match="unknown attribute"):
        load_label_definitions(schema, "attribute Q\nlabels x\n")


def test_duplicate_label_rejected():
    with pytest.raises(LabelDefinitionError, match="duplicate label"):
        load_label_definitions(parse_fsql_schema("CREATE TABLE T (P FTYPE4(1))"), "attribute P\nlabels a A\n")


def test_label_sidecar_roundtrip(employee_catalog):
    bare = dataclasses.replace(
        employee_catalog,
        attributes=tuple(
            dataclasses.replace(a, labels=(), trapezoids=(), similarity=None, code_step=None)
            for a in employee_catalog.attributes
        ),
    )
    again = load_label_definitions(bare, serialize_label_definitions(employee_catalog))
    assert again == employee_catalog


# -- validation ------------------------------------------------------------


def test_valid_employee_catalog(employee_catalog):
    assert validate_catalog(employee_catalog) == []


def test_missing_similarity_diagnostic(employee_catalog):
    broken = employee_catalog.replace_attribute(
        dataclasses.replace(employee_catalog["PRODUCTIVITY"], similarity=None)
    )
    diags = validate_catalog(broken)
    assert [(d.attribute, d.rule) for d in diags] == [("PRODUCTIVITY", "similarity-required")]
    assert "missing similarity" in str(diags[0])


def test_zero_threshold_diagnostic(employee_catalog):
    age = employee_catalog["AGE"]
    broken = employee_catalog.replace_attribute(
        dataclasses.replace(age, fuzzy_class=FuzzyTypeClass(2, margin=5, threshold=0))
    )
    diags = validate_catalog(broken)
    assert [(d.attribute, d.rule) for d in diags] == [("AGE", "threshold-positive")]
    assert "threshold must be positive" in diags[0].message


def test_asymmetric_similarity_and_nullable_key(employee_catalog):
    from fuzzysum.fuzzy_domain import SimilarityRelation

    prod = employee_catalog["PRODUCTIVITY"]
    bad = SimilarityRelation.from_matrix(prod.labels, [[1, 0.3, 0.2], [0.4, 1, 0.7], [0.2, 0.7, 0.9]])
    cat = employee_catalog.replace_attribute(dataclasses.replace(prod, similarity=bad))
    cat = cat.replace_attribute(dataclasses.replace(cat["ID#"], nullable=True))
    rules = {(d.attribute, d.rule) for d in validate_catalog(cat)}
    assert ("PRODUCTIVITY", "similarity-relation") in rules
    assert ("ID#", "primary-key-not-null") in rules
    assert len([d for d in validate_catalog(cat) if d.rule == "similarity-relation"]) == 2


def test_declared_label_count_bound(employee_catalog):
    prod = employee_catalog["PRODUCTIVITY"]
    cat = employee_catalog.replace_attribute(dataclasses.replace(prod, fuzzy_class=FuzzyTypeClass(3, n=4)))
    assert [d.rule for d in validate_catalog(cat)] == ["n-labels-bound"]
