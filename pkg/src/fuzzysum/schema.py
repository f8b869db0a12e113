"""FSQL ``CREATE TABLE`` subset parser and the label-definition sidecar.

The accepted grammar::

    CREATE TABLE name ( element {, element} ) [;]
    element := PRIMARY KEY ( name {, name} )
             | name [ftype] [base_type] {NOT NULL | NULL | DEFAULT special}
    ftype   := FTYPE1(margin, threshold) | FTYPE2(margin, threshold)
             | FTYPE3(n) | FTYPE4(n)
    special := UNKNOWN | UNDEFINED | NULL

Identifiers are case-insensitive and stored upper-cased.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Iterator

from .fuzzy_domain import (
    DomainError,
    SimilarityRelation,
    TrapezoidLabel,
    ValueKind,
)

BASE_TYPES = frozenset(
    {"VARCHAR", "VARCHAR2", "CHAR", "TEXT", "NUMBER", "NUMERIC", "DECIMAL",
     "INTEGER", "INT", "FLOAT", "REAL", "DATE"}
)
NUMERIC_BASE_TYPES = frozenset({"NUMBER", "NUMERIC", "DECIMAL", "INTEGER", "INT", "FLOAT", "REAL"})
_SPECIALS = {"UNKNOWN": ValueKind.UNKNOWN, "UNDEFINED": ValueKind.UNDEFINED, "NULL": ValueKind.NULL}


class SchemaError(ValueError):
    """Rejected schema or label document; ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class FsqlSyntaxError(SchemaError):
    pass


class LabelDefinitionError(SchemaError):
    pass


@dataclass(frozen=True)
class FuzzyTypeClass:
    """GEFRED attribute class. ``kind`` is 1..4.

    FTYPE1/FTYPE2 carry ``margin`` and ``threshold``; FTYPE3/FTYPE4 carry
    ``n``, the declared label-count parameter.
    """

    kind: int
    margin: float | None = None
    threshold: float | None = None
    n: int | None = None

    def __post_init__(self):
        if self.kind not in (1, 2, 3, 4):
            raise SchemaError(f"unknown fuzzy type FTYPE{self.kind}")

    @property
    def ordered(self) -> bool:
        return self.kind in (1, 2)

    def render(self) -> str:
        if self.ordered:
            return f"FTYPE{self.kind}({_fmt_num(self.margin)},{_fmt_num(self.threshold)})"
        return f"FTYPE{self.kind}({self.n})"


@dataclass(frozen=True)
class AttributeDef:
    name: str
    position: int
    fuzzy_class: FuzzyTypeClass | None = None
    base_type: str | None = None
    nullable: bool = True
    default_special: ValueKind | None = None
    labels: tuple[str, ...] = ()
    trapezoids: tuple[TrapezoidLabel, ...] = ()
    similarity: SimilarityRelation | None = None
    code_step: float | None = None

    @property
    def is_crisp(self) -> bool:
        return self.fuzzy_class is None

    @property
    def kind(self) -> int | None:
        return None if self.fuzzy_class is None else self.fuzzy_class.kind

    @property
    def is_numeric(self) -> bool:
        if self.fuzzy_class is not None and self.fuzzy_class.ordered:
            return True
        if self.base_type is None:
            return False
        return self.base_type.split("(")[0] in NUMERIC_BASE_TYPES

    @property
    def threshold(self) -> float | None:
        """Code step: the declared threshold (FTYPE1/2) or the sidecar step (FTYPE3/4)."""
        if self.fuzzy_class is not None and self.fuzzy_class.ordered:
            return self.fuzzy_class.threshold
        return self.code_step

    @property
    def margin(self) -> float:
        if self.fuzzy_class is not None and self.fuzzy_class.margin is not None:
            return self.fuzzy_class.margin
        return 0.0

    def trapezoid(self, label: str) -> TrapezoidLabel:
        key = label.casefold()
        for t in self.trapezoids:
            if t.name.casefold() == key:
                return t
        raise KeyError(label)


@dataclass(frozen=True)
class SchemaCatalog:
    table_name: str
    attributes: tuple[AttributeDef, ...]
    primary_key: tuple[str, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.attributes:
            raise SchemaError(f"table {self.table_name} declares no attributes")
        object.__setattr__(self, "_index", {a.name: a for a in self.attributes})

    def __getitem__(self, name: str) -> AttributeDef:
        try:
            return self._index[name.upper()]
        except KeyError:
            raise KeyError(f"unknown attribute {name!r} in table {self.table_name}") from None

    def __contains__(self, name: str) -> bool:
        return name.upper() in self._index

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def fuzzy_attributes(self) -> list[AttributeDef]:
        return [a for a in self.attributes if a.fuzzy_class is not None]

    def replace_attribute(self, attr: AttributeDef) -> "SchemaCatalog":
        attrs = tuple(attr if a.name == attr.name else a for a in self.attributes)
        return dataclasses.replace(self, attributes=attrs)


# --------------------------------------------------------------------------
# Tokenizer + recursive-descent parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_#$]*)
  | (?P<punct>[(),;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int

    @property
    def upper(self) -> str:
        return self.text.upper()


def _tokenize(text: str) -> Iterator[_Token]:
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FsqlSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            yield _Token(kind, m.group(), line, pos - line_start + 1)
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    yield _Token("eof", "", line, pos - line_start + 1)


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: _Token | None = None) -> FsqlSyntaxError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return FsqlSyntaxError(f"{message}, found {found}", tok.line, tok.column)

    def advance(self) -> _Token:
        tok = self.tok
        self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        return self.tok.kind == "ident" and self.tok.upper in words

    def expect_keyword(self, word: str) -> _Token:
        if not self.at_keyword(word):
            raise self.error(f"expected {word}")
        return self.advance()

    def expect_punct(self, p: str) -> _Token:
        if not (self.tok.kind == "punct" and self.tok.text == p):
            raise self.error(f"expected {p!r}")
        return self.advance()

    def at_punct(self, p: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == p

    def identifier(self, what: str) -> _Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}")
        return self.advance()

    def number(self) -> float | int:
        if self.tok.kind != "number":
            raise self.error("expected a number")
        return _parse_num(self.advance().text)

    def number_list(self) -> list:
        self.expect_punct("(")
        values = [self.number()]
        while self.at_punct(","):
            self.advance()
            values.append(self.number())
        self.expect_punct(")")
        return values

    def parse(self) -> SchemaCatalog:
        self.expect_keyword("CREATE")
        self.expect_keyword("TABLE")
        table = self.identifier("table name").upper
        self.expect_punct("(")
        columns: list[AttributeDef] = []
        seen: set[str] = set()
        pk: list[tuple[str, _Token]] | None = None
        while True:
            if self.at_keyword("PRIMARY"):
                if pk is not None:
                    raise self.error("duplicate PRIMARY KEY clause")
                pk = self.primary_key()
            else:
                name_tok = self.tok
                col = self.column(len(columns) + 1)
                if col.name in seen:
                    raise FsqlSyntaxError(
                        f"duplicate column name {col.name}", name_tok.line, name_tok.column
                    )
                seen.add(col.name)
                columns.append(col)
            if self.at_punct(","):
                self.advance()
                continue
            self.expect_punct(")")
            break
        if self.at_punct(";"):
            self.advance()
        if self.tok.kind != "eof":
            raise self.error("expected end of statement")
        if not columns:
            raise self.error("table declares no columns")

        key: list[str] = []
        for name, tok in pk or []:
            if name not in seen:
                raise FsqlSyntaxError(
                    f"PRIMARY KEY references unknown column {name}", tok.line, tok.column
                )
            key.append(name)
        # PRIMARY KEY implies NOT NULL
        columns = [
            dataclasses.replace(c, nullable=False) if c.name in key else c for c in columns
        ]
        return SchemaCatalog(table, tuple(columns), tuple(key))

    def primary_key(self) -> list[tuple[str, _Token]]:
        self.expect_keyword("PRIMARY")
        self.expect_keyword("KEY")
        self.expect_punct("(")
        names = []
        tok = self.identifier("column name")
        names.append((tok.upper, tok))
        while self.at_punct(","):
            self.advance()
            tok = self.identifier("column name")
            names.append((tok.upper, tok))
        self.expect_punct(")")
        return names

    def column(self, position: int) -> AttributeDef:
        name = self.identifier("column name or PRIMARY KEY").upper
        fuzzy = None
        if self.tok.kind == "ident" and re.fullmatch(r"FTYPE\d+", self.tok.upper):
            fuzzy = self.ftype()
        base = None
        if self.tok.kind == "ident" and self.tok.upper in BASE_TYPES:
            base_tok = self.advance()
            base = base_tok.upper
            if self.at_punct("("):
                base += "(" + ",".join(_fmt_num(v) for v in self.number_list()) + ")"
        if fuzzy is None and base is None:
            raise self.error(f"expected a type for column {name}")
        nullable, default = True, None
        while True:
            if self.at_keyword("NOT"):
                self.advance()
                self.expect_keyword("NULL")
                nullable = False
            elif self.at_keyword("NULL"):
                self.advance()
                nullable = True
            elif self.at_keyword("DEFAULT"):
                self.advance()
                if not self.at_keyword(*_SPECIALS):
                    raise self.error("expected UNKNOWN, UNDEFINED or NULL after DEFAULT")
                default = _SPECIALS[self.advance().upper]
            else:
                break
        return AttributeDef(
            name=name,
            position=position,
            fuzzy_class=fuzzy,
            base_type=base,
            nullable=nullable,
            default_special=default,
        )

    def ftype(self) -> FuzzyTypeClass:
        tok = self.advance()
        kind = int(tok.upper[5:])
        if kind not in (1, 2, 3, 4):
            raise FsqlSyntaxError(f"unknown fuzzy type {tok.upper}", tok.line, tok.column)
        args = self.number_list()
        expected = 2 if kind in (1, 2) else 1
        if len(args) != expected:
            raise FsqlSyntaxError(
                f"{tok.upper} takes {expected} argument(s), got {len(args)}", tok.line, tok.column
            )
        if kind in (1, 2):
            return FuzzyTypeClass(kind, margin=args[0], threshold=args[1])
        if not isinstance(args[0], int):
            raise FsqlSyntaxError(f"{tok.upper} argument must be an integer", tok.line, tok.column)
        return FuzzyTypeClass(kind, n=args[0])


def _parse_num(text: str) -> float | int:
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    return float(text)


def _fmt_num(v) -> str:
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def parse_fsql_schema(text: str) -> SchemaCatalog:
    """Parse one ``CREATE TABLE`` statement into a catalog."""
    return _Parser(text).parse()


def serialize_catalog(catalog: SchemaCatalog) -> str:
    """Canonical DDL for ``catalog``; reparsing it yields an equal catalog."""
    lines = []
    for a in catalog.attributes:
        parts = [a.name]
        if a.fuzzy_class is not None:
            parts.append(a.fuzzy_class.render())
        if a.base_type is not None:
            parts.append(a.base_type)
        if a.default_special is not None:
            parts.append("DEFAULT " + a.default_special.name)
        if not a.nullable:
            parts.append("NOT NULL")
        lines.append("  " + " ".join(parts))
    if catalog.primary_key:
        lines.append("  PRIMARY KEY (" + ", ".join(catalog.primary_key) + ")")
    return f"CREATE TABLE {catalog.table_name} (\n" + ",\n".join(lines) + "\n);\n"


# --------------------------------------------------------------------------
# Label sidecar


@dataclass
class _LabelBlock:
    attribute: str
    line: int
    trapezoids: list[TrapezoidLabel] = field(default_factory=list)
    labels: list[str] | None = None
    similarity: list[list[float]] | None = None
    threshold: float | None = None


def _words(line: str) -> list[str]:
    # full-line comments only: '#' is legal inside identifiers such as ID#
    return [] if line.lstrip().startswith("#") else line.split()


def _parse_label_document(text: str) -> dict[str, _LabelBlock]:
    blocks: dict[str, _LabelBlock] = {}
    current: _LabelBlock | None = None
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        words = _words(lines[i])
        i += 1
        if not words:
            continue
        key = words[0].lower()
        if key == "attribute":
            if len(words) != 2:
                raise LabelDefinitionError("expected 'attribute <NAME>'", lineno)
            name = words[1].upper()
            if name in blocks:
                raise LabelDefinitionError(f"duplicate block for attribute {name}", lineno)
            current = blocks[name] = _LabelBlock(name, lineno)
            continue
        if current is None:
            raise LabelDefinitionError(f"{words[0]!r} outside an attribute block", lineno)
        if key == "label":
            if len(words) != 7 or words[2].lower() != "trapezoid":
                raise LabelDefinitionError("expected 'label <Name> trapezoid a b c d'", lineno)
            try:
                a, b, c, d = (_parse_num(w) for w in words[3:])
            except ValueError:
                raise LabelDefinitionError("trapezoid points must be numbers", lineno) from None
            try:
                current.trapezoids.append(TrapezoidLabel(words[1], a, b, c, d))
            except DomainError as exc:
                raise LabelDefinitionError(str(exc), lineno) from None
        elif key == "labels":
            if current.labels is not None:
                raise LabelDefinitionError("duplicate 'labels' line", lineno)
            if len(words) < 2:
                raise LabelDefinitionError("'labels' needs at least one name", lineno)
            current.labels = words[1:]
        elif key == "threshold":
            if len(words) != 2:
                raise LabelDefinitionError("expected 'threshold <t>'", lineno)
            current.threshold = _parse_num(words[1])
        elif key == "similarity":
            if current.labels is None:
                raise LabelDefinitionError("'similarity' must follow a 'labels' line", lineno)
            n = len(current.labels)
            rows = []
            while len(rows) < n and i < len(lines):
                row_words = _words(lines[i])
                if row_words and row_words[0].lower() in ("attribute", "label", "labels", "similarity", "threshold"):
                    break
                i += 1
                if not row_words:
                    continue
                try:
                    row = [float(w) for w in row_words]
                except ValueError:
                    raise LabelDefinitionError("similarity degrees must be numbers", i) from None
                if len(row) != n:
                    raise LabelDefinitionError(
                        f"similarity matrix not square: row has {len(row)} entries, expected {n}", i
                    )
                rows.append(row)
            if len(rows) != n:
                raise LabelDefinitionError(
                    f"similarity matrix not square: {len(rows)} rows for {n} labels", lineno
                )
            current.similarity = rows
        else:
            raise LabelDefinitionError(f"unknown directive {words[0]!r}", lineno)
    return blocks


def load_label_definitions(catalog: SchemaCatalog, defs: str) -> SchemaCatalog:
    """Attach label definitions (sidecar text) to every fuzzy attribute of ``catalog``."""
    blocks = _parse_label_document(defs)
    for name, block in blocks.items():
        if name not in catalog:
            raise LabelDefinitionError(f"definitions for unknown attribute {name}", block.line)
        if catalog[name].fuzzy_class is None:
            raise LabelDefinitionError(f"attribute {name} is crisp and takes no labels", block.line)

    for attr in catalog.fuzzy_attributes:
        block = blocks.get(attr.name)
        if block is None:
            raise LabelDefinitionError(f"missing label definitions for fuzzy attribute {attr.name}")
        kind = attr.fuzzy_class.kind
        if kind in (1, 2):
            if not block.trapezoids:
                raise LabelDefinitionError(
                    f"FTYPE{kind} attribute {attr.name} needs 'label ... trapezoid' lines", block.line
                )
            if block.labels is not None or block.similarity is not None or block.threshold is not None:
                raise LabelDefinitionError(
                    f"FTYPE{kind} attribute {attr.name} takes only trapezoid labels", block.line
                )
            names = tuple(t.name for t in block.trapezoids)
            _check_unique(attr.name, names, block.line)
            attr = dataclasses.replace(attr, labels=names, trapezoids=tuple(block.trapezoids))
        else:
            if block.trapezoids:
                raise LabelDefinitionError(
                    f"FTYPE{kind} attribute {attr.name} is unordered; use 'labels'", block.line
                )
            if block.labels is None:
                raise LabelDefinitionError(f"missing 'labels' for attribute {attr.name}", block.line)
            _check_unique(attr.name, block.labels, block.line)
            similarity = None
            if kind == 3:
                if block.similarity is None:
                    raise LabelDefinitionError(
                        f"FTYPE3 attribute {attr.name} needs a similarity matrix", block.line
                    )
                similarity = SimilarityRelation.from_matrix(block.labels, block.similarity)
            elif block.similarity is not None:
                raise LabelDefinitionError(
                    f"FTYPE4 attribute {attr.name} must not carry a similarity relation", block.line
                )
            attr = dataclasses.replace(
                attr, labels=tuple(block.labels), similarity=similarity, code_step=block.threshold
            )
        catalog = catalog.replace_attribute(attr)
    return catalog


def _check_unique(attr: str, names, line: int) -> None:
    seen = set()
    for n in names:
        if n.casefold() in seen:
            raise LabelDefinitionError(f"duplicate label {n!r} in attribute {attr}", line)
        seen.add(n.casefold())


def serialize_label_definitions(catalog: SchemaCatalog) -> str:
    out = []
    for attr in catalog.fuzzy_attributes:
        if not attr.labels:
            continue
        out.append(f"attribute {attr.name}")
        if attr.trapezoids:
            for t in attr.trapezoids:
                pts = " ".join(_fmt_num(p) for p in t.points)
                out.append(f"label {t.name} trapezoid {pts}")
        else:
            out.append("labels " + " ".join(attr.labels))
            if attr.code_step is not None:
                out.append(f"threshold {_fmt_num(attr.code_step)}")
            if attr.similarity is not None:
                out.append("similarity")
                for row in attr.similarity.degrees:
                    out.append(" ".join(_fmt_num(v) for v in row))
        out.append("")
    return "\n".join(out)


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    attribute: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.attribute}: {self.message} [{self.rule}]"


def validate_catalog(catalog: SchemaCatalog) -> list[Diagnostic]:
    """Check type, label and similarity invariants. Empty list means valid."""
    diags: list[Diagnostic] = []

    def add(attr, rule, message):
        diags.append(Diagnostic(attr, rule, message))

    for expected, attr in enumerate(catalog.attributes, start=1):
        if attr.position != expected:
            add(attr.name, "contiguous-positions", f"position {attr.position}, expected {expected}")
        if len({n.casefold() for n in attr.labels}) != len(attr.labels):
            add(attr.name, "unique-labels", "label names are not unique")
        fc = attr.fuzzy_class
        if fc is None:
            if attr.labels:
                add(attr.name, "crisp-labels", "crisp attribute carries labels")
            continue
        if fc.ordered:
            if fc.margin is None or fc.margin < 0:
                add(attr.name, "margin-nonnegative", "margin must be non-negative")
            if fc.threshold is None or not fc.threshold > 0:
                add(attr.name, "threshold-positive", "threshold must be positive")
            if attr.similarity is not None:
                add(attr.name, "no-similarity", f"FTYPE{fc.kind} does not take a similarity relation")
        else:
            if fc.n is None or fc.n < 1:
                add(attr.name, "n-labels-positive", "label count parameter must be at least 1")
            elif attr.labels and fc.n > len(attr.labels):
                add(attr.name, "n-labels-bound",
                    f"declared FTYPE{fc.kind}({fc.n}) exceeds the {len(attr.labels)} defined labels")
            if attr.code_step is not None and not attr.code_step > 0:
                add(attr.name, "threshold-positive", "threshold must be positive")
        if not attr.labels:
            add(attr.name, "labels-defined", "missing label definitions")
        if fc.kind == 3:
            if attr.similarity is None:
                add(attr.name, "similarity-required", "missing similarity relation")
            else:
                if [l.casefold() for l in attr.similarity.labels] != [l.casefold() for l in attr.labels]:
                    add(attr.name, "similarity-labels", "similarity labels differ from declared labels")
                for problem in attr.similarity.problems():
                    add(attr.name, "similarity-relation", problem)
        if fc.kind == 4 and attr.similarity is not None:
            add(attr.name, "no-similarity", "FTYPE4 must not carry a similarity relation")

    names = set(catalog.names)
    for key in catalog.primary_key:
        if key not in names:
            add(key, "primary-key-exists", "primary key references an unknown attribute")
        elif catalog[key].nullable:
            add(key, "primary-key-not-null", "primary key attribute is nullable")
    return diags
