"""Command line front end: a small declaration language for balance systems,
analysis drivers, and text / LaTeX / structured renderers.

System files are semicolon-separated statements:

    base t x;
    fields u;
    F[u,t] = u;
    F[u,x] = -(u^2/2 + u_x);
    Pi[u] = 0;

* ``base`` and ``fields`` declare coordinate and field names (letters then
  letters/digits; the underscore is reserved for jet tokens).
* ``density`` (optional) sets a nonzero polynomial volume density in the
  base coordinates; default 1.
* ``F[field, coords] = expr`` declares a flux entry.  ``coords`` is a run of
  base-coordinate names read as a multiset, so ``F[u,xx]`` is a second-order
  entry; entries of order one form an ordinary balance system.
* ``Pi[field] = expr`` declares a source.
* ``title "..."`` and ``note "..."`` attach metadata.

Expressions use integers, rationals p/q, ``+ - * ^`` with the usual
precedence, parentheses, and juxtaposition as multiplication; division is
defined only by nonzero rational constants.  Jet tokens are field names with
a coordinate suffix (``u_t``, ``u_xx``, ``v_xy``); the explicit form
``d(u; 2,0)`` is accepted for charts whose names make suffixes ambiguous.

Exit status: 0 when the analyses ran (verdicts may be negative), 2 on input
errors, 3 on internal invariant violations.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .balance import (
    BalanceSystem,
    OrderTooHighError,
    balance_residuals,
    decompose,
    divergence_split,
    evaluate_on_section,
    godunov_check,
    helmholtz_check,
    quasi_lagrangian,
    source_form,
    symmetric_hyperbolicity,
    trivial_quasi_lagrangian,
)
from .jetforms import Form, form_latex, form_text, poly_latex
from .symcore import Chart, EngineError, InvalidSystemError, Poly, poly_text
from .variational import HigherBalanceData, higher_balance_residuals

COMMANDS = ("equations", "check", "decompose", "hyperbolic", "higher", "verify")
FORMATS = ("text", "latex", "structured")

FOOTNOTE_SOURCE_WEIGHT = (
    "Source terms enter the quasi-Lagrangian through the scaling integral: a "
    "source linear in the fields contributes with weight 1/2, so the "
    "non-divergence part is half the raw pairing of fields with sources."
)
FOOTNOTE_SIGN_CONVENTION = (
    "Signs of non-divergence derivative-square terms follow the scaling-"
    "integral convention; presentations that fold such terms into divergences "
    "differently can show the opposite sign."
)
FOOTNOTE_DENSITY = (
    "Higher-order flux entries are weighted by the same volume density as "
    "first-order balance laws, so data with only single derivatives reduces "
    "exactly to the first-order residuals."
)


class ParseError(EngineError):
    code = "parse"

    def __init__(self, message, line=None, col=None, expected=()):
        super().__init__(message)
        self.line = line
        self.col = col
        self.expected = tuple(expected)

    def __str__(self):
        base = super().__str__()
        where = f" at line {self.line}, col {self.col}" if self.line is not None else ""
        hint = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{base}{where}{hint}"


class UndeclaredNameError(ParseError):
    code = "undeclared-name"


class DuplicateRelationError(ParseError):
    code = "duplicate-relation"


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # name | int | string | sym | eof
    text: str
    line: int
    col: int


_SYMBOLS = set(";,=+-*/^()[]")


def _tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i = 0
    size = len(text)
    while i < size:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < size and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isalpha():
            j = i
            while j < size and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < size and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < size and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string", line, start_col)
                j += 1
            if j >= size:
                raise ParseError("unterminated string", line, start_col)
            tokens.append(_Token("string", text[i + 1 : j], line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token("sym", ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


@dataclass
class SystemDocument:
    """A parsed, canonicalized system declaration.

    Flux entries map (field index, multi-index) to nonzero polynomials;
    sources map field index to nonzero polynomials; zero declarations are
    dropped so that rendering and reparsing is the identity.
    """

    chart: Chart
    fluxes: dict
    sources: dict
    title: str | None = None
    notes: tuple = ()

    @property
    def max_flux_order(self) -> int:
        return max((sum(counts) for _, counts in self.fluxes), default=0)

    @property
    def has_higher_entries(self) -> bool:
        return any(sum(counts) > 1 for _, counts in self.fluxes)

    def flux(self, i: int, mu: int) -> Poly:
        counts = tuple(1 if k == mu else 0 for k in range(self.chart.n))
        return self.fluxes.get((i, counts), Poly.zero())

    def source(self, i: int) -> Poly:
        return self.sources.get(i, Poly.zero())

    def to_balance_system(self) -> BalanceSystem:
        if self.has_higher_entries:
            raise InvalidSystemError(
                "this document declares flux entries of order >= 2; only the "
                "'higher' analysis applies"
            )
        chart = self.chart
        F = [[self.flux(i, mu) for mu in range(chart.n)] for i in range(chart.m)]
        Pi = [self.source(i) for i in range(chart.m)]
        return BalanceSystem(chart, F, Pi)

    def to_higher_data(self) -> HigherBalanceData:
        coeffs = dict(self.fluxes)
        zero = self.chart.zero_index()
        for i, p in self.sources.items():
            coeffs[(i, zero)] = p
        return HigherBalanceData(self.chart, coeffs)


def _segment_suffix(suffix: str, base_names) -> tuple | None:
    """Greedily split a jet suffix into declared coordinate names (longest
    match first); returns the derivative multi-index or None."""
    ordered = sorted(range(len(base_names)), key=lambda k: -len(base_names[k]))
    counts = [0] * len(base_names)
    pos = 0
    while pos < len(suffix):
        for k in ordered:
            name = base_names[k]
            if suffix.startswith(name, pos):
                counts[k] += 1
                pos += len(name)
                break
        else:
            return None
    return tuple(counts)


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead=0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message, tok=None, expected=()):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col, expected)

    def expect_sym(self, sym) -> _Token:
        tok = self.peek()
        if tok.kind == "sym" and tok.text == sym:
            return self.next()
        self.fail(f"expected {sym!r}", tok, expected=(repr(sym),))

    def expect_name(self, what="name") -> _Token:
        tok = self.peek()
        if tok.kind == "name":
            return self.next()
        self.fail(f"expected a {what}", tok, expected=(what,))

    def at_sym(self, sym) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == sym

    def end_statement(self):
        if self.at_sym(";"):
            self.next()
        elif self.peek().kind != "eof":
            self.fail("expected ';'", expected=("';'",))

    # -- expressions ---------------------------------------------------------

    def parse_expr(self, scope) -> Poly:
        value = self._sum(scope)
        return value

    def _sum(self, scope) -> Poly:
        value = self._product(scope)
        while self.peek().kind == "sym" and self.peek().text in "+-":
            op = self.next().text
            rhs = self._product(scope)
            value = value + rhs if op == "+" else value - rhs
        return value

    _FACTOR_START = {"name", "int"}

    def _starts_factor(self) -> bool:
        tok = self.peek()
        return tok.kind in self._FACTOR_START or (tok.kind == "sym" and tok.text == "(")

    def _product(self, scope) -> Poly:
        value = self._signed_factor(scope)
        while True:
            tok = self.peek()
            if tok.kind == "sym" and tok.text == "*":
                self.next()
                value = value * self._signed_factor(scope)
            elif tok.kind == "sym" and tok.text == "/":
                self.next()
                div_tok = self.peek()
                divisor = self._signed_factor(scope)
                if divisor.variables() or divisor.is_zero:
                    self.fail(
                        "division is only defined by nonzero rational constants", div_tok
                    )
                value = value * (Fraction(1) / divisor.constant_term())
            elif self._starts_factor():
                value = value * self._factor(scope)
            else:
                return value

    def _signed_factor(self, scope) -> Poly:
        tok = self.peek()
        if tok.kind == "sym" and tok.text in "+-":
            self.next()
            inner = self._signed_factor(scope)
            return inner if tok.text == "+" else -inner
        return self._factor(scope)

    def _factor(self, scope) -> Poly:
        value = self._atom(scope)
        if self.at_sym("^"):
            self.next()
            tok = self.peek()
            if tok.kind != "int":
                self.fail("expected a nonnegative integer exponent", tok, ("integer",))
            self.next()
            value = value ** int(tok.text)
        return value

    def _atom(self, scope) -> Poly:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Poly.constant(int(tok.text))
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            value = self._sum(scope)
            self.expect_sym(")")
            return value
        if tok.kind == "name":
            if (
                tok.text == "d"
                and tok.text not in scope["base"]
                and tok.text not in (scope["fields"] or {})
                and self.peek(1).kind == "sym"
                and self.peek(1).text == "("
            ):
                return self._derivative_call(scope)
            self.next()
            return self._resolve_name(tok, scope)
        self.fail("expected an expression", tok, ("number", "name", "'('"))

    def _derivative_call(self, scope) -> Poly:
        head = self.next()  # 'd'
        self.expect_sym("(")
        if scope["fields"] is None:
            self.fail("jet variables are not allowed in this expression", head)
        name_tok = self.expect_name("field name")
        if name_tok.text not in scope["fields"]:
            raise UndeclaredNameError(
                f"undeclared field {name_tok.text!r}", name_tok.line, name_tok.col
            )
        self.expect_sym(";")
        counts = []
        while True:
            tok = self.peek()
            if tok.kind != "int":
                self.fail("expected a derivative count", tok, ("integer",))
            self.next()
            counts.append(int(tok.text))
            if self.at_sym(","):
                self.next()
                continue
            break
        self.expect_sym(")")
        n = len(scope["base"])
        if len(counts) != n:
            self.fail(f"expected {n} derivative counts, got {len(counts)}", head)
        i = scope["fields"][name_tok.text]
        return Poly.variable(("j", i, tuple(counts)))

    def _resolve_name(self, tok, scope) -> Poly:
        name = tok.text
        base = scope["base"]
        fields = scope["fields"]
        if "_" in name:
            if fields is None:
                self.fail("jet variables are not allowed in this expression", tok)
            head, suffix = name.split("_", 1)
            if head not in fields:
                raise UndeclaredNameError(f"undeclared field {head!r}", tok.line, tok.col)
            if "_" in suffix or not suffix:
                self.fail(f"malformed jet token {name!r}", tok)
            counts = _segment_suffix(suffix, list(base))
            if counts is None:
                self.fail(
                    f"cannot segment derivative suffix {suffix!r} into base coordinates",
                    tok,
                )
            return Poly.variable(("j", fields[head], counts))
        if name in base:
            return Poly.variable(("b", base[name]))
        if fields is not None and name in fields:
            return Poly.variable(("j", fields[name], (0,) * len(base)))
        raise UndeclaredNameError(f"undeclared name {name!r}", tok.line, tok.col)


def parse_system(text: str) -> SystemDocument:
    """Parse a system declaration; raises ParseError and relatives with
    positions and, where helpful, an expected-token hint."""
    parser = _Parser(_tokenize(text))
    tok = parser.peek()
    if not (tok.kind == "name" and tok.text == "base"):
        parser.fail("a system starts with the 'base' declaration", tok, ("'base'",))
    parser.next()
    base_names = []
    while parser.peek().kind == "name":
        base_names.append(parser.next().text)
    if not base_names:
        parser.fail("at least one base coordinate is required", expected=("name",))
    parser.end_statement()

    tok = parser.peek()
    if not (tok.kind == "name" and tok.text == "fields"):
        parser.fail("the 'fields' declaration must follow 'base'", tok, ("'fields'",))
    parser.next()
    field_names = []
    while parser.peek().kind == "name":
        field_names.append(parser.next().text)
    if not field_names:
        parser.fail("at least one field is required", expected=("name",))
    parser.end_statement()

    for name in base_names + field_names:
        if "_" in name:
            raise ParseError(
                f"declared name {name!r} contains '_', which is reserved for jet tokens"
            )
    if len(set(base_names + field_names)) != len(base_names + field_names):
        raise ParseError("chart names must be distinct")

    base_index = {name: k for k, name in enumerate(base_names)}
    field_index = {name: k for k, name in enumerate(field_names)}
    base_scope = {"base": base_index, "fields": None}
    full_scope = {"base": base_index, "fields": field_index}

    density = Poly.constant(1)
    title = None
    notes = []
    fluxes = {}
    sources = {}
    seen = set()

    while parser.peek().kind != "eof":
        tok = parser.peek()
        if tok.kind != "name":
            parser.fail("expected a statement", tok, ("'F'", "'Pi'", "'density'", "'title'", "'note'"))
        keyword = tok.text
        if keyword == "density":
            parser.next()
            density = parser.parse_expr(base_scope)
            if density.is_zero:
                parser.fail("the density must be a nonzero polynomial", tok)
            parser.end_statement()
        elif keyword == "title":
            parser.next()
            st = parser.peek()
            if st.kind != "string":
                parser.fail("expected a quoted string", st, ("string",))
            title = parser.next().text
            parser.end_statement()
        elif keyword == "note":
            parser.next()
            st = parser.peek()
            if st.kind != "string":
                parser.fail("expected a quoted string", st, ("string",))
            notes.append(parser.next().text)
            parser.end_statement()
        elif keyword == "F":
            parser.next()
            parser.expect_sym("[")
            name_tok = parser.expect_name("field name")
            if name_tok.text not in field_index:
                raise UndeclaredNameError(
                    f"undeclared field {name_tok.text!r}", name_tok.line, name_tok.col
                )
            parser.expect_sym(",")
            coord_tok = parser.expect_name("coordinate suffix")
            counts = _segment_suffix(coord_tok.text, base_names)
            if counts is None or sum(counts) == 0:
                parser.fail(
                    f"cannot read {coord_tok.text!r} as a run of base coordinates",
                    coord_tok,
                )
            parser.expect_sym("]")
            parser.expect_sym("=")
            key = (field_index[name_tok.text], counts)
            if ("F",) + key in seen:
                raise DuplicateRelationError(
                    f"duplicate flux entry F[{name_tok.text},{coord_tok.text}]",
                    name_tok.line,
                    name_tok.col,
                )
            seen.add(("F",) + key)
            value = parser.parse_expr(full_scope)
            if not value.is_zero:
                fluxes[key] = value
            parser.end_statement()
        elif keyword == "Pi":
            parser.next()
            parser.expect_sym("[")
            name_tok = parser.expect_name("field name")
            if name_tok.text not in field_index:
                raise UndeclaredNameError(
                    f"undeclared field {name_tok.text!r}", name_tok.line, name_tok.col
                )
            parser.expect_sym("]")
            parser.expect_sym("=")
            key = field_index[name_tok.text]
            if ("Pi", key) in seen:
                raise DuplicateRelationError(
                    f"duplicate source entry Pi[{name_tok.text}]",
                    name_tok.line,
                    name_tok.col,
                )
            seen.add(("Pi", key))
            value = parser.parse_expr(full_scope)
            if not value.is_zero:
                sources[key] = value
            parser.end_statement()
        else:
            parser.fail(
                f"unknown statement {keyword!r}",
                tok,
                ("'F'", "'Pi'", "'density'", "'title'", "'note'"),
            )

    chart = Chart(tuple(base_names), tuple(field_names), density)
    for (i, counts), p in fluxes.items():
        chart.validate_poly(p)
        if len(counts) != chart.n:
            raise ParseError("internal: malformed multi-index")
    for p in sources.values():
        chart.validate_poly(p)
    return SystemDocument(chart, fluxes, sources, title, tuple(notes))


def parse_section(text: str, doc: SystemDocument) -> list:
    """Parse a section file: one 'field = polynomial-in-base-coordinates;'
    statement per declared field."""
    chart = doc.chart
    parser = _Parser(_tokenize(text))
    base_index = {name: k for k, name in enumerate(chart.base_names)}
    scope = {"base": base_index, "fields": None}
    values = {}
    while parser.peek().kind != "eof":
        name_tok = parser.expect_name("field name")
        if name_tok.text not in chart.field_names:
            raise UndeclaredNameError(
                f"undeclared field {name_tok.text!r}", name_tok.line, name_tok.col
            )
        i = chart.field_names.index(name_tok.text)
        if i in values:
            raise DuplicateRelationError(
                f"duplicate section entry for {name_tok.text!r}",
                name_tok.line,
                name_tok.col,
            )
        parser.expect_sym("=")
        values[i] = parser.parse_expr(scope)
        parser.end_statement()
    missing = [chart.field_names[i] for i in range(chart.m) if i not in values]
    if missing:
        raise ParseError(f"section misses fields: {', '.join(missing)}")
    return [values[i] for i in range(chart.m)]


def _suffix_for(chart: Chart, counts) -> str:
    return "".join(chart.base_names[mu] * c for mu, c in enumerate(counts))


def render_system(doc: SystemDocument) -> str:
    """Canonical text of a document; parsing it back yields an equal document."""
    chart = doc.chart
    lines = [f"base {' '.join(chart.base_names)};", f"fields {' '.join(chart.field_names)};"]
    if chart.rho != Poly.constant(1):
        lines.append(f"density {poly_text(chart.rho, chart)};")
    if doc.title is not None:
        lines.append(f'title "{doc.title}";')
    for note in doc.notes:
        lines.append(f'note "{note}";')
    for (i, counts), p in sorted(doc.fluxes.items()):
        lines.append(
            f"F[{chart.field_names[i]},{_suffix_for(chart, counts)}] = {poly_text(p, chart)};"
        )
    for i, p in sorted(doc.sources.items()):
        lines.append(f"Pi[{chart.field_names[i]}] = {poly_text(p, chart)};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class Report:
    command: str
    doc: SystemDocument
    sections: dict = field(default_factory=dict)
    footnotes: list = field(default_factory=list)
    has_error: bool = False

    def error_section(self, name: str, exc: EngineError) -> None:
        self.sections[name] = {"error": {"code": exc.code, "message": str(exc)}}
        self.has_error = True


def _by_field(chart: Chart, values) -> dict:
    return {chart.field_names[i]: v for i, v in enumerate(values)}


def _quasi_lagrangian_section(bs: BalanceSystem, with_divergence: bool) -> dict:
    chart = bs.chart
    ltilde = quasi_lagrangian(bs)
    triv = trivial_quasi_lagrangian(bs)
    section = {"value": ltilde, "is_trivial": triv.is_trivial, "phi": triv.phi}
    if with_divergence:
        potentials, remainder = divergence_split(chart, ltilde)
        section["divergence_potentials"] = {
            chart.base_names[mu]: potentials[mu] for mu in range(chart.n)
        }
        section["non_divergence_part"] = remainder
    return section


def run(command: str, doc: SystemDocument, at=None, section_text: str | None = None) -> Report:
    """Drive one analysis command over a parsed document."""
    if command not in COMMANDS:
        raise InvalidSystemError(f"unknown command {command!r}")
    report = Report(command, doc)
    chart = doc.chart

    if command == "equations":
        bs = doc.to_balance_system()
        residuals = balance_residuals(bs)
        report.sections["equations"] = {
            "residuals": _by_field(chart, residuals),
            "source_components": _by_field(chart, source_form(bs).components()),
        }

    elif command == "check":
        bs = doc.to_balance_system()
        hel = helmholtz_check(bs)
        report.sections["helmholtz"] = {
            "closed": hel.closed,
            "residual": hel.residual,
            "lagrangian": hel.lagrangian,
        }
        report.sections["quasi_lagrangian"] = _quasi_lagrangian_section(bs, False)
        report.footnotes.append(FOOTNOTE_SOURCE_WEIGHT)
        report.footnotes.append(FOOTNOTE_SIGN_CONVENTION)
        try:
            god = godunov_check(bs)
            note = None
        except OrderTooHighError as exc:
            god = exc.report
            note = str(exc)
        section = {
            "applicable": god.is_zero_order,
            "flux_symmetric": {
                chart.base_names[mu]: god.flux_symmetric[mu] for mu in range(chart.n)
            },
            "potentials": None
            if god.potentials is None
            else {chart.base_names[mu]: god.potentials[mu] for mu in range(chart.n)},
            "source_pairing": god.source_pairing,
            "pairing_constant": god.pairing_constant,
            "verdict": god.verdict,
        }
        if note:
            section["note"] = note
        report.sections["godunov"] = section

    elif command == "decompose":
        bs = doc.to_balance_system()
        dec = decompose(bs)
        report.sections["quasi_lagrangian"] = _quasi_lagrangian_section(bs, True)
        report.sections["k_split"] = {
            "lagrangian_part": dec.lagrangian_part,
            "non_lagrangian_part": dec.nonlagrangian_part,
            "helmholtz_closed": dec.helmholtz_closed,
        }
        report.sections["f_split"] = {
            "euler_lagrange_components": _by_field(
                chart, dec.euler_lagrange_form.components()
            ),
            "godunov_components": _by_field(chart, dec.godunov_part.components()),
        }
        report.footnotes.append(FOOTNOTE_SOURCE_WEIGHT)
        report.footnotes.append(FOOTNOTE_SIGN_CONVENTION)

    elif command == "hyperbolic":
        bs = doc.to_balance_system()
        if at is None:
            raise InvalidSystemError("the hyperbolic analysis needs --at rational coordinates")
        try:
            rep = symmetric_hyperbolicity(bs, at)
        except OrderTooHighError as exc:
            report.error_section("hyperbolicity", exc)
            return report
        report.sections["hyperbolicity"] = {
            "symmetric": {chart.base_names[mu]: rep.symmetric[mu] for mu in range(chart.n)},
            "matrices": {
                chart.base_names[mu]: [list(row) for row in rep.matrices[mu]]
                for mu in range(chart.n)
            },
            "point": list(rep.point),
            "leading_minors": list(rep.leading_minors),
            "singular": rep.singular,
            "verdict": rep.verdict,
        }

    elif command == "higher":
        data = doc.to_higher_data()
        residuals = higher_balance_residuals(data)
        report.sections["higher_order"] = {"residuals": _by_field(chart, residuals)}
        report.footnotes.append(FOOTNOTE_DENSITY)

    elif command == "verify":
        bs = doc.to_balance_system()
        if section_text is None:
            raise InvalidSystemError("the verify analysis needs --section <file>")
        section = parse_section(section_text, doc)
        residuals = [
            evaluate_on_section(r, section, chart) for r in balance_residuals(bs)
        ]
        report.sections["section_check"] = {
            "section": _by_field(chart, section),
            "residuals": _by_field(chart, residuals),
            "solves": all(r.is_zero for r in residuals),
        }

    return report


# ---------------------------------------------------------------------------
# renderers
# ---------------------------------------------------------------------------


def _system_summary(doc: SystemDocument) -> dict:
    chart = doc.chart
    return {
        "title": doc.title,
        "base": list(chart.base_names),
        "fields": list(chart.field_names),
        "density": chart.rho,
        "order": max(
            [p.jet_order() for p in doc.fluxes.values()]
            + [p.jet_order() for p in doc.sources.values()]
            + [0]
        ),
        "fluxes": {
            chart.field_names[i]: {
                _suffix_for(chart, counts): p
                for (j, counts), p in sorted(doc.fluxes.items())
                if j == i
            }
            for i in range(chart.m)
        },
        "sources": {chart.field_names[i]: doc.source(i) for i in range(chart.m)},
        "notes": list(doc.notes),
    }


def _structured_value(value, chart: Chart):
    if isinstance(value, Poly):
        return poly_text(value, chart)
    if isinstance(value, Form):
        return form_text(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {k: _structured_value(v, chart) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_structured_value(v, chart) for v in value]
    return value


def render_structured(report: Report) -> str:
    payload = {
        "system": _structured_value(_system_summary(report.doc), report.doc.chart),
        "analyses": _structured_value(report.sections, report.doc.chart),
        "footnotes": list(report.footnotes),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _text_value(value, chart: Chart) -> str:
    if isinstance(value, Poly):
        return poly_text(value, chart)
    if isinstance(value, Form):
        return form_text(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    return str(value)


def _text_lines(name: str, content: dict, chart: Chart) -> list:
    lines = [f"== {name} =="]
    if name == "equations":
        for idx, fname in enumerate(chart.field_names):
            lines.append(f"R{idx + 1}: {_text_value(content['residuals'][fname], chart)}")
        for idx, fname in enumerate(chart.field_names):
            lines.append(
                f"S{idx + 1}: {_text_value(content['source_components'][fname], chart)}"
            )
        return lines
    for key, value in content.items():
        if isinstance(value, dict) and key != "error":
            for sub, inner in value.items():
                if isinstance(inner, list):
                    lines.append(f"{key}[{sub}]:")
                    for row in inner:
                        lines.append(
                            "    " + "  ".join(_text_value(cell, chart) for cell in row)
                        )
                else:
                    lines.append(f"{key}[{sub}]: {_text_value(inner, chart)}")
        elif isinstance(value, dict):
            lines.append(f"{key}: {value['code']}: {value['message']}")
        elif isinstance(value, (list, tuple)):
            lines.append(f"{key}: " + ", ".join(_text_value(v, chart) for v in value))
        else:
            lines.append(f"{key}: {_text_value(value, chart)}")
    return lines


def render_text(report: Report) -> str:
    chart = report.doc.chart
    lines = [
        f"system: {report.doc.title or '(untitled)'}",
        f"base: {' '.join(chart.base_names)}",
        f"fields: {' '.join(chart.field_names)}",
        f"density: {poly_text(chart.rho, chart)}",
        "",
    ]
    for name, content in report.sections.items():
        lines.extend(_text_lines(name, content, chart))
        lines.append("")
    if report.footnotes:
        lines.append("footnotes:")
        for note in report.footnotes:
            lines.append(f"  - {note}")
        lines.append("")
    return "\n".join(lines)


def _latex_value(value, chart: Chart) -> str:
    if isinstance(value, Poly):
        return poly_latex(value, chart)
    if isinstance(value, Form):
        return form_latex(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        sign = "-" if value < 0 else ""
        return f"{sign}\\frac{{{abs(value.numerator)}}}{{{value.denominator}}}"
    if isinstance(value, bool):
        return "\\text{true}" if value else "\\text{false}"
    if value is None:
        return "\\text{none}"
    return f"\\text{{{value}}}"


def _latex_lines(name: str, content: dict, chart: Chart) -> list:
    lines = [f"% {name}"]
    if name == "equations":
        for idx, fname in enumerate(chart.field_names):
            lines.append(
                f"\\[ R_{{{idx + 1}}} = {_latex_value(content['residuals'][fname], chart)} \\]"
            )
        for idx, fname in enumerate(chart.field_names):
            lines.append(
                f"\\[ S_{{{idx + 1}}} = {_latex_value(content['source_components'][fname], chart)} \\]"
            )
        return lines
    if name == "quasi_lagrangian":
        lines.append(f"\\[ \\tilde{{L}} = {_latex_value(content['value'], chart)} \\]")
        if "divergence_potentials" in content:
            parts = []
            for mu, coord in enumerate(chart.base_names):
                pot = content["divergence_potentials"][coord]
                if not pot.is_zero:
                    parts.append(
                        f"d_{{{_latex_coord(chart, mu)}}}\\left({poly_latex(pot, chart)}\\right)"
                    )
            remainder = content["non_divergence_part"]
            if not remainder.is_zero:
                parts.append(poly_latex(remainder, chart))
            if parts:
                joined = " + ".join(parts).replace(" + -", " - ")
                lines.append("\\[ \\tilde{L} = " + joined + " \\]")
        lines.append(
            f"\\[ \\text{{trivial: }} {_latex_value(content['is_trivial'], chart)} \\]"
        )
        return lines
    for key, value in content.items():
        if isinstance(value, dict) and key != "error":
            for sub, inner in value.items():
                if isinstance(inner, list):
                    rows = " \\\\ ".join(
                        " & ".join(_latex_value(cell, chart) for cell in row)
                        for row in inner
                    )
                    lines.append(
                        f"\\[ {key}[{sub}] = \\begin{{pmatrix}} {rows} \\end{{pmatrix}} \\]"
                    )
                else:
                    lines.append(
                        f"\\[ \\text{{{key}[{sub}]}} = {_latex_value(inner, chart)} \\]"
                    )
        elif isinstance(value, dict):
            lines.append(f"% error {value['code']}: {value['message']}")
        elif isinstance(value, (list, tuple)):
            body = ", ".join(_latex_value(v, chart) for v in value)
            lines.append(f"\\[ \\text{{{key}}} = ({body}) \\]")
        else:
            lines.append(f"\\[ \\text{{{key}}} = {_latex_value(value, chart)} \\]")
    return lines


def _latex_coord(chart: Chart, mu: int):
    from .jetforms import _latex_name

    return _latex_name(chart.base_names[mu])


def render_latex(report: Report) -> str:
    lines = [f"% system: {report.doc.title or '(untitled)'}"]
    for name, content in report.sections.items():
        lines.extend(_latex_lines(name, content, report.doc.chart))
    for note in report.footnotes:
        lines.append(f"% footnote: {note}")
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str = "text") -> bytes:
    if fmt == "text":
        return render_text(report).encode("utf-8")
    if fmt == "latex":
        return render_latex(report).encode("utf-8")
    if fmt == "structured":
        return render_structured(report).encode("utf-8")
    raise InvalidSystemError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parse_point(text: str) -> list:
    try:
        return [Fraction(part.strip()) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidSystemError(f"cannot read rational coordinates from {text!r}") from exc


def _build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetbalance",
        description="exact variational analysis of balance systems on jet coordinates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("equations", "balance residuals and the source form"),
        ("check", "Helmholtz closedness, triviality and Godunov classification"),
        ("decompose", "quasi-Lagrangian and the Lagrangian / non-Lagrangian splitting"),
        ("hyperbolic", "symmetric hyperbolicity of the Godunov component at a point"),
        ("higher", "residuals of higher-order flux data"),
        ("verify", "evaluate the residuals on an explicit section"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("system", help="system file ('-' reads stdin)")
        cmd.add_argument("--format", choices=FORMATS, default="text")
        cmd.add_argument("--output", help="write the report here instead of stdout")
        if name == "hyperbolic":
            cmd.add_argument("--at", required=True, help="comma-separated rationals, base then fields")
        if name == "verify":
            cmd.add_argument("--section", required=True, help="section file (field = poly; ...)")
    return parser


def _diagnostic(exc: EngineError) -> str:
    return f"error[{exc.code}]: {exc}"


def main(argv=None) -> int:
    args = _build_argparser().parse_args(argv)
    try:
        if args.system == "-":
            text = sys.stdin.read()
        else:
            with open(args.system, "r", encoding="utf-8") as handle:
                text = handle.read()
        section_text = None
        if getattr(args, "section", None):
            with open(args.section, "r", encoding="utf-8") as handle:
                section_text = handle.read()
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 2
    try:
        doc = parse_system(text)
        at = _parse_point(args.at) if getattr(args, "at", None) else None
        report = run(args.command, doc, at=at, section_text=section_text)
        payload = render(report, args.format)
    except EngineError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 2
    except Exception as exc:  # invariant violation; never expected on valid input
        print(f"error[internal]: {exc!r}", file=sys.stderr)
        return 3
    if args.output:
        with open(args.output, "wb") as handle:
            handle.write(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    for name, content in report.sections.items():
        if isinstance(content.get("error"), dict):
            print(f"error[{content['error']['code']}]: {content['error']['message']}", file=sys.stderr)
    return 2 if report.has_error else 0


if __name__ == "__main__":
    sys.exit(main())
