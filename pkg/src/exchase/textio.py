"""Text formats for rules, instances and queries.

One shared token grammar serves all three:

    rule      := '[' IDENT ']'? atoms '->' atoms '.'
    atoms     := atom (',' atom)*
    atom      := IDENT '(' term (',' term)* ')'
    term      := IDENT | '?' IDENT
    comment   := '%' to end of line

Identifiers starting with an uppercase letter are variables, those starting
with a lowercase letter are constants, and '?name' forces a variable
regardless of case. Nulls have no written form: an underscore-initial
identifier is rejected, so chase outputs rendered with nulls (for display)
do not round-trip by design. Instance files hold ground atoms separated by
commas, periods or whitespace; query files use the same shape but allow
variables. Rules missing the '[id]' prefix get sequential ids r1, r2, ...

Parsers collect every diagnostic they can (resynchronizing at '.') and then
raise ParseError; each diagnostic carries a byte-offset span with 1-based
line and column. Renderers produce text that parses back to equal objects.
"""
from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import (
    Atom,
    Constant,
    Instance,
    ModelError,
    Null,
    Rule,
    Term,
    Variable,
    render_term,
)

__all__ = [
    "SourceSpan",
    "Diagnostic",
    "ParseError",
    "parse_rules",
    "parse_instance",
    "parse_query",
    "render_rules",
    "render_instance",
    "render_query",
    "render_atom",
]


@dataclass(frozen=True)
class SourceSpan:
    """Half-open byte range [start, end) with the 1-based position of start."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end or self.line < 1 or self.column < 1:
            raise ModelError(f"malformed span {self}")

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class ParseError(ModelError):
    """Raised with every diagnostic collected over the whole input."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


_TOKEN = re.compile(
    r"""(?P<WS>\s+)
      | (?P<COMMENT>%[^\n]*)
      | (?P<ARROW>->)
      | (?P<LBRACK>\[) | (?P<RBRACK>\])
      | (?P<LPAREN>\() | (?P<RPAREN>\))
      | (?P<COMMA>,)   | (?P<DOT>\.)
      | (?P<QIDENT>\?[A-Za-z_][A-Za-z0-9_]*)
      | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    span: SourceSpan


class _Recover(Exception):
    """Internal: unwind to the enclosing statement and resynchronize."""


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.diags: list[Diagnostic] = []
        self._starts = _line_starts(text)
        self.tokens = self._tokenize()
        self.pos = 0
        self.arity: dict[str, tuple[int, SourceSpan]] = {}

    def _span(self, start: int, end: int) -> SourceSpan:
        ln = bisect.bisect_right(self._starts, start)
        return SourceSpan(start, end, ln, start - self._starts[ln - 1] + 1)

    def _tokenize(self) -> list[_Token]:
        toks: list[_Token] = []
        pos = 0
        n = len(self.text)
        while pos < n:
            m = _TOKEN.match(self.text, pos)
            if m is None:
                span = self._span(pos, pos + 1)
                self.diags.append(
                    Diagnostic(f"unexpected character {self.text[pos]!r}", span)
                )
                pos += 1
                continue
            kind = m.lastgroup
            if kind not in ("WS", "COMMENT"):
                toks.append(_Token(kind, m.group(), self._span(m.start(), m.end())))
            pos = m.end()
        toks.append(_Token("EOF", "", self._span(n, n)))
        return toks

    # -- primitives ----------------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic(message, span))

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            self.error(f"expected {what}, found {shown!r}", tok.span)
            raise _Recover()
        return self.advance()

    def resync(self) -> None:
        """Skip forward past the next '.' so later statements still parse."""
        while self.peek().kind not in ("DOT", "EOF"):
            self.advance()
        if self.peek().kind == "DOT":
            self.advance()

    # -- grammar -------------------------------------------------------------

    def term(self, *, ground: bool) -> tuple[Term, SourceSpan]:
        tok = self.peek()
        if tok.kind == "QIDENT":
            self.advance()
            if ground:
                self.error("variable in a ground context", tok.span)
                raise _Recover()
            return Variable(tok.text[1:]), tok.span
        tok = self.expect("IDENT", "a term")
        if tok.text[0] == "_":
            self.error("nulls cannot be written in source text", tok.span)
            raise _Recover()
        if tok.text[0].isupper():
            if ground:
                self.error("variable in a ground context", tok.span)
                raise _Recover()
            return Variable(tok.text), tok.span
        return Constant(tok.text), tok.span

    def atom(self, *, ground: bool) -> tuple[Atom, SourceSpan, list[SourceSpan]]:
        pred = self.expect("IDENT", "a predicate name")
        self.expect("LPAREN", "'('")
        terms: list[Term] = []
        spans: list[SourceSpan] = []
        while True:
            t, sp = self.term(ground=ground)
            terms.append(t)
            spans.append(sp)
            if self.peek().kind == "COMMA":
                self.advance()
                continue
            break
        close = self.expect("RPAREN", "')'")
        known = self.arity.get(pred.text)
        if known is not None and known[0] != len(terms):
            self.error(
                f"predicate {pred.text} used with arity {len(terms)} "
                f"but arity {known[0]} at {known[1]}",
                pred.span,
            )
            raise _Recover()
        if known is None:
            self.arity[pred.text] = (len(terms), pred.span)
        span = self._span(pred.span.start, close.span.end)
        return Atom(pred.text, tuple(terms)), span, spans

    def atom_list(self, *, ground: bool) -> list[tuple[Atom, SourceSpan, list[SourceSpan]]]:
        out = [self.atom(ground=ground)]
        while self.peek().kind == "COMMA":
            self.advance()
            out.append(self.atom(ground=ground))
        return out

    # -- entry points ----------------------------------------------------------

    def rules(self) -> list[Rule]:
        out: list[Rule] = []
        seen_ids: dict[str, SourceSpan] = {}
        auto = 0
        while self.peek().kind != "EOF":
            auto += 1
            try:
                out_rule = self.rule(f"r{auto}", seen_ids)
            except _Recover:
                self.resync()
                continue
            if out_rule is not None:
                out.append(out_rule)
        self.finish()
        return out

    def rule(self, auto_id: str, seen_ids: dict[str, SourceSpan]) -> Optional[Rule]:
        rid = auto_id
        id_span = self.peek().span
        if self.peek().kind == "LBRACK":
            self.advance()
            tok = self.expect("IDENT", "a rule id")
            self.expect("RBRACK", "']'")
            rid, id_span = tok.text, tok.span
        body = self.atom_list(ground=False)
        self.expect("ARROW", "'->'")
        head = self.atom_list(ground=False)
        self.expect("DOT", "'.' after the rule head")
        ok = True
        if rid in seen_ids:
            self.error(f"duplicate rule id {rid} (first at {seen_ids[rid]})", id_span)
            ok = False
        seen_ids[rid] = id_span
        for group in (body, head):
            for a, _, term_spans in group:
                for t, sp in zip(a.args, term_spans):
                    if isinstance(t, Constant):
                        self.error("constant in a rule (rules are constant-free)", sp)
                        ok = False
        if not ok:
            return None
        try:
            return Rule.make(rid, [a for a, _, _ in body], [a for a, _, _ in head])
        except ModelError as e:
            self.error(str(e), id_span)
            return None

    def ground_atoms(self) -> list[Atom]:
        atoms: list[Atom] = []
        while self.peek().kind != "EOF":
            try:
                a, _, _ = self.atom(ground=True)
                atoms.append(a)
            except _Recover:
                self.resync()
                continue
            if self.peek().kind in ("COMMA", "DOT"):
                self.advance()
        self.finish()
        return atoms

    def query_atoms(self) -> list[Atom]:
        atoms: list[Atom] = []
        while self.peek().kind != "EOF":
            try:
                a, _, _ = self.atom(ground=False)
                atoms.append(a)
            except _Recover:
                self.resync()
                continue
            if self.peek().kind in ("COMMA", "DOT"):
                self.advance()
        self.finish()
        return atoms

    def finish(self) -> None:
        if self.diags:
            raise ParseError(self.diags)


def parse_rules(text: str) -> list[Rule]:
    """Parse a rule file; raises ParseError carrying every diagnostic."""
    return _Parser(text).rules()


def parse_instance(text: str) -> Instance:
    """Parse a ground-atom file into an instance; variables are rejected."""
    return Instance.from_atoms(_Parser(text).ground_atoms())


def parse_query(text: str) -> tuple[Atom, ...]:
    """Parse a conjunctive query: ground-atom syntax plus variables."""
    return tuple(_Parser(text).query_atoms())


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_IDENT_OK = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _render_term(t: Term, allow_nulls: bool) -> str:
    if isinstance(t, Constant):
        if not (_IDENT_OK.match(t.name) and t.name[0].islower()):
            raise ModelError(f"constant {t.name!r} has no written form")
        return t.name
    if isinstance(t, Variable):
        if not _IDENT_OK.match(t.name):
            raise ModelError(f"variable {t.name!r} has no written form")
        return t.name if t.name[0].isupper() else f"?{t.name}"
    if isinstance(t, Null):
        if not allow_nulls:
            raise ModelError(f"null _n{t.id} cannot be rendered in parseable text")
        return render_term(t)
    raise ModelError(f"unrenderable term {t!r}")


def render_atom(a: Atom, *, allow_nulls: bool = False) -> str:
    if not _IDENT_OK.match(a.predicate):
        raise ModelError(f"predicate {a.predicate!r} has no written form")
    inner = ", ".join(_render_term(t, allow_nulls) for t in a.args)
    return f"{a.predicate}({inner})"


def render_rules(rules: Iterable[Rule]) -> str:
    """One rule per line, ids included; parses back to equal rules."""
    lines = []
    for r in rules:
        if not _IDENT_OK.match(r.id) or r.id[0] == "_":
            raise ModelError(f"rule id {r.id!r} has no written form")
        body = ", ".join(render_atom(a) for a in r.body)
        head = ", ".join(render_atom(a) for a in r.head)
        lines.append(f"[{r.id}] {body} -> {head} .")
    return "\n".join(lines) + ("\n" if lines else "")


def render_instance(instance: Instance, *, allow_nulls: bool = False) -> str:
    """One atom per line; only ground instances parse back."""
    lines = [
        f"{render_atom(a, allow_nulls=allow_nulls)}."
        for a in sorted(instance, key=str)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def render_query(query: Iterable[Atom]) -> str:
    atoms = list(query)
    if not atoms:
        return ""
    return ", ".join(render_atom(a) for a in atoms) + ".\n"
