"""Conjunctive query model over the dictionary-encoded store.

A query is a bag-free conjunction of triple patterns with constant
properties, a head listing distinct answer variables, and a rational
weight.  The module parses a small SPARQL subset, validates queries,
pretty-prints them back, and computes a canonical form that is stable
under variable renaming and body reordering.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .errors import (
    EmptyHeadError,
    EmptyWorkloadError,
    QueryValidationError,
    SparqlSyntaxError,
    UnsupportedFeatureError,
)
from .store import Dictionary, Term, iri, literal


@dataclass(frozen=True, slots=True)
class Var:
    """A query variable, stored without the leading question mark."""

    name: str


@dataclass(frozen=True, slots=True)
class Const:
    """A constant position holding a dictionary id."""

    tid: int


QTerm = Union[Var, Const]


class TriplePattern(NamedTuple):
    s: QTerm
    p: QTerm
    o: QTerm

    def variables(self) -> tuple[str, ...]:
        """Variable names in s, p, o order, repeats kept."""
        return tuple(t.name for t in self if isinstance(t, Var))


def pattern_vars(body: Iterable[TriplePattern]) -> list[str]:
    """Distinct variable names in first-appearance order."""
    seen: list[str] = []
    for atom in body:
        for name in atom.variables():
            if name not in seen:
                seen.append(name)
    return seen


@dataclass(frozen=True)
class ConjunctiveQuery:
    """A named, weighted conjunctive query.

    The body keeps the written atom order with exact duplicates removed;
    canonical ordering is a separate concern handled by canonize().
    """

    name: str
    head: tuple[str, ...]
    body: tuple[TriplePattern, ...]
    weight: Fraction = Fraction(1)

    def variables(self) -> list[str]:
        return pattern_vars(self.body)


@dataclass(frozen=True)
class Workload:
    """An ordered collection of uniquely named queries."""

    queries: tuple[ConjunctiveQuery, ...]

    def __iter__(self):
        return iter(self.queries)

    def __len__(self) -> int:
        return len(self.queries)

    def by_name(self, name: str) -> ConjunctiveQuery:
        for query in self.queries:
            if query.name == name:
                return query
        raise KeyError(name)

    def weights(self) -> dict[str, Fraction]:
        return {q.name: q.weight for q in self.queries}


def to_fraction(value) -> Fraction:
    """Convert an int, float, string, or Fraction into an exact Fraction.

    Floats go through their decimal string form so that a JSON 0.5 maps
    to 1/2 rather than the binary expansion of the double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a valid rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"cannot interpret {value!r} as a rational")


# --- parsing -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<literal>"(?:[^"\\\n\r]|\\.)*")
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}.])
  | (?P<other>.)
    """,
    re.VERBOSE,
)

_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL",
    "FILTER",
    "UNION",
    "GRAPH",
    "ORDER",
    "GROUP",
    "LIMIT",
    "OFFSET",
    "DISTINCT",
    "MINUS",
    "BIND",
    "VALUES",
    "ASK",
    "CONSTRUCT",
    "DESCRIBE",
}

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unescape_literal(raw: str) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise SparqlSyntaxError("dangling escape in literal")
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise SparqlSyntaxError(f"unknown escape \\{nxt} in literal")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise SparqlSyntaxError(f"cannot tokenize near {text[pos:pos + 20]!r}")
        pos = match.end()
        kind = match.lastgroup
        value = match.group()
        if kind == "ws":
            continue
        if kind == "other":
            if value in "/|^+;,":
                raise UnsupportedFeatureError(
                    f"property paths and separators like {value!r} are not supported"
                )
            if value != "*":
                raise SparqlSyntaxError(f"unexpected character {value!r}")
        tokens.append((kind, value))
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[tuple[str, str]]):
        self._tokens = tokens
        self._index = 0

    def peek(self) -> Optional[tuple[str, str]]:
        if self._index < len(self._tokens):
            return self._tokens[self._index]
        return None

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise SparqlSyntaxError("unexpected end of query")
        self._index += 1
        return tok


def _expect_word(stream: _TokenStream, word: str) -> None:
    kind, value = stream.next()
    if kind != "word" or value.upper() != word:
        raise SparqlSyntaxError(f"expected {word}, found {value!r}")


def _check_supported(kind: str, value: str) -> None:
    if kind == "word" and value.upper() in _UNSUPPORTED_KEYWORDS:
        raise UnsupportedFeatureError(f"{value.upper()} is not supported")


def _parse_term(stream: _TokenStream, dictionary: Dictionary) -> QTerm:
    kind, value = stream.next()
    _check_supported(kind, value)
    if kind == "var":
        return Var(value[1:])
    if kind == "iri":
        lexical = value[1:-1]
        if not lexical:
            raise SparqlSyntaxError("empty IRI in triple pattern")
        return Const(dictionary.intern(iri(lexical)))
    if kind == "literal":
        return Const(dictionary.intern(literal(_unescape_literal(value))))
    if kind == "word":
        raise SparqlSyntaxError(
            f"bare word {value!r} in triple pattern; only ?var, <iri>, "
            'or "literal" terms are supported'
        )
    raise SparqlSyntaxError(f"unexpected token {value!r} in triple pattern")


def parse_sparql(
    text: str,
    dictionary: Dictionary,
    weight: Fraction | int | str = Fraction(1),
    name: str = "q",
) -> ConjunctiveQuery:
    """Parse `SELECT ?v ... WHERE { tp . tp . }` into a ConjunctiveQuery.

    Constants are interned into the dictionary, so parsing a query can
    extend the dictionary even when the underlying table is frozen.
    Properties must be IRI constants; unsupported SPARQL constructs
    raise UnsupportedFeatureError.
    """
    stream = _TokenStream(_tokenize(text))
    first = stream.peek()
    if first is not None:
        _check_supported(*first)
    _expect_word(stream, "SELECT")

    head: list[str] = []
    while True:
        tok = stream.peek()
        if tok is None:
            raise SparqlSyntaxError("unexpected end of query after SELECT")
        kind, value = tok
        if kind == "var":
            stream.next()
            var_name = value[1:]
            if var_name in head:
                raise SparqlSyntaxError(f"duplicate head variable ?{var_name}")
            head.append(var_name)
            continue
        if kind == "other" and value == "*":
            raise UnsupportedFeatureError("SELECT * is not supported")
        break
    if not head:
        raise EmptyHeadError("SELECT clause lists no variables")

    _expect_word(stream, "WHERE")
    kind, value = stream.next()
    if not (kind == "punct" and value == "{"):
        raise SparqlSyntaxError(f"expected '{{' after WHERE, found {value!r}")

    body: list[TriplePattern] = []
    while True:
        tok = stream.peek()
        if tok is None:
            raise SparqlSyntaxError("unterminated group pattern, missing '}'")
        kind, value = tok
        if kind == "punct" and value == "}":
            stream.next()
            break
        _check_supported(kind, value)
        s = _parse_term(stream, dictionary)
        p = _parse_term(stream, dictionary)
        o = _parse_term(stream, dictionary)
        if isinstance(p, Var):
            raise UnsupportedFeatureError(
                f"variable property ?{p.name}; properties must be IRI constants"
            )
        atom = TriplePattern(s, p, o)
        if atom not in body:
            body.append(atom)
        tok = stream.peek()
        if tok is not None and tok == ("punct", "."):
            stream.next()
        elif tok is not None and tok[0] != "punct":
            raise SparqlSyntaxError("triple patterns must be separated by '.'")

    tok = stream.peek()
    if tok is not None:
        raise SparqlSyntaxError(f"trailing content after '}}': {tok[1]!r}")

    query = ConjunctiveQuery(
        name=name, head=tuple(head), body=tuple(body), weight=to_fraction(weight)
    )
    validate_query(query)
    return query


def validate_query(query: ConjunctiveQuery) -> None:
    """Reject empty bodies, unsafe heads, and disconnected bodies."""
    if not query.body:
        raise QueryValidationError("empty-body", f"query {query.name} has no atoms")
    body_vars = set(pattern_vars(query.body))
    for name in query.head:
        if name not in body_vars:
            raise QueryValidationError(
                "unsafe-head",
                f"head variable ?{name} does not occur in the body of {query.name}",
            )
    if query.weight < 0:
        raise QueryValidationError(
            "negative-weight", f"query {query.name} has negative weight"
        )
    _check_connected(query)


def _check_connected(query: ConjunctiveQuery) -> None:
    # Atoms are nodes; an edge joins atoms sharing a variable.  A body
    # with a single atom is connected, as is one whose variable-free
    # atoms do not exist (constant-only atoms cannot join anything).
    atoms = query.body
    if len(atoms) <= 1:
        return
    adjacency: dict[int, set[int]] = {i: set() for i in range(len(atoms))}
    for i in range(len(atoms)):
        vars_i = set(atoms[i].variables())
        for j in range(i + 1, len(atoms)):
            if vars_i & set(atoms[j].variables()):
                adjacency[i].add(j)
                adjacency[j].add(i)
    seen = {0}
    frontier = [0]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency[node]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    if len(seen) != len(atoms):
        raise QueryValidationError(
            "disconnected-body",
            f"the body of {query.name} splits into unconnected atom groups",
        )


def parse_body(text: str, dictionary: Dictionary) -> tuple[TriplePattern, ...]:
    """Parse a bare group pattern `{ tp . tp . }` (the view body form)."""
    stream = _TokenStream(_tokenize(text))
    kind, value = stream.next()
    if not (kind == "punct" and value == "{"):
        raise SparqlSyntaxError(f"expected '{{' to open a group, found {value!r}")
    body: list[TriplePattern] = []
    while True:
        tok = stream.peek()
        if tok is None:
            raise SparqlSyntaxError("unterminated group pattern, missing '}'")
        if tok == ("punct", "}"):
            stream.next()
            break
        s = _parse_term(stream, dictionary)
        p = _parse_term(stream, dictionary)
        o = _parse_term(stream, dictionary)
        atom = TriplePattern(s, p, o)
        if atom not in body:
            body.append(atom)
        if stream.peek() == ("punct", "."):
            stream.next()
    tok = stream.peek()
    if tok is not None:
        raise SparqlSyntaxError(f"trailing content after '}}': {tok[1]!r}")
    return tuple(body)


# --- canonical form ------------------------------------------------------

class CanonResult(NamedTuple):
    key: str
    var_order: tuple[str, ...]
    atoms: tuple[TriplePattern, ...]


def _atom_signature(atom: TriplePattern) -> tuple:
    """A renaming-invariant shape for one atom.

    Variables are numbered by first occurrence inside the atom, so
    (x, p, y) and (u, p, w) share a signature while (x, p, x) differs.
    """
    local: dict[str, int] = {}
    cells = []
    n_const = 0
    for pos, term in enumerate(atom):
        if isinstance(term, Const):
            cells.append(("c", term.tid))
            if pos != 1:
                n_const += 1
        else:
            if term.name not in local:
                local[term.name] = len(local)
            cells.append(("v", local[term.name]))
    return (n_const, tuple(cells))


def _masked_render(atom: TriplePattern, name: str, colors: dict[str, int]) -> tuple:
    cells = []
    for term in atom:
        if isinstance(term, Const):
            cells.append(("c", term.tid))
        elif term.name == name:
            cells.append(("self",))
        else:
            cells.append(("v", colors[term.name]))
    return tuple(cells)


def _refine(
    body: Sequence[TriplePattern],
    names: Sequence[str],
    occurrences: dict[str, list[TriplePattern]],
    colors: dict[str, int],
) -> dict[str, int]:
    """Iterate color refinement until the variable partition is stable."""
    while True:
        data = {
            name: (
                colors[name],
                tuple(sorted(_masked_render(a, name, colors) for a in occurrences[name])),
            )
            for name in names
        }
        ranked = {value: rank for rank, value in enumerate(sorted(set(data.values())))}
        new_colors = {name: ranked[data[name]] for name in names}
        if new_colors == colors:
            return colors
        colors = new_colors


def _term_key(term: QTerm, ranks: dict[str, int]) -> tuple:
    if isinstance(term, Const):
        return (1, term.tid)
    return (0, ranks[term.name])


def _atom_sort_key(atom: TriplePattern, ranks: dict[str, int]) -> tuple:
    n_const = sum(
        1 for pos, t in enumerate(atom) if pos != 1 and isinstance(t, Const)
    )
    return (
        n_const,
        _term_key(atom.p, ranks),
        _term_key(atom.s, ranks),
        _term_key(atom.o, ranks),
    )


def _render_leaf(
    body: Sequence[TriplePattern],
    head: Optional[Sequence[str]],
    order: Sequence[str],
) -> tuple[tuple, tuple[TriplePattern, ...]]:
    ranks = {name: i for i, name in enumerate(order)}
    ordered = tuple(sorted(body, key=lambda a: _atom_sort_key(a, ranks)))
    atom_part = tuple(
        tuple(_term_key(t, ranks) for t in atom) for atom in ordered
    )
    if head is None:
        head_part: tuple = ("*",)
    else:
        head_part = tuple(ranks[name] for name in head)
    return (atom_part, head_part), ordered


def canonize(
    body: Sequence[TriplePattern], head: Optional[Sequence[str]] = None
) -> CanonResult:
    """Compute a canonical form by refinement plus individualization.

    Two bodies (with heads, when given) receive the same key exactly
    when a variable bijection maps one onto the other.  The returned
    var_order is a total order on the variables realizing the key, and
    atoms lists the original atoms in canonical order.  With head=None
    every variable is treated as an output, which is the mode views use.
    """
    body = tuple(dict.fromkeys(body))
    names = pattern_vars(body)
    if not names:
        label, ordered = _render_leaf(body, head, ())
        return CanonResult(_format_key(label), (), ordered)

    occurrences: dict[str, list[TriplePattern]] = {name: [] for name in names}
    for atom in body:
        for name in set(atom.variables()):
            occurrences[name].append(atom)

    head_index = {name: i for i, name in enumerate(head)} if head is not None else {}
    seeds = {
        name: (
            head_index.get(name, -1),
            tuple(sorted(_atom_signature(a) for a in occurrences[name])),
        )
        for name in names
    }
    ranked = {value: rank for rank, value in enumerate(sorted(set(seeds.values())))}
    colors = _refine(body, names, occurrences, {n: ranked[seeds[n]] for n in names})

    best: Optional[tuple] = None
    best_order: tuple[str, ...] = ()
    best_atoms: tuple[TriplePattern, ...] = ()

    stack = [colors]
    while stack:
        current = _refine(body, names, occurrences, stack.pop())
        classes: dict[int, list[str]] = {}
        for name in names:
            classes.setdefault(current[name], []).append(name)
        split = next(
            (members for _, members in sorted(classes.items()) if len(members) > 1),
            None,
        )
        if split is None:
            order = tuple(sorted(names, key=lambda n: current[n]))
            label, ordered = _render_leaf(body, head, order)
            if best is None or label < best:
                best = label
                best_order = order
                best_atoms = ordered
            continue
        for name in sorted(split):
            branched = dict(current)
            branched[name] = -1
            reranked = {
                value: rank
                for rank, value in enumerate(sorted(set(branched.values())))
            }
            stack.append({n: reranked[branched[n]] for n in names})

    assert best is not None
    return CanonResult(_format_key(best), best_order, best_atoms)


def _format_key(label: tuple) -> str:
    atom_part, head_part = label
    atoms = []
    for cells in atom_part:
        rendered = []
        for tag, value in cells:
            rendered.append(f"c{value}" if tag == 1 else f"?{value}")
        atoms.append("({} {} {})".format(*rendered))
    if head_part == ("*",):
        head_text = "*"
    else:
        head_text = ",".join(f"?{i}" for i in head_part)
    return "|".join(atoms) + f"|H:{head_text}"


def canonical_form(
    body: Sequence[TriplePattern], head: Optional[Sequence[str]] = None
) -> str:
    """The canonical key alone, for equality and dictionary use."""
    return canonize(body, head).key


def isomorphism(
    body_a: Sequence[TriplePattern],
    head_a: Optional[Sequence[str]],
    body_b: Sequence[TriplePattern],
    head_b: Optional[Sequence[str]],
) -> Optional[dict[str, str]]:
    """A variable mapping from a onto b when their canonical forms agree."""
    canon_a = canonize(body_a, head_a)
    canon_b = canonize(body_b, head_b)
    if canon_a.key != canon_b.key:
        return None
    return dict(zip(canon_a.var_order, canon_b.var_order))


# --- printing ------------------------------------------------------------

def format_term(term: QTerm, dictionary: Dictionary) -> str:
    if isinstance(term, Var):
        return f"?{term.name}"
    return format_constant(dictionary.term_of(term.tid))


def format_constant(term: Term) -> str:
    if term.kind == "iri":
        return f"<{term.lexical}>"
    escaped = (
        term.lexical.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def format_body(body: Sequence[TriplePattern], dictionary: Dictionary) -> str:
    parts = [
        " ".join(format_term(t, dictionary) for t in atom) + " ." for atom in body
    ]
    return "{ " + " ".join(parts) + " }"


def format_query(query: ConjunctiveQuery, dictionary: Dictionary) -> str:
    """Render back to the SPARQL subset; parsing the result round-trips."""
    head = " ".join(f"?{name}" for name in query.head)
    return f"SELECT {head} WHERE {format_body(query.body, dictionary)}"


# --- workload files ------------------------------------------------------

def load_workload(text: str, dictionary: Dictionary) -> Workload:
    """Load a JSON array of {name, sparql, weight?} entries."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EmptyWorkloadError(f"workload file is not valid JSON: {exc}") from exc
    if not isinstance(raw, list) or not raw:
        raise EmptyWorkloadError("workload must be a non-empty JSON array")
    queries: list[ConjunctiveQuery] = []
    names: set[str] = set()
    for index, entry in enumerate(raw):
        if not isinstance(entry, dict) or "sparql" not in entry:
            raise EmptyWorkloadError(
                f"workload entry {index} must be an object with a sparql field"
            )
        name = str(entry.get("name", f"q{index + 1}"))
        if name in names:
            raise EmptyWorkloadError(f"duplicate query name {name!r}")
        names.add(name)
        try:
            weight = to_fraction(entry.get("weight", 1))
        except (ValueError, ZeroDivisionError) as exc:
            raise EmptyWorkloadError(
                f"query {name!r} has an invalid weight: {entry.get('weight')!r}"
            ) from exc
        queries.append(parse_sparql(entry["sparql"], dictionary, weight, name))
    return Workload(tuple(queries))


def dump_workload(workload: Workload, dictionary: Dictionary) -> str:
    entries = [
        {
            "name": q.name,
            "weight": str(q.weight),
            "sparql": format_query(q, dictionary),
        }
        for q in workload
    ]
    return json.dumps(entries, indent=2)
