"""Dictionary-encoded triple storage.

The whole dataset lives in a single in-memory triple table of integer ids.
IRIs and literals are interned into a bijective dictionary; per-property
counts back the cost model. Table and statistics are frozen after load;
the dictionary stays append-only so later query parsing can mint ids for
constants that never occur in the data.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

from .errors import BlankNodeError, NTriplesSyntaxError, UnknownIdError

IRI = "iri"
LITERAL = "literal"


@dataclass(frozen=True, slots=True)
class Term:
    kind: str  # IRI or LITERAL
    lexical: str

    def __post_init__(self):
        if self.kind not in (IRI, LITERAL):
            raise ValueError(f"bad term kind {self.kind!r}")
        if self.kind == IRI and not self.lexical:
            raise ValueError("IRI term needs a non-empty lexical form")


def iri(lexical: str) -> Term:
    return Term(IRI, lexical)


def literal(lexical: str) -> Term:
    return Term(LITERAL, lexical)


class Triple(NamedTuple):
    s: int
    p: int
    o: int


class Dictionary:
    """Bijective Term <-> id map; ids are dense and start at 1 (0 is a sentinel)."""

    def __init__(self):
        self._forward: dict[Term, int] = {}
        self._reverse: list[Term] = []  # position i holds the term with id i+1
        self._lock = threading.Lock()

    def intern(self, term: Term) -> int:
        tid = self._forward.get(term)
        if tid is not None:
            return tid
        with self._lock:
            tid = self._forward.get(term)
            if tid is None:
                self._reverse.append(term)
                tid = len(self._reverse)
                self._forward[term] = tid
            return tid

    def id_of(self, term: Term) -> Optional[int]:
        return self._forward.get(term)

    def term_of(self, tid: int) -> Term:
        if not 1 <= tid <= len(self._reverse):
            raise UnknownIdError(tid)
        return self._reverse[tid - 1]

    def __len__(self) -> int:
        return len(self._reverse)

    def __contains__(self, tid: int) -> bool:
        return 1 <= tid <= len(self._reverse)

    def items(self) -> Iterator[tuple[int, Term]]:
        for i, term in enumerate(self._reverse):
            yield i + 1, term

    def dump_tsv(self) -> str:
        """Tab-separated `id<TAB>kind<TAB>lexical` lines, one per term."""
        lines = [f"{tid}\t{term.kind}\t{term.lexical}" for tid, term in self.items()]
        return "\n".join(lines) + ("\n" if lines else "")


class TripleTable:
    """Duplicate-free triple sequence with property-first indexes."""

    def __init__(self, triples: Sequence[Triple]):
        seen: set[Triple] = set()
        ordered: list[Triple] = []
        for t in triples:
            if t not in seen:
                seen.add(t)
                ordered.append(t)
        self.triples: tuple[Triple, ...] = tuple(ordered)
        self._by_p: dict[int, list[Triple]] = {}
        self._by_ps: dict[tuple[int, int], list[Triple]] = {}
        self._by_po: dict[tuple[int, int], list[Triple]] = {}
        for t in self.triples:
            self._by_p.setdefault(t.p, []).append(t)
            self._by_ps.setdefault((t.p, t.s), []).append(t)
            self._by_po.setdefault((t.p, t.o), []).append(t)

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._by_ps.get((t.p, t.s), ()) if (t.p, t.s) in self._by_ps else False

    def property_count(self, p: int) -> int:
        return len(self._by_p.get(p, ()))

    def match(self, s: Optional[int], p: Optional[int], o: Optional[int]) -> list[Triple]:
        """All triples matching the bound positions, in table order. None = wildcard."""
        if p is not None:
            if s is not None:
                cand = self._by_ps.get((p, s), [])
                return [t for t in cand if o is None or t.o == o]
            if o is not None:
                return list(self._by_po.get((p, o), []))
            return list(self._by_p.get(p, []))
        # Unbound property: fall back to a scan (workload atoms normally bind p).
        return [
            t
            for t in self.triples
            if (s is None or t.s == s) and (o is None or t.o == o)
        ]


def lookup_atom(
    table: TripleTable, pattern: tuple[Optional[int], Optional[int], Optional[int]]
) -> list[Triple]:
    s, p, o = pattern
    return table.match(s, p, o)


@dataclass(frozen=True, slots=True)
class PropertyStats:
    count: int
    distinct_subjects: int
    distinct_objects: int


@dataclass(frozen=True)
class DataStatistics:
    total: int
    per_property: dict[int, PropertyStats]
    distinct_properties: int
    distinct_subjects: int
    distinct_objects: int

    def count(self, p: Optional[int]) -> int:
        if p is None:
            return self.total
        st = self.per_property.get(p)
        return st.count if st else 0

    def d_subjects(self, p: Optional[int]) -> int:
        """Distinct-subject count for p, floored at 1 so selectivities stay defined."""
        if p is None:
            return max(1, self.distinct_subjects)
        st = self.per_property.get(p)
        return st.distinct_subjects if st else 1

    def d_objects(self, p: Optional[int]) -> int:
        if p is None:
            return max(1, self.distinct_objects)
        st = self.per_property.get(p)
        return st.distinct_objects if st else 1

    def d_properties(self) -> int:
        return max(1, self.distinct_properties)


def compute_statistics(table: TripleTable) -> DataStatistics:
    subs: dict[int, set[int]] = {}
    objs: dict[int, set[int]] = {}
    counts: dict[int, int] = {}
    all_s: set[int] = set()
    all_o: set[int] = set()
    for t in table.triples:
        counts[t.p] = counts.get(t.p, 0) + 1
        subs.setdefault(t.p, set()).add(t.s)
        objs.setdefault(t.p, set()).add(t.o)
        all_s.add(t.s)
        all_o.add(t.o)
    per = {
        p: PropertyStats(counts[p], len(subs[p]), len(objs[p])) for p in counts
    }
    return DataStatistics(
        total=len(table),
        per_property=per,
        distinct_properties=len(counts),
        distinct_subjects=len(all_s),
        distinct_objects=len(all_o),
    )


TermTriple = tuple[Term, Term, Term]

# <iri>, "literal" with the usual N-Triples escapes, or a blank node label.
_IRI_RE = re.compile(r"<([^<>\s]+)>")
_LITERAL_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')
_BLANK_RE = re.compile(r"_:\S+")

_UNESCAPES = {"\\\\": "\\", '\\"': '"', "\\n": "\n", "\\r": "\r", "\\t": "\t"}


def _unescape(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        if s[i] == "\\" and i + 1 < len(s):
            pair = s[i : i + 2]
            out.append(_UNESCAPES.get(pair, pair[1]))
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def _take_term(line: str, pos: int, line_no: int, allow_literal: bool) -> tuple[Term, int]:
    m = _BLANK_RE.match(line, pos)
    if m:
        raise BlankNodeError(line_no, "blank nodes are not supported")
    m = _IRI_RE.match(line, pos)
    if m:
        return iri(m.group(1)), m.end()
    if allow_literal:
        m = _LITERAL_RE.match(line, pos)
        if m:
            return literal(_unescape(m.group(1))), m.end()
        raise NTriplesSyntaxError(line_no, f"expected IRI or literal at column {pos + 1}")
    raise NTriplesSyntaxError(line_no, f"expected IRI at column {pos + 1}")


def _skip_ws(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    return pos


def parse_ntriples(text: str) -> list[TermTriple]:
    """Parse the N-Triples subset: `<iri> <iri> (<iri>|"literal") .` per line.

    Comments (#) and blank lines are skipped. Raises with the 1-based line
    number on the first malformed line; blank nodes are rejected outright.
    """
    triples: list[TermTriple] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        pos = 0
        s, pos = _take_term(line, pos, line_no, allow_literal=False)
        pos = _skip_ws(line, pos)
        p, pos = _take_term(line, pos, line_no, allow_literal=False)
        pos = _skip_ws(line, pos)
        o, pos = _take_term(line, pos, line_no, allow_literal=True)
        pos = _skip_ws(line, pos)
        if pos >= len(line) or line[pos] != ".":
            raise NTriplesSyntaxError(line_no, "missing terminating '.'")
        rest = line[pos + 1 :].strip()
        if rest and not rest.startswith("#"):
            raise NTriplesSyntaxError(line_no, f"trailing content {rest!r}")
        triples.append((s, p, o))
    return triples


def load_dataset(
    term_triples: Iterable[TermTriple], dictionary: Optional[Dictionary] = None
) -> tuple[Dictionary, TripleTable, DataStatistics]:
    """Encode term triples into a fresh table.

    Ids are assigned in first-seen order scanning s, p, o per triple (before
    deduplication); duplicate triples collapse and statistics cover the
    deduplicated table only.
    """
    d = dictionary if dictionary is not None else Dictionary()
    encoded = [Triple(d.intern(s), d.intern(p), d.intern(o)) for s, p, o in term_triples]
    table = TripleTable(encoded)
    return d, table, compute_statistics(table)


def decode_row(dictionary: Dictionary, row: Sequence[int]) -> list[Term]:
    return [dictionary.term_of(tid) for tid in row]
