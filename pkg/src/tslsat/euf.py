"""Conjunctive queries over uninterpreted functions with equality.

A query is a set of signed predicate terms plus term equalities.  Each
``(p, True)`` is read as ``p = TOP`` and each ``(p, False)`` as ``p = BOT``;
the query is unsatisfiable iff congruence closure merges TOP and BOT.
"""
from __future__ import annotations

import enum
import re
import shlex
import subprocess
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .terms import CELL, FUNC, PRED, STAR, Term, app, subterms

TOP = app("⊤")
BOT = app("⊥")


class EufResult(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"


class QueryBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EufQuery:
    signed_predicates: frozenset[tuple[Term, bool]] = frozenset()
    equalities: tuple[tuple[Term, Term], ...] = ()

    def __post_init__(self):
        for t, _ in self.signed_predicates:
            if t.kind != PRED:
                raise ValueError(f"{t} is not a predicate term")
        for a, b in self.equalities:
            if STAR in (a.kind, b.kind):
                raise ValueError("queries must be STAR-free")

    def terms(self) -> list[Term]:
        out = [t for t, _ in self.signed_predicates]
        for a, b in self.equalities:
            out += [a, b]
        return out

    def sorted_literals(self) -> list[tuple[Term, bool]]:
        return sorted(self.signed_predicates, key=lambda lv: (lv[0].id, lv[1]))

    def __str__(self) -> str:
        parts = [f"{'' if v else '!'}{t}" for t, v in self.sorted_literals()]
        parts += [f"{a} = {b}" for a, b in self.equalities]
        return " && ".join(parts) or "true"


_MISSING = object()


@dataclass
class CongruenceStore:
    """Incremental congruence closure with an undo trail for push/pop."""

    term_budget: int | None = None
    parent: dict[int, int] = field(default_factory=dict)
    rank: dict[int, int] = field(default_factory=dict)
    uses: dict[int, list[int]] = field(default_factory=dict)
    sigs: dict[tuple, int] = field(default_factory=dict)
    terms: dict[int, Term] = field(default_factory=dict)
    _trail: list = field(default_factory=list)
    _marks: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.add(TOP)
        self.add(BOT)

    # trailed writes
    def _set(self, d: dict, k, v) -> None:
        if self._marks:
            self._trail.append((d, k, d.get(k, _MISSING)))
        d[k] = v

    def _append(self, lst: list, v) -> None:
        if self._marks:
            self._trail.append((lst, None, None))
        lst.append(v)

    def push(self) -> None:
        self._marks.append(len(self._trail))

    def pop(self) -> None:
        mark = self._marks.pop()
        while len(self._trail) > mark:
            target, k, old = self._trail.pop()
            if isinstance(target, list):
                target.pop()
            elif old is _MISSING:
                del target[k]
            else:
                target[k] = old

    def find(self, i: int) -> int:
        root = i
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            nxt = parent[i]
            self._set(parent, i, root)
            i = nxt
        return root

    def add(self, t: Term) -> int:
        if t.id in self.parent:
            return t.id
        if t.kind == STAR:
            raise ValueError("STAR cannot enter a congruence store")
        pending: list[tuple[int, int]] = []
        stack = [(t, False)]
        while stack:
            u, ready = stack.pop()
            if u.id in self.parent:
                continue
            if not ready:
                stack.append((u, True))
                stack.extend((a, False) for a in u.args if a.id not in self.parent)
                continue
            if self.term_budget is not None and len(self.terms) >= self.term_budget:
                raise QueryBudgetExceeded(f"query exceeds {self.term_budget} terms")
            self._set(self.parent, u.id, u.id)
            self._set(self.rank, u.id, 0)
            self._set(self.uses, u.id, [])
            self._set(self.terms, u.id, u)
            if u.args:
                for a in u.args:
                    self._append(self.uses[self.find(a.id)], u.id)
                sig = self._signature(u)
                other = self.sigs.get(sig)
                if other is None:
                    self._set(self.sigs, sig, u.id)
                else:
                    pending.append((u.id, other))
        self._process(pending)
        return t.id

    def _signature(self, u: Term) -> tuple:
        return (u.kind, u.head, tuple(self.find(a.id) for a in u.args))

    def merge(self, a: Term, b: Term) -> None:
        self._process([(self.add(a), self.add(b))])

    def _process(self, pending: list[tuple[int, int]]) -> None:
        while pending:
            x, y = pending.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if self.rank[rx] > self.rank[ry]:
                rx, ry = ry, rx
            if self.rank[rx] == self.rank[ry]:
                self._set(self.rank, ry, self.rank[ry] + 1)
            self._set(self.parent, rx, ry)
            moved = self.uses[rx]
            target = self.uses[ry]
            for u in moved:
                sig = self._signature(self.terms[u])
                other = self.sigs.get(sig)
                if other is None:
                    self._set(self.sigs, sig, u)
                elif self.find(other) != self.find(u):
                    pending.append((u, other))
                self._append(target, u)

    def assert_literal(self, p: Term, value: bool) -> None:
        self.merge(p, TOP if value else BOT)

    def consistent(self) -> bool:
        return self.find(TOP.id) != self.find(BOT.id)

    def equal(self, a: Term, b: Term) -> bool:
        return self.find(self.add(a)) == self.find(self.add(b))

    def classes(self) -> list[list[Term]]:
        """Equivalence classes of function terms (sentinels and predicates excluded)."""
        groups: dict[int, list[Term]] = {}
        for i, t in self.terms.items():
            if t.kind in (CELL, FUNC) and t is not TOP and t is not BOT:
                groups.setdefault(self.find(i), []).append(t)
        out = [sorted(g, key=lambda t: (t.depth, str(t))) for g in groups.values()]
        return sorted(out, key=lambda g: (g[0].depth, str(g[0])))

    def polarities(self) -> list[tuple[Term, bool | None]]:
        top, bot = self.find(TOP.id), self.find(BOT.id)
        out = []
        for i, t in self.terms.items():
            if t.kind == PRED:
                r = self.find(i)
                out.append((t, True if r == top else False if r == bot else None))
        return sorted(out, key=lambda tv: (tv[0].depth, str(tv[0])))


def load_query(store: CongruenceStore, q: EufQuery) -> None:
    for t, v in q.sorted_literals():
        store.assert_literal(t, v)
    for a, b in q.equalities:
        store.merge(a, b)


def check_query(q: EufQuery, term_budget: int | None = None) -> EufResult:
    store = CongruenceStore(term_budget=term_budget)
    load_query(store, q)
    return EufResult.SAT if store.consistent() else EufResult.UNSAT


ORACLE_LIMIT = 512


def naive_closure_oracle(q: EufQuery) -> EufResult:
    """Brute-force congruence: boolean relation matrix iterated to a fixpoint."""
    universe: dict[int, Term] = {}
    for t in [TOP, BOT, *q.terms()]:
        subterms(t, universe)
    terms = sorted(universe.values(), key=lambda t: t.id)
    n = len(terms)
    if n > ORACLE_LIMIT:
        raise ValueError(f"oracle universe of {n} terms exceeds {ORACLE_LIMIT}")
    pos = {t.id: i for i, t in enumerate(terms)}
    rel = np.eye(n, dtype=bool)
    for t, v in q.signed_predicates:
        s = pos[(TOP if v else BOT).id]
        rel[pos[t.id], s] = rel[s, pos[t.id]] = True
    for a, b in q.equalities:
        rel[pos[a.id], pos[b.id]] = rel[pos[b.id], pos[a.id]] = True
    groups: dict[tuple, list[int]] = {}
    for i, t in enumerate(terms):
        if t.args:
            groups.setdefault((t.kind, t.head, len(t.args)), []).append(i)
    group_args = {
        k: (np.array(ix), np.array([[pos[a.id] for a in terms[i].args] for i in ix])) for k, ix in groups.items()
    }
    while True:
        before = rel.copy()
        for k in range(n):
            rel |= np.outer(rel[:, k], rel[k, :])
        for ix, args in group_args.values():
            same = np.ones((len(ix), len(ix)), dtype=bool)
            for j in range(args.shape[1]):
                col = args[:, j]
                same &= rel[np.ix_(col, col)]
            rel[np.ix_(ix, ix)] |= same
        if np.array_equal(before, rel):
            break
    return EufResult.UNSAT if rel[pos[TOP.id], pos[BOT.id]] else EufResult.SAT


def _sanitize(prefix: str, name: str) -> str:
    out = []
    for ch in name:
        if ch.isascii() and ch.isalnum():
            out.append(ch)
        elif ch == "_":
            out.append("__")
        else:
            out.append(f"_x{ord(ch):x}_")
    return prefix + "".join(out)


def export_smtlib(q: EufQuery) -> str:
    """QF_UF script: one sort ``U``, predicates as Bool-valued functions."""
    universe: dict[int, Term] = {}
    for t in q.terms():
        subterms(t, universe)
    decls: dict[str, str] = {}
    for t in universe.values():
        match t.kind:
            case 0:  # cell
                decls[_sanitize("c_", t.head)] = f"(declare-fun {_sanitize('c_', t.head)} () U)"
            case 1:
                name = _sanitize("f_", t.head)
                decls[name] = f"(declare-fun {name} ({' '.join(['U'] * len(t.args))}) U)"
            case 2:
                name = _sanitize("p_", t.head)
                decls[name] = f"(declare-fun {name} ({' '.join(['U'] * len(t.args))}) Bool)"
    lines = ["(set-logic QF_UF)", "(declare-sort U 0)"]
    lines += [decls[k] for k in sorted(decls)]
    for t, v in q.sorted_literals():
        s = _smt_term(t)
        lines.append(f"(assert {s})" if v else f"(assert (not {s}))")
    for a, b in q.equalities:
        lines.append(f"(assert (= {_smt_term(a)} {_smt_term(b)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _smt_term(t: Term) -> str:
    match t.kind:
        case 0:
            return _sanitize("c_", t.head)
        case 1:
            name = _sanitize("f_", t.head)
        case 2:
            name = _sanitize("p_", t.head)
        case _:
            raise ValueError("STAR has no SMT-LIB form")
    if not t.args:
        return name
    return f"({name} {' '.join(_smt_term(a) for a in t.args)})"


_ANSWER = re.compile(r"^\s*(sat|unsat|unknown)\s*$")


def run_external_solver(script: str, command: str, timeout: float | None = 60.0) -> str:
    """Pipe ``script`` to ``command`` and return the first line it answers."""
    proc = subprocess.run(
        shlex.split(command), input=script, capture_output=True, text=True, timeout=timeout, check=False
    )
    for line in proc.stdout.splitlines():
        m = _ANSWER.match(line)
        if m:
            return m.group(1)
    raise RuntimeError(f"solver {command!r} gave no answer: {proc.stdout.strip()} {proc.stderr.strip()}")


def check_query_external(q: EufQuery, command: str) -> EufResult | None:
    answer = run_external_solver(export_smtlib(q), command)
    return {"sat": EufResult.SAT, "unsat": EufResult.UNSAT}.get(answer)


def query_from(literals: Iterable[tuple[Term, bool]], equalities: Iterable[tuple[Term, Term]] = ()) -> EufQuery:
    return EufQuery(frozenset(literals), tuple(equalities))
