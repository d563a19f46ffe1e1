"""Hash-consed function and predicate terms, signatures and symbolic evaluation.

Every term lives in one global append-only arena.  Structurally equal terms
are the same Python object and carry the same dense integer ``id``, so
syntactic equivalence is an identity check.
"""
from __future__ import annotations

import threading
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

CELL = 0
FUNC = 1
PRED = 2
STAR = 3

KEYWORDS = frozenset({"true", "false", "X", "F", "G", "U", "R"})
STAR_NAME = "STAR"
NEW_NAME = "new"
PICK_PREFIX = "pick_"


class SignatureError(ValueError):
    """Raised for arity clashes, undeclared symbols and reserved names."""


class Term:
    __slots__ = ("id", "kind", "head", "args", "depth", "__weakref__")

    id: int
    kind: int
    head: str
    args: tuple[Term, ...]
    depth: int

    def __init__(self, *_a, **_k):
        raise TypeError("terms are created through the arena helpers (cell, app, pred)")

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return self.id

    def __lt__(self, other: Term) -> bool:
        return self.id < other.id

    def __reduce__(self):
        # pickling re-interns in the receiving process
        if self.kind == CELL:
            return (cell, (self.head,))
        if self.kind == STAR:
            return (star, ())
        if self.kind == FUNC:
            return (app, (self.head, *self.args))
        return (pred, (self.head, *self.args))

    @property
    def is_cell(self) -> bool:
        return self.kind == CELL

    @property
    def is_star(self) -> bool:
        return self.kind == STAR

    @property
    def is_pred(self) -> bool:
        return self.kind == PRED

    def __repr__(self) -> str:
        return f"Term({self})"

    def __str__(self) -> str:
        return show(self)


class _Arena:
    def __init__(self) -> None:
        self._table: dict[tuple, Term] = {}
        self._terms: list[Term] = []
        self._lock = threading.Lock()

    def intern(self, kind: int, head: str, args: tuple[Term, ...]) -> Term:
        key = (kind, head, tuple(a.id for a in args))
        t = self._table.get(key)
        if t is not None:
            return t
        with self._lock:
            t = self._table.get(key)
            if t is None:
                t = object.__new__(Term)
                t.id = len(self._terms)
                t.kind = kind
                t.head = head
                t.args = args
                t.depth = 1 + max((a.depth for a in args), default=0)
                self._terms.append(t)
                self._table[key] = t
        return t

    def __len__(self) -> int:
        return len(self._terms)

    def get(self, tid: int) -> Term:
        return self._terms[tid]


ARENA = _Arena()


def cell(name: str) -> Term:
    return ARENA.intern(CELL, name, ())


def app(fn: str, *args: Term) -> Term:
    for a in args:
        if a.kind == STAR:
            raise SignatureError("STAR cannot be nested inside a term")
        if a.kind == PRED:
            raise SignatureError(f"predicate term {a} used as a function argument")
    return ARENA.intern(FUNC, fn, tuple(args))


def pred(p: str, *args: Term) -> Term:
    for a in args:
        if a.kind in (STAR, PRED):
            raise SignatureError(f"illegal predicate argument {a}")
    return ARENA.intern(PRED, p, tuple(args))


def star() -> Term:
    return ARENA.intern(STAR, STAR_NAME, ())


def show(t: Term) -> str:
    if t.kind == CELL:
        return t.head
    if t.kind == STAR:
        return "*"
    return f"{t.head}({', '.join(show(a) for a in t.args)})"


def subterms(t: Term, acc: dict[int, Term] | None = None) -> dict[int, Term]:
    """All subterms of ``t`` (including ``t``), keyed by id."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        u = stack.pop()
        if u.id in acc:
            continue
        acc[u.id] = u
        stack.extend(u.args)
    return acc


def cells_of(t: Term) -> set[Term]:
    return {u for u in subterms(t).values() if u.kind == CELL}


def substitute(t: Term, mapping: Mapping[Term, Term], memo: dict[int, Term] | None = None) -> Term:
    """Replace every cell ``c`` in ``t`` by ``mapping[c]`` (cells absent from the map stay)."""
    if memo is None:
        memo = {}
    return _subst(t, mapping, memo)


def _subst(t: Term, mapping: Mapping[Term, Term], memo: dict[int, Term]) -> Term:
    hit = memo.get(t.id)
    if hit is not None:
        return hit
    if t.kind == CELL:
        r = mapping.get(t, t)
    elif not t.args:
        r = t
    else:
        new_args = tuple(_subst(a, mapping, memo) for a in t.args)
        if all(x is y for x, y in zip(new_args, t.args)):
            r = t
        else:
            r = ARENA.intern(t.kind, t.head, new_args)
    memo[t.id] = r
    return r


@dataclass
class Signature:
    """Function symbols, predicate symbols (name -> arity) and the ordered cell set."""

    functions: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, int] = field(default_factory=dict)
    cells: list[str] = field(default_factory=list)

    def copy(self) -> Signature:
        return Signature(dict(self.functions), dict(self.predicates), list(self.cells))

    def _check_free(self, name: str, kind: str) -> None:
        if name in KEYWORDS:
            raise SignatureError(f"'{name}' is a keyword")
        owners = {
            "function": name in self.functions,
            "predicate": name in self.predicates,
            "cell": name in self.cells,
        }
        for other, present in owners.items():
            if present and other != kind:
                raise SignatureError(f"'{name}' is already declared as a {other}")

    def declare_cell(self, name: str) -> None:
        self._check_free(name, "cell")
        if name not in self.cells:
            self.cells.append(name)

    def declare_function(self, name: str, arity: int) -> None:
        self._check_free(name, "function")
        old = self.functions.get(name)
        if old is not None and old != arity:
            raise SignatureError(f"function '{name}' used with arities {old} and {arity}")
        self.functions[name] = arity

    def declare_predicate(self, name: str, arity: int) -> None:
        self._check_free(name, "predicate")
        old = self.predicates.get(name)
        if old is not None and old != arity:
            raise SignatureError(f"predicate '{name}' used with arities {old} and {arity}")
        self.predicates[name] = arity

    def reserved_names(self) -> list[str]:
        names = [*self.functions, *self.predicates, *self.cells]
        return [n for n in names if is_reserved(n)]

    def cell_terms(self) -> tuple[Term, ...]:
        return tuple(cell(c) for c in self.cells)

    def check_term(self, t: Term) -> None:
        for u in subterms(t).values():
            if u.kind == CELL and u.head not in self.cells:
                raise SignatureError(f"undeclared cell '{u.head}'")
            if u.kind == FUNC and self.functions.get(u.head) != len(u.args):
                raise SignatureError(f"function '{u.head}' not declared with arity {len(u.args)}")
            if u.kind == PRED and self.predicates.get(u.head) != len(u.args):
                raise SignatureError(f"predicate '{u.head}' not declared with arity {len(u.args)}")


def is_reserved(name: str) -> bool:
    return name in (STAR_NAME, NEW_NAME) or name.startswith(PICK_PREFIX)


# An assignment maps every cell (as a cell term) to the function term it receives.
Assignment = Mapping[Term, Term]


def eta(prefix: Sequence[Assignment], t: int, term: Term) -> Term:
    """Symbolic evaluation of ``term`` after ``t`` steps of ``prefix``.

    A cell at step 0 is itself; at step t > 0 it is the evaluation, at step
    t - 1, of the term it was assigned at step t - 1.  Applications are
    evaluated argument-wise.
    """
    if not 0 <= t <= len(prefix):
        raise IndexError(f"time {t} outside prefix of length {len(prefix)}")
    if term.kind == STAR:
        raise ValueError("cannot evaluate STAR")
    memo: dict[tuple[int, int], Term] = {}

    def ev(k: int, u: Term) -> Term:
        key = (k, u.id)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if u.kind == CELL:
            if k == 0:
                r = u
            else:
                assigned = prefix[k - 1].get(u, u)
                if assigned.kind == STAR:
                    raise ValueError(f"cell {u} holds STAR at step {k - 1}")
                r = ev(k - 1, assigned)
        elif not u.args:
            r = u
        else:
            r = ARENA.intern(u.kind, u.head, tuple(ev(k, a) for a in u.args))
        memo[key] = r
        return r

    return ev(t, term)


def eta_pred(prefix: Sequence[Assignment], t: int, predicate_term: Term) -> Term:
    if predicate_term.kind != PRED:
        raise ValueError(f"{predicate_term} is not a predicate term")
    return eta(prefix, t, predicate_term)
