"""The TSL abstract syntax tree.

Only the core connectives are stored.  ``Or``, ``Implies``, ``Iff``,
``Eventually``, ``Globally``, ``Release`` and ``false`` are constructor
functions returning their desugared core form.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Union

from .terms import CELL, PRED, STAR, Signature, Term


@dataclass(frozen=True, slots=True)
class TTrue:
    pass


@dataclass(frozen=True, slots=True)
class Not:
    arg: Formula


@dataclass(frozen=True, slots=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Next:
    arg: Formula


@dataclass(frozen=True, slots=True)
class Until:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Pred:
    term: Term

    def __post_init__(self):
        if self.term.kind != PRED:
            raise TypeError(f"{self.term} is not a predicate term")


@dataclass(frozen=True, slots=True)
class Update:
    cell: Term
    term: Term

    def __post_init__(self):
        if self.cell.kind != CELL:
            raise TypeError(f"update target {self.cell} is not a cell")
        if self.term.kind in (PRED, STAR):
            raise TypeError(f"illegal update term {self.term}")


Formula = Union[TTrue, Not, And, Next, Until, Pred, Update]

TRUE = TTrue()


def false() -> Formula:
    return Not(TRUE)


def Or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def Implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def Eventually(a: Formula) -> Formula:
    return Until(TRUE, a)


def Globally(a: Formula) -> Formula:
    return Not(Until(TRUE, Not(a)))


def Release(a: Formula, b: Formula) -> Formula:
    return Not(Until(Not(a), Not(b)))


def conj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TRUE
    return reduce(And, parts)


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return false()
    return reduce(Or, parts)


def next_n(a: Formula, n: int) -> Formula:
    for _ in range(n):
        a = Next(a)
    return a


def conjuncts(phi: Formula) -> list[Formula]:
    """Flatten a top-level tree of ``And`` nodes, left to right."""
    out: list[Formula] = []
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, And):
            stack.append(f.right)
            stack.append(f.left)
        else:
            out.append(f)
    return out


def _walk(phi: Formula):
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        match f:
            case Not(a) | Next(a):
                stack.append(a)
            case And(a, b) | Until(a, b):
                stack.append(b)
                stack.append(a)


def predicates(phi: Formula) -> list[Term]:
    """Predicate terms of ``phi`` in first-occurrence order."""
    seen: dict[Term, None] = {}
    for f in _walk(phi):
        if isinstance(f, Pred):
            seen.setdefault(f.term)
    return list(seen)


def updates(phi: Formula) -> list[tuple[Term, Term]]:
    """(cell, term) pairs of every update atom in first-occurrence order."""
    seen: dict[tuple[Term, Term], None] = {}
    for f in _walk(phi):
        if isinstance(f, Update):
            seen.setdefault((f.cell, f.term))
    return list(seen)


def signature_of(phi: Formula, base: Signature | None = None) -> Signature:
    """Infer the symbols of ``phi`` in first-occurrence order (extending ``base``)."""
    sig = base.copy() if base is not None else Signature()

    def visit(t: Term) -> None:
        match t.kind:
            case 0:
                sig.declare_cell(t.head)
            case 1:
                sig.declare_function(t.head, len(t.args))
            case 2:
                sig.declare_predicate(t.head, len(t.args))
        for a in t.args:
            visit(a)

    for f in _walk(phi):
        match f:
            case Pred(t):
                visit(t)
            case Update(c, t):
                visit(c)
                if t.kind != STAR:
                    visit(t)
    return sig


def in_reachability_fragment(phi: Formula) -> bool:
    """True when ``phi`` in negation normal form uses only next and eventually.

    Atoms and boolean connectives are free; an ``Until`` must have a ``true``
    left operand and occur under an even number of negations.
    """
    stack = [(phi, True)]
    while stack:
        f, positive = stack.pop()
        match f:
            case Not(a):
                stack.append((a, not positive))
            case Next(a):
                stack.append((a, positive))
            case And(a, b):
                stack += [(a, positive), (b, positive)]
            case Until(left, b):
                if not positive or left != TRUE:
                    return False
                stack.append((b, positive))
    return True


def is_single_cell(phi: Formula) -> bool:
    return len(signature_of(phi).cells) <= 1


def size(phi: Formula) -> int:
    return sum(1 for _ in _walk(phi))


def show(phi: Formula) -> str:
    """Render in the surface syntax.  Binary operators are fully parenthesized
    so that the output parses back to the identical tree."""
    match phi:
        case TTrue():
            return "true"
        case Pred(t):
            return str(t)
        case Update(c, t):
            return f"[{c} <- {t}]"
        case Not(TTrue()):
            return "false"
        case Not(Until(TTrue(), Not(a))):
            return f"G {show(a)}"
        case Not(Until(Not(a), Not(b))):
            return f"({show(a)} R {show(b)})"
        case Not(And(Not(a), Not(b))):
            return f"({show(a)} || {show(b)})"
        case Not(And(a, Not(b))):
            return f"({show(a)} -> {show(b)})"
        case Not(a):
            return f"!{show(a)}"
        case Next(a):
            return f"X {show(a)}"
        case Until(TTrue(), a):
            return f"F {show(a)}"
        case Until(a, b):
            return f"({show(a)} U {show(b)})"
        case And(a, b):
            return f"({show(a)} && {show(b)})"
    raise TypeError(f"not a formula: {phi!r}")

