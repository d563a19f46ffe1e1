"""LTL approximation of TSL formulas, the finitary reduction and lasso evaluation.

Predicate terms and update atoms become atomic propositions.  The
approximation additionally demands that every cell performs exactly one of
its admissible updates in every step.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Union

from . import formula as fm
from .terms import NEW_NAME, PICK_PREFIX, Signature, SignatureError, Term, app, cell, is_reserved, star

FRESH_CELL = "n"


@dataclass(frozen=True, slots=True)
class PredAP:
    term: Term

    def __str__(self) -> str:
        return str(self.term)


@dataclass(frozen=True, slots=True)
class UpdateAP:
    cell: Term
    term: Term

    @property
    def is_self(self) -> bool:
        return self.term is self.cell

    @property
    def is_star(self) -> bool:
        return self.term.is_star

    def __str__(self) -> str:
        return f"[{self.cell} <- {self.term}]"


AP = Union[PredAP, UpdateAP]


@dataclass(frozen=True, slots=True)
class LTrue:
    pass


@dataclass(frozen=True, slots=True)
class LAtom:
    ap: AP


@dataclass(frozen=True, slots=True)
class LNot:
    arg: LtlFormula


@dataclass(frozen=True, slots=True)
class LAnd:
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True, slots=True)
class LNext:
    arg: LtlFormula


@dataclass(frozen=True, slots=True)
class LUntil:
    left: LtlFormula
    right: LtlFormula


LtlFormula = Union[LTrue, LAtom, LNot, LAnd, LNext, LUntil]
L_TRUE = LTrue()


def l_or(a: LtlFormula, b: LtlFormula) -> LtlFormula:
    return LNot(LAnd(LNot(a), LNot(b)))


def l_globally(a: LtlFormula) -> LtlFormula:
    return LNot(LUntil(L_TRUE, LNot(a)))


def l_conj(parts: Iterable[LtlFormula]) -> LtlFormula:
    out: LtlFormula | None = None
    for p in parts:
        out = p if out is None else LAnd(out, p)
    return L_TRUE if out is None else out


def l_disj(parts: Iterable[LtlFormula]) -> LtlFormula:
    out: LtlFormula | None = None
    for p in parts:
        out = p if out is None else l_or(out, p)
    return LNot(L_TRUE) if out is None else out


def show_ltl(phi: LtlFormula) -> str:
    match phi:
        case LTrue():
            return "true"
        case LAtom(ap):
            return f'"{ap}"'
        case LNot(a):
            return f"!{show_ltl(a)}"
        case LAnd(a, b):
            return f"({show_ltl(a)} && {show_ltl(b)})"
        case LNext(a):
            return f"X {show_ltl(a)}"
        case LUntil(a, b):
            return f"({show_ltl(a)} U {show_ltl(b)})"
    raise TypeError(f"not an LTL formula: {phi!r}")


def atoms_of(phi: LtlFormula) -> set[AP]:
    out: set[AP] = set()
    stack = [phi]
    while stack:
        match stack.pop():
            case LAtom(ap):
                out.add(ap)
            case LNot(a) | LNext(a):
                stack.append(a)
            case LAnd(a, b) | LUntil(a, b):
                stack += [a, b]
    return out


def to_ltl(phi: fm.Formula) -> LtlFormula:
    """Structural translation replacing predicate and update atoms by propositions."""
    match phi:
        case fm.TTrue():
            return L_TRUE
        case fm.Pred(t):
            return LAtom(PredAP(t))
        case fm.Update(c, t):
            return LAtom(UpdateAP(c, t))
        case fm.Not(a):
            return LNot(to_ltl(a))
        case fm.And(a, b):
            return LAnd(to_ltl(a), to_ltl(b))
        case fm.Next(a):
            return LNext(to_ltl(a))
        case fm.Until(a, b):
            return LUntil(to_ltl(a), to_ltl(b))
    raise TypeError(f"not a formula: {phi!r}")


FINITARY = "finitary"
GENERAL = "general"


@dataclass(frozen=True)
class Approximation:
    """The LTL approximation ``core && least && most`` with its proposition universe.

    ``updates_by_cell`` lists, per cell in signature order, the update
    propositions a letter may choose from.
    """

    formula: LtlFormula
    core: LtlFormula
    least: LtlFormula
    most: LtlFormula
    predicates: tuple[PredAP, ...]
    updates_by_cell: tuple[tuple[Term, tuple[UpdateAP, ...]], ...]
    mode: str = FINITARY
    aps: tuple[AP, ...] = field(init=False)

    def __post_init__(self):
        ups = tuple(u for _, us in self.updates_by_cell for u in us)
        object.__setattr__(self, "aps", self.predicates + ups)

    @property
    def cells(self) -> tuple[Term, ...]:
        return tuple(c for c, _ in self.updates_by_cell)


def approximate(phi: fm.Formula, signature: Signature, mode: str = FINITARY) -> Approximation:
    if mode not in (FINITARY, GENERAL):
        raise ValueError(f"unknown mode {mode!r}")
    preds = tuple(PredAP(t) for t in fm.predicates(phi))
    occurring = fm.updates(phi)
    by_cell: list[tuple[Term, tuple[UpdateAP, ...]]] = []
    for name in signature.cells:
        c = cell(name)
        ups = [UpdateAP(c, t) for (d, t) in occurring if d is c]
        extra = UpdateAP(c, c) if mode == FINITARY else UpdateAP(c, star())
        if extra not in ups:
            ups.append(extra)
        by_cell.append((c, tuple(ups)))
    for d, _ in occurring:
        if d.head not in signature.cells:
            raise SignatureError(f"cell '{d.head}' is not in the signature")

    core = to_ltl(phi)
    least = l_globally(l_conj(l_disj(LAtom(u) for u in ups) for _, ups in by_cell)) if by_cell else L_TRUE
    pairs = [
        LNot(LAnd(LAtom(a), LAtom(b)))
        for _, ups in by_cell
        for a, b in combinations(ups, 2)
    ]
    most = l_globally(l_conj(pairs)) if pairs else L_TRUE
    return Approximation(
        formula=LAnd(LAnd(core, least), most),
        core=core,
        least=least,
        most=most,
        predicates=preds,
        updates_by_cell=tuple(by_cell),
        mode=mode,
    )


def finitarize(phi: fm.Formula, signature: Signature) -> tuple[fm.Formula, Signature]:
    """Conjoin the finitary-reduction constraint.

    A fresh cell ``n`` is advanced by ``new`` forever, and every cell either
    performs one of its updates from ``phi`` or loads ``pick_<cell>(n)``.
    """
    clashes = signature.reserved_names()
    if FRESH_CELL in signature.cells or FRESH_CELL in signature.functions or FRESH_CELL in signature.predicates:
        clashes.append(FRESH_CELL)
    if clashes:
        raise SignatureError(f"reserved symbols already present: {', '.join(sorted(clashes))}")
    sig = signature.copy()
    sig.declare_cell(FRESH_CELL)
    sig.declare_function(NEW_NAME, 1)
    n = cell(FRESH_CELL)
    occurring = fm.updates(phi)
    per_cell = []
    for name in signature.cells:
        sig.declare_function(PICK_PREFIX + name, 1)
        c = cell(name)
        options = [fm.Update(c, t) for d, t in occurring if d is c]
        options.append(fm.Update(c, app(PICK_PREFIX + name, n)))
        per_cell.append(fm.disj(options))
    phi_fin = fm.Globally(fm.Update(n, app(NEW_NAME, n)))
    if per_cell:
        phi_fin = fm.And(phi_fin, fm.Globally(fm.conj(per_cell)))
    return fm.And(phi, phi_fin), sig


def strip_finitary(phi: fm.Formula) -> fm.Formula:
    """Inverse of :func:`finitarize` on its output."""
    if not isinstance(phi, fm.And):
        raise ValueError("not a finitarized formula")
    return phi.left


Letter = Mapping[AP, bool]


def all_letters(aps: Sequence[AP]) -> list[dict[AP, bool]]:
    return [dict(zip(aps, bits)) for bits in product((False, True), repeat=len(aps))]


def legal_letters(approx: Approximation) -> list[dict[AP, bool]]:
    """Letters with exactly one update per cell, predicates in every combination."""
    out = []
    for ups in product(*(us for _, us in approx.updates_by_cell)):
        chosen = set(ups)
        for bits in product((False, True), repeat=len(approx.predicates)):
            letter: dict[AP, bool] = dict(zip(approx.predicates, bits))
            for _, us in approx.updates_by_cell:
                for u in us:
                    letter[u] = u in chosen
            out.append(letter)
    return out


def subformulas(phi: LtlFormula) -> list[LtlFormula]:
    """Distinct subformulas, children before parents."""
    order: list[LtlFormula] = []
    seen: set[LtlFormula] = set()
    stack: list[tuple[LtlFormula, bool]] = [(phi, False)]
    while stack:
        f, done = stack.pop()
        if done:
            if f not in seen:
                seen.add(f)
                order.append(f)
            continue
        if f in seen:
            continue
        stack.append((f, True))
        match f:
            case LNot(a) | LNext(a):
                stack.append((a, False))
            case LAnd(a, b) | LUntil(a, b):
                stack.append((b, False))
                stack.append((a, False))
    return order


def ltl_lasso_check(stem: Sequence[Letter], loop: Sequence[Letter], phi: LtlFormula) -> bool:
    """Does the ultimately periodic word ``stem . loop^omega`` satisfy ``phi``?

    Each subformula gets a truth vector over the ``len(stem) + len(loop)``
    distinct positions; the successor of the last position is the loop start.
    Until is a least fixpoint, stabilised by two backward sweeps of the loop.
    """
    if not loop:
        raise ValueError("loop must be nonempty")
    word = list(stem) + list(loop)
    needed = atoms_of(phi)
    for i, letter in enumerate(word):
        missing = [ap for ap in needed if ap not in letter]
        if missing:
            raise ValueError(f"letter {i} does not assign {', '.join(sorted(map(str, missing)))}")
    s, total = len(stem), len(word)
    succ = list(range(1, total)) + [s]
    val: dict[LtlFormula, list[bool]] = {}
    for f in subformulas(phi):
        match f:
            case LTrue():
                v = [True] * total
            case LAtom(ap):
                v = [bool(w[ap]) for w in word]
            case LNot(a):
                v = [not x for x in val[a]]
            case LAnd(a, b):
                v = [x and y for x, y in zip(val[a], val[b])]
            case LNext(a):
                va = val[a]
                v = [va[succ[i]] for i in range(total)]
            case LUntil(a, b):
                va, vb = val[a], val[b]
                v = [False] * total
                for _ in range(2):
                    for i in range(total - 1, s - 1, -1):
                        v[i] = vb[i] or (va[i] and v[succ[i]])
                for i in range(s - 1, -1, -1):
                    v[i] = vb[i] or (va[i] and v[succ[i]])
            case _:
                raise TypeError(f"not an LTL formula: {f!r}")
        val[f] = v
    return val[phi][0]
