"""Benchmark formula generators.

Scalable families, a seeded random generator, the shipped application
corpus, and the encoding of GOTO programs as TSL formulas.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

from . import formula as fm
from .formula import (
    And,
    Eventually,
    Globally,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Pred,
    Until,
    Update,
    conj,
    next_n,
)
from .parser import parse_formula
from .terms import Signature, Term, app, cell, pred

# ---------------------------------------------------------------- scalable families


def _iter_f(t: Term, n: int) -> Term:
    for _ in range(n):
        t = app("f", t)
    return t


def gen_scal_sat(n: int) -> fm.Formula:
    """G [x <- f(x)] && F !p(x) && p(x) && p(f(x)) && ... && p(f^n(x))."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = cell("x")
    parts = [Globally(Update(x, app("f", x))), Eventually(Not(Pred(pred("p", x))))]
    parts += [Pred(pred("p", _iter_f(x, i))) for i in range(n + 1)]
    return conj(parts)


def gen_scal_unsat(n: int) -> fm.Formula:
    """G (q(x) <-> !q(f^n(x))) && G [x <- f(x)] && F (q(x) && X^n q(x))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x = cell("x")
    q = Pred(pred("q", x))
    return conj(
        [
            Globally(Iff(q, Not(Pred(pred("q", _iter_f(x, n)))))),
            Globally(Update(x, app("f", x))),
            Eventually(And(q, next_n(q, n))),
        ]
    )


# ---------------------------------------------------------------- random formulas

# operator weights of the LTL skeleton
WEIGHTS = {"!": 1, "&&": 2, "||": 2, "X": 1, "U": 1, "F": 1, "G": 1}
_UNARY = ("!", "X", "F", "G")
_BINARY = ("&&", "||", "U")
BATCH_SIZES = tuple(range(5, 100, 5))
BATCH_PER_SIZE = 30


@dataclass(frozen=True)
class RandomSpec:
    seed: int
    tree_size: int
    cell_count: int = 1
    update_count: int = 1
    predicate_count: int = 1

    def __post_init__(self):
        if self.tree_size < 1:
            raise ValueError("tree_size must be positive")
        for name in ("cell_count", "update_count", "predicate_count"):
            if not 1 <= getattr(self, name) <= 3:
                raise ValueError(f"{name} must be between 1 and 3")


def _skeleton(rng: random.Random, size: int, k: int):
    """Random LTL tree with exactly ``size`` nodes over placeholders 0..k-1."""
    if size == 1:
        return ("ap", rng.randrange(k))
    ops = [op for op in WEIGHTS if op in _UNARY or size >= 3]
    op = rng.choices(ops, weights=[WEIGHTS[o] for o in ops])[0]
    if op in _UNARY:
        return (op, _skeleton(rng, size - 1, k))
    left = rng.randint(1, size - 2)
    return (op, _skeleton(rng, left, k), _skeleton(rng, size - 1 - left, k))


def _atom_pool(rng: random.Random, spec: RandomSpec) -> list[fm.Formula]:
    cells = [cell(f"c{i}") for i in range(spec.cell_count)]
    preds: list[fm.Formula] = []
    seen_p: set[Term] = set()
    while len(preds) < spec.predicate_count:
        t = pred(f"p{rng.randrange(spec.predicate_count)}", rng.choice(cells))
        if t not in seen_p:
            seen_p.add(t)
            preds.append(Pred(t))
        elif len(seen_p) >= spec.predicate_count * len(cells):
            break
    ups: list[fm.Formula] = []
    seen_u: set[tuple[Term, Term]] = set()
    while len(ups) < spec.update_count:
        target = rng.choice(cells)
        source = rng.choice(cells)
        term = source if rng.random() < 0.5 else app(rng.choice("fg"), source)
        if (target, term) not in seen_u:
            seen_u.add((target, term))
            ups.append(Update(target, term))
    atoms = preds + ups
    rng.shuffle(atoms)
    return atoms


def _realize(node, atoms: list[fm.Formula]) -> fm.Formula:
    match node:
        case ("ap", i):
            return atoms[i]
        case ("!", a):
            return Not(_realize(a, atoms))
        case ("X", a):
            return Next(_realize(a, atoms))
        case ("F", a):
            return Eventually(_realize(a, atoms))
        case ("G", a):
            return Globally(_realize(a, atoms))
        case ("&&", a, b):
            return And(_realize(a, atoms), _realize(b, atoms))
        case ("||", a, b):
            return Or(_realize(a, atoms), _realize(b, atoms))
        case ("U", a, b):
            return Until(_realize(a, atoms), _realize(b, atoms))
    raise ValueError(f"bad skeleton node {node!r}")


def gen_random(spec: RandomSpec) -> fm.Formula:
    rng = random.Random(spec.seed)
    atoms = _atom_pool(rng, spec)
    return _realize(_skeleton(rng, spec.tree_size, len(atoms)), atoms)


def random_specs(seed: int, sizes=BATCH_SIZES, per_size: int = BATCH_PER_SIZE) -> list[RandomSpec]:
    """Specs of a benchmark batch: ``per_size`` formulas for every tree size."""
    rng = random.Random(seed)
    out = []
    for s in sizes:
        for _ in range(per_size):
            out.append(
                RandomSpec(
                    seed=rng.getrandbits(32),
                    tree_size=s,
                    cell_count=rng.randint(1, 3),
                    update_count=rng.randint(1, 3),
                    predicate_count=rng.randint(1, 3),
                )
            )
    return out


def random_batch(seed: int, sizes=BATCH_SIZES, per_size: int = BATCH_PER_SIZE) -> list[fm.Formula]:
    return [gen_random(s) for s in random_specs(seed, sizes, per_size)]


# ---------------------------------------------------------------- corpus

CORPUS_PACKAGE = "tslsat.corpus"
_HEADER = re.compile(r"^#!\s*(\w+)\s*:\s*(.*?)\s*$")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    formula: fm.Formula
    signature: Signature
    expected: str
    tags: tuple[str, ...] = ()
    path: str = ""


def read_corpus_text(text: str, path: str = "<corpus>") -> CorpusEntry:
    headers: dict[str, str] = {}
    for line in text.splitlines():
        m = _HEADER.match(line)
        if m:
            headers[m.group(1).lower()] = m.group(2)
    expected = headers.get("expect", "").upper()
    if expected not in ("SAT", "UNSAT"):
        raise CorpusError(f"{path}: missing or invalid '#!expect:' header")
    try:
        phi, sig = parse_formula(text)
    except ValueError as e:
        raise CorpusError(f"{path}: {e}") from None
    name = headers.get("name") or Path(path).stem
    tags = tuple(t for t in headers.get("tags", "").replace(",", " ").split() if t)
    return CorpusEntry(name, phi, sig, expected, tags, path)


def load_corpus_dir(directory: str | Path) -> list[CorpusEntry]:
    paths = sorted(Path(directory).glob("*.tsl"))
    return [read_corpus_text(p.read_text(encoding="utf-8"), str(p)) for p in paths]


def load_corpus() -> list[CorpusEntry]:
    """The shipped application benchmarks, in file-name order."""
    root = resources.files(CORPUS_PACKAGE)
    files = sorted((f for f in root.iterdir() if f.name.endswith(".tsl")), key=lambda f: f.name)
    if not files:
        raise CorpusError("no corpus files found")
    return [read_corpus_text(f.read_text(encoding="utf-8"), f.name) for f in files]


# ---------------------------------------------------------------- GOTO programs


@dataclass(frozen=True)
class Inc:
    var: int


@dataclass(frozen=True)
class Reset:
    var: int


@dataclass(frozen=True)
class GotoIfEq:
    left: int
    right: int
    target: int


Action = Union[Inc, Reset, GotoIfEq]


@dataclass(frozen=True)
class GotoProgram:
    """Locations 0..m where ``actions[k]`` belongs to location k and m is terminating."""

    num_vars: int
    actions: tuple[Action, ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("a program needs the input variable v0")
        m = len(self.actions)
        for k, a in enumerate(self.actions):
            match a:
                case Inc(v) | Reset(v):
                    used = [v]
                case GotoIfEq(x, y, t):
                    used = [x, y]
                    if not 0 <= t <= m:
                        raise ValueError(f"location l{k} jumps to undeclared location l{t}")
                case _:
                    raise TypeError(f"not an action: {a!r}")
            for v in used:
                if not 0 <= v < self.num_vars:
                    raise ValueError(f"location l{k} uses undeclared variable v{v}")

    @property
    def terminal(self) -> int:
        return len(self.actions)


def run_goto(g: GotoProgram, inp: int, fuel: int = 100_000) -> tuple[int, ...] | None:
    """Final variable values, or None if ``fuel`` steps do not suffice."""
    vals = [0] * g.num_vars
    vals[0] = inp
    loc = 0
    for _ in range(fuel):
        if loc == g.terminal:
            return tuple(vals)
        match g.actions[loc]:
            case Inc(v):
                vals[v] += 1
                loc += 1
            case Reset(v):
                vals[v] = 0
                loc += 1
            case GotoIfEq(x, y, t):
                loc = t if vals[x] == vals[y] else loc + 1
    return tuple(vals) if loc == g.terminal else None


# classic statements; labels are names attached with Label


@dataclass(frozen=True)
class Label:
    name: str


@dataclass(frozen=True)
class Goto:
    label: str


@dataclass(frozen=True)
class Assign:
    target: int
    source: int
    offset: int = 0


@dataclass(frozen=True)
class Dec:
    var: int


@dataclass(frozen=True)
class IfEqConst:
    var: int
    const: int
    label: str


@dataclass(frozen=True)
class JumpIfEq:
    left: int
    right: int
    label: str


Statement = Union[Label, Goto, Assign, Dec, IfEqConst, JumpIfEq, Inc, Reset]


@dataclass
class _Emitter:
    next_var: int
    code: list = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)
    fresh_labels: int = 0

    def var(self) -> int:
        self.next_var += 1
        return self.next_var - 1

    def label(self) -> str:
        self.fresh_labels += 1
        return f" gadget{self.fresh_labels}"

    def mark(self, name: str) -> None:
        if name in self.labels:
            raise ValueError(f"label {name!r} defined twice")
        self.labels[name] = len(self.code)

    def goto(self, name: str) -> None:
        vf = self.var()
        self.code.append(Reset(vf))
        self.code.append(("jump", vf, vf, name))

    def copy(self, i: int, j: int) -> None:
        if i == j:
            return
        start, done = self.label(), self.label()
        self.code.append(Reset(i))
        self.mark(start)
        self.code.append(("jump", i, j, done))
        self.code.append(Inc(i))
        self.goto(start)
        self.mark(done)

    def dec(self, i: int) -> None:
        vf, vg = self.var(), self.var()
        start, done = self.label(), self.label()
        self.copy(vf, i)
        self.code.append(Reset(i))
        self.code.append(("jump", i, vf, done))
        self.mark(start)
        self.copy(vg, i)
        self.code.append(Inc(vg))
        self.code.append(("jump", vf, vg, done))
        self.code.append(Inc(i))
        self.goto(start)
        self.mark(done)


def _max_var(stmts) -> int:
    top = 0
    for s in stmts:
        match s:
            case Inc(v) | Reset(v) | Dec(v) | IfEqConst(v, _, _):
                top = max(top, v)
            case Assign(a, b, _) | JumpIfEq(a, b, _) | GotoIfEq(a, b, _):
                top = max(top, a, b)
    return top


def desugar_goto(stmts: list[Statement], num_vars: int | None = None) -> GotoProgram:
    """Expand classic statements into Inc/Reset/GotoIfEq with fresh helper variables.

    Control falls off the end of the list into the terminating location.
    """
    declared = max(num_vars or 0, _max_var(stmts) + 1)
    em = _Emitter(next_var=declared)
    for s in stmts:
        match s:
            case Label(name):
                em.mark(name)
            case Inc() | Reset():
                em.code.append(s)
            case JumpIfEq(a, b, name):
                em.code.append(("jump", a, b, name))
            case Goto(name):
                em.goto(name)
            case Assign(i, j, c):
                em.copy(i, j)
                for _ in range(abs(c)):
                    if c > 0:
                        em.code.append(Inc(i))
                    else:
                        em.dec(i)
            case Dec(v):
                em.dec(v)
            case IfEqConst(v, c, name):
                vc = em.var()
                em.code.append(Reset(vc))
                em.code += [Inc(vc)] * c
                em.code.append(("jump", v, vc, name))
            case _:
                raise TypeError(f"not a statement: {s!r}")
    actions: list[Action] = []
    for a in em.code:
        if isinstance(a, tuple):
            _, x, y, name = a
            if name not in em.labels:
                raise ValueError(f"jump to undefined label {name!r}")
            actions.append(GotoIfEq(x, y, em.labels[name]))
        else:
            actions.append(a)
    return GotoProgram(em.next_var, tuple(actions))


def run_classic(stmts: list[Statement], inp: int, fuel: int = 100_000) -> tuple[int, ...] | None:
    """Reference interpreter for classic statements (decrement saturates at zero)."""
    labels = {s.name: k for k, s in enumerate(stmts) if isinstance(s, Label)}
    vals = [0] * (_max_var(stmts) + 1)
    vals[0] = inp
    pc = 0
    for _ in range(fuel):
        if pc >= len(stmts):
            return tuple(vals)
        s = stmts[pc]
        pc += 1
        match s:
            case Inc(v):
                vals[v] += 1
            case Reset(v):
                vals[v] = 0
            case Dec(v):
                vals[v] = max(0, vals[v] - 1)
            case Assign(i, j, c):
                vals[i] = max(0, vals[j] + c)
            case Goto(name):
                pc = labels[name]
            case JumpIfEq(a, b, name):
                if vals[a] == vals[b]:
                    pc = labels[name]
            case IfEqConst(v, c, name):
                if vals[v] == c:
                    pc = labels[name]
    return None


_LINE = re.compile(r"^\s*(?:([A-Za-z_]\w*)\s*:)?\s*(.*?)\s*$")
_VAR = re.compile(r"^v(\d+)$")


class GotoSyntaxError(ValueError):
    pass


def _v(tok: str, lineno: int) -> int:
    m = _VAR.match(tok)
    if not m:
        raise GotoSyntaxError(f"line {lineno}: expected a variable like v0, got {tok!r}")
    return int(m.group(1))


def parse_goto(text: str) -> GotoProgram:
    """Read the line format ``l0: INC v1`` / ``RESET v1`` / ``GOTOEQ v1 v2 l0``.

    Classic statements ``GOTO l``, ``ASSIGN vi vj [c]``, ``DEC vi`` and
    ``IFEQ vi c l`` are accepted too and expanded; ``HALT`` ends the program.
    ``#`` starts a comment.
    """
    stmts: list[Statement] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        label, body = m.group(1), m.group(2)
        if label:
            stmts.append(Label(label))
        if not body:
            continue
        op, *args = body.split()
        want = {"INC": 1, "RESET": 1, "DEC": 1, "GOTO": 1, "GOTOEQ": 3, "IFEQ": 3, "HALT": 0}
        op = op.upper()
        if op == "ASSIGN":
            if len(args) not in (2, 3):
                raise GotoSyntaxError(f"line {lineno}: ASSIGN takes 2 or 3 arguments")
        elif op not in want:
            raise GotoSyntaxError(f"line {lineno}: unknown instruction {op!r}")
        elif len(args) != want[op]:
            raise GotoSyntaxError(f"line {lineno}: {op} takes {want[op]} arguments")
        match op:
            case "INC":
                stmts.append(Inc(_v(args[0], lineno)))
            case "RESET":
                stmts.append(Reset(_v(args[0], lineno)))
            case "DEC":
                stmts.append(Dec(_v(args[0], lineno)))
            case "GOTO":
                stmts.append(Goto(args[0]))
            case "GOTOEQ":
                stmts.append(JumpIfEq(_v(args[0], lineno), _v(args[1], lineno), args[2]))
            case "IFEQ":
                stmts.append(IfEqConst(_v(args[0], lineno), int(args[1]), args[2]))
            case "ASSIGN":
                off = int(args[2]) if len(args) == 3 else 0
                stmts.append(Assign(_v(args[0], lineno), _v(args[1], lineno), off))
            case "HALT":
                stmts.append(Goto(" halt"))
    stmts.append(Label(" halt"))
    try:
        return desugar_goto(stmts)
    except ValueError as e:
        raise GotoSyntaxError(str(e)) from None


# ---------------------------------------------------------------- encodings

TU = "tu"
TE = "te"


def _eq(a: Term, b: Term) -> fm.Formula:
    return Pred(pred("eq", a, b))


def encode_num_tu() -> fm.Formula:
    """Forces f^a(z) eq f^b(z) exactly when a = b, over cells e, x, b."""
    e, x, b = cell("e"), cell("x"), cell("b")
    z = app("z")
    fb = app("f", b)
    first = And(Update(e, z), Next(Globally(And(Update(e, app("f", e)), _eq(e, e)))))
    on_eq = Implies(
        _eq(x, b),
        conj([Update(x, z), Update(b, fb), Not(_eq(b, fb)), Not(_eq(fb, b))]),
    )
    on_neq = Implies(
        Not(_eq(x, b)),
        conj([Update(x, app("f", x)), Update(b, b), Not(_eq(x, fb)), Not(_eq(fb, x))]),
    )
    second = conj([Update(x, z), Update(b, z), Next(Globally(And(on_eq, on_neq)))])
    return And(first, second)


def encode_enc_te() -> fm.Formula:
    """Forces the iterates f^a(z) to be pairwise distinct under plain equality."""
    e = cell("e")
    z = app("z")
    fe = app("f", e)
    body = conj([Update(e, app("f", z)), _eq(e, app("g", fe)), Not(_eq(fe, z))])
    return And(Update(e, z), Next(Globally(body)))


def _loc(k: int) -> Term:
    return app(f"l{k}")


def encode_goto_parts(g: GotoProgram) -> list[fm.Formula]:
    """The five conjuncts simulating ``g`` on inputs 0, 1, 2, ... in turn."""
    m = g.terminal
    l, i = cell("l"), cell("i")
    vs = [cell(f"v{k}") for k in range(g.num_vars)]
    z = app("z")

    def p(a: int, t: Term) -> fm.Formula:
        return Pred(pred(f"p{a}", t))

    def keep(skip: int | None = None) -> list[fm.Formula]:
        return [Update(v, v) for k, v in enumerate(vs) if k != skip]

    distinct = conj(
        And(p(a, _loc(a)), conj(Not(p(a, _loc(b))) for b in range(m + 1) if b != a)) for a in range(m + 1)
    )

    cases = []
    for k, act in enumerate(g.actions):
        match act:
            case Inc(j):
                step = conj([Update(l, _loc(k + 1)), Update(vs[j], app("f", vs[j])), *keep(j)])
            case Reset(j):
                step = conj([Update(l, _loc(k + 1)), Update(vs[j], z), *keep(j)])
            case GotoIfEq(a, b, t):
                same = _eq(vs[a], vs[b])
                step = conj(
                    [Implies(Not(same), Update(l, _loc(k + 1))), Implies(same, Update(l, _loc(t))), *keep()]
                )
        cases.append(Implies(p(k, l), And(Update(i, i), step)))
    simulate = Next(Globally(conj(cases)))

    restart = Next(
        Globally(
            Implies(
                p(m, l),
                conj([Update(i, app("f", i)), Update(l, _loc(0)), Update(vs[0], i), *(Update(v, z) for v in vs[1:])]),
            )
        )
    )
    init = And(Update(i, z), Update(l, _loc(m)))
    halts = Globally(Eventually(p(m, l)))
    return [distinct, simulate, restart, init, halts]


def encode_goto(g: GotoProgram, theory: str = TU) -> fm.Formula:
    match theory:
        case "tu":
            numbers = encode_num_tu()
        case "te":
            numbers = encode_enc_te()
        case _:
            raise ValueError(f"unknown theory {theory!r} (expected 'tu' or 'te')")
    return And(numbers, conj(encode_goto_parts(g)))


__all__ = [
    "BATCH_PER_SIZE",
    "BATCH_SIZES",
    "TE",
    "TU",
    "WEIGHTS",
    "Assign",
    "CorpusEntry",
    "CorpusError",
    "Dec",
    "Goto",
    "GotoIfEq",
    "GotoProgram",
    "GotoSyntaxError",
    "IfEqConst",
    "Inc",
    "JumpIfEq",
    "Label",
    "RandomSpec",
    "Reset",
    "desugar_goto",
    "encode_enc_te",
    "encode_goto",
    "encode_goto_parts",
    "encode_num_tu",
    "gen_random",
    "gen_scal_sat",
    "gen_scal_unsat",
    "load_corpus",
    "load_corpus_dir",
    "parse_goto",
    "random_batch",
    "random_specs",
    "read_corpus_text",
    "run_classic",
    "run_goto",
]
