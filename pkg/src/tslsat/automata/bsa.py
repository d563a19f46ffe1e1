"""Büchi stream automata, execution effects and emptiness checks."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import product

from ..ltl import Approximation, PredAP, UpdateAP
from ..terms import Term, cell, substitute
from .tableau import NBA, Edge

TOTAL = "total"
PARTIAL = "partial"
DEFAULT_LETTER_CAP = 4096


class LetterCapExceeded(RuntimeError):
    def __init__(self, edge: Edge, count: int, cap: int, label: str = ""):
        super().__init__(
            f"edge {edge.src} -> {edge.dst} [{label}] expands to {count} letters (cap {cap})"
        )
        self.edge = edge
        self.count = count
        self.cap = cap


@dataclass(frozen=True, slots=True)
class Transition:
    """One BSA transition.

    ``guard`` holds (predicate term, value) pairs; ``updates`` holds one
    (cell, term) pair per cell, in the automaton's cell order.
    """

    id: int
    src: int
    guard: tuple[tuple[Term, bool], ...]
    updates: tuple[tuple[Term, Term], ...]
    dst: int

    def label(self) -> str:
        bits = "".join("1" if v else "0" for _, v in self.guard)
        ups = ", ".join(f"{c} <- {t}" for c, t in self.updates)
        return f"{bits}|{ups}"

    def __str__(self) -> str:
        return f"{self.src} --[{self.label()}]--> {self.dst}"


@dataclass(frozen=True)
class BSA:
    num_states: int
    initial: tuple[int, ...]
    accepting: frozenset[int]
    guards: tuple[Term, ...]
    cells: tuple[Term, ...]
    update_terms: tuple[tuple[Term, tuple[Term, ...]], ...]
    transitions: tuple[Transition, ...]
    out: tuple[tuple[Transition, ...], ...] = field(init=False, repr=False)
    # transitions with equal guard and updates share a label; a label is
    # represented by a state-free Transition whose id is the label id
    labels: tuple[Transition, ...] = field(init=False, repr=False)
    label_of: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        out: list[list[Transition]] = [[] for _ in range(self.num_states)]
        index: dict[tuple, int] = {}
        labels: list[Transition] = []
        label_of = [0] * len(self.transitions)
        for t in self.transitions:
            out[t.src].append(t)
            key = (t.guard, t.updates)
            lid = index.get(key)
            if lid is None:
                lid = index[key] = len(labels)
                labels.append(Transition(lid, -1, t.guard, t.updates, -1))
            label_of[t.id] = lid
        object.__setattr__(self, "out", tuple(tuple(ts) for ts in out))
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "label_of", tuple(label_of))

    @property
    def finitary(self) -> bool:
        return not any(t.is_star for _, ts in self.update_terms for t in ts)

    def successors(self, q: int) -> list[int]:
        return [t.dst for t in self.out[q]]

    def is_empty(self) -> bool:
        return not any(buchi_nonempty_from(self, q) for q in self.initial)

    def live_states(self) -> set[int]:
        """States from which an accepting lasso is reachable."""
        sccs = _sccs(self.num_states, self.successors)
        good: set[int] = set()
        for comp in sccs:
            nontrivial = len(comp) > 1 or comp[0] in self.successors(comp[0])
            if nontrivial and any(q in self.accepting for q in comp):
                good.update(comp)
        preds: list[list[int]] = [[] for _ in range(self.num_states)]
        for t in self.transitions:
            preds[t.dst].append(t.src)
        frontier = list(good)
        while frontier:
            q = frontier.pop()
            for p in preds[q]:
                if p not in good:
                    good.add(p)
                    frontier.append(p)
        return good

    def trim(self) -> BSA:
        """Restrict to states reachable from an initial state that can still accept."""
        live = self.live_states()
        reach: set[int] = set()
        frontier = [q for q in self.initial if q in live]
        while frontier:
            q = frontier.pop()
            if q in reach:
                continue
            reach.add(q)
            frontier.extend(d for d in self.successors(q) if d in live)
        keep = sorted(reach)
        ren = {q: i for i, q in enumerate(keep)}
        trans = []
        for t in self.transitions:
            if t.src in ren and t.dst in ren:
                trans.append(Transition(len(trans), ren[t.src], t.guard, t.updates, ren[t.dst]))
        return BSA(
            num_states=len(keep),
            initial=tuple(ren[q] for q in self.initial if q in ren),
            accepting=frozenset(ren[q] for q in self.accepting if q in ren),
            guards=self.guards,
            cells=self.cells,
            update_terms=self.update_terms,
            transitions=tuple(trans),
        )


def nba_to_bsa(
    nba: NBA,
    approx: Approximation,
    letter_cap: int = DEFAULT_LETTER_CAP,
    guard_mode: str = TOTAL,
    max_transitions: int | None = None,
) -> BSA:
    """Expand every NBA edge into the legal letters it admits.

    A legal letter chooses exactly one admissible update per cell.  With
    ``guard_mode="total"`` every guard predicate receives a value; with
    ``"partial"`` predicates the edge does not mention stay unconstrained and
    guards subsumed by a weaker guard with the same endpoints and updates are
    dropped.
    """
    if guard_mode not in (TOTAL, PARTIAL):
        raise ValueError(f"unknown guard mode {guard_mode!r}")
    ap_bit = {ap: 1 << i for i, ap in enumerate(nba.aps)}
    for ap in nba.aps:
        if ap not in approx.aps:
            raise ValueError(f"automaton proposition {ap} is outside the approximation universe")
    preds = approx.predicates
    pred_bits = [(p, ap_bit.get(p, 0)) for p in preds]
    cell_opts = [(c, [(u, ap_bit.get(u, 0)) for u in ups]) for c, ups in approx.updates_by_cell]

    keyed: dict[tuple, tuple] = {}
    for e in nba.edges:
        options_per_cell = []
        for _c, ups in cell_opts:
            forced = [u for u, b in ups if b and e.pos & b]
            if len(forced) > 1:
                options_per_cell = None
                break
            if forced:
                opts = forced
            else:
                opts = [u for u, b in ups if not (b and e.neg & b)]
            opts = [u for u in opts if not (ap_bit.get(u, 0) & e.neg)]
            if not opts:
                options_per_cell = None
                break
            options_per_cell.append(opts)
        if options_per_cell is None:
            continue
        fixed = []
        free = []
        for i, (p, b) in enumerate(pred_bits):
            if b and e.pos & b:
                fixed.append((i, True))
            elif b and e.neg & b:
                fixed.append((i, False))
            else:
                free.append(i)
        count = 1
        for opts in options_per_cell:
            count *= len(opts)
        if guard_mode == TOTAL:
            count <<= len(free)
        if count > letter_cap:
            raise LetterCapExceeded(e, count, letter_cap, nba.label_str(e))
        guard_choices = (
            [tuple(sorted(fixed + list(zip(free, bits)))) for bits in product((False, True), repeat=len(free))]
            if guard_mode == TOTAL
            else [tuple(fixed)]
        )
        for ups in product(*options_per_cell):
            up_idx = tuple(
                next(i for i, (u2, _) in enumerate(cell_opts[k][1]) if u2 == u) for k, u in enumerate(ups)
            )
            for g in guard_choices:
                key = (e.src, g, up_idx, e.dst)
                keyed[key] = (g, ups)
        if max_transitions is not None and len(keyed) > max_transitions:
            raise LetterCapExceeded(e, len(keyed), max_transitions, "total transition count")

    if guard_mode == PARTIAL:
        keyed = _drop_subsumed(keyed)

    transitions = []
    for key in sorted(keyed, key=lambda k: (k[0], _guard_bits(k[1]), k[2], k[3])):
        g, ups = keyed[key]
        transitions.append(
            Transition(
                id=len(transitions),
                src=key[0],
                guard=tuple((preds[i].term, v) for i, v in g),
                updates=tuple((u.cell, u.term) for u in ups),
                dst=key[3],
            )
        )
    return BSA(
        num_states=nba.num_states,
        initial=nba.initial,
        accepting=nba.accepting,
        guards=tuple(p.term for p in preds),
        cells=approx.cells,
        update_terms=tuple((c, tuple(u.term for u in ups)) for c, ups in approx.updates_by_cell),
        transitions=tuple(transitions),
    )


def _guard_bits(g) -> tuple:
    return tuple((i, int(v)) for i, v in g)


def _drop_subsumed(keyed: dict) -> dict:
    groups: dict[tuple, list] = {}
    for key in keyed:
        groups.setdefault((key[0], key[2], key[3]), []).append(key)
    out = {}
    for members in groups.values():
        members.sort(key=lambda k: (len(k[1]), k[1]))
        kept: list[tuple] = []
        for k in members:
            gset = set(k[1])
            if any(set(o[1]) <= gset for o in kept):
                continue
            kept.append(k)
        for k in kept:
            out[k] = keyed[k]
    return out


@dataclass(frozen=True)
class ExecutionEffect:
    """Current term of every cell plus the signed predicate terms seen so far."""

    cells: tuple[Term, ...]
    terms: tuple[Term, ...]
    constraints: frozenset[tuple[Term, bool]]

    @property
    def term_map(self) -> dict[Term, Term]:
        return dict(zip(self.cells, self.terms))


def effect_empty(cells: Iterable[Term | str]) -> ExecutionEffect:
    cs = tuple(cell(c) if isinstance(c, str) else c for c in cells)
    return ExecutionEffect(cs, cs, frozenset())


def effect_extend(e: ExecutionEffect, t: Transition) -> ExecutionEffect:
    mapping = dict(zip(e.cells, e.terms))
    memo: dict[int, Term] = {}
    new_lits = [(substitute(p, mapping, memo), v) for p, v in t.guard]
    upd = dict(t.updates)
    terms = []
    for c in e.cells:
        u = upd.get(c, c)
        if u.is_star:
            raise ValueError(f"cell {c} receives STAR; effects need a finitary automaton")
        terms.append(substitute(u, mapping, memo))
    constraints = e.constraints.union(new_lits) if new_lits else e.constraints
    return ExecutionEffect(e.cells, tuple(terms), constraints)


def effect_of_run(cells: Sequence[Term], run: Iterable[Transition]) -> ExecutionEffect:
    e = effect_empty(cells)
    for t in run:
        e = effect_extend(e, t)
    return e


def find_syntactic_conflict(constraints: Iterable[tuple[Term, bool]]) -> Term | None:
    """A predicate term occurring with both polarities (smallest id first), if any."""
    pol: dict[Term, set[bool]] = {}
    for t, v in constraints:
        pol.setdefault(t, set()).add(bool(v))
    clashing = [t for t, vs in pol.items() if len(vs) == 2]
    return min(clashing, key=lambda t: t.id) if clashing else None


def buchi_nonempty_from(automaton, start: int) -> bool:
    """Nested depth-first search for an accepting lasso reachable from ``start``.

    ``automaton`` needs ``successors(q)`` and ``accepting``.
    """
    succ = automaton.successors
    accepting = automaton.accepting
    blue: set[int] = set()
    red: set[int] = set()
    # iterative blue DFS with postorder red searches
    stack = [(start, iter(succ(start)))]
    blue.add(start)
    while stack:
        q, it = stack[-1]
        advanced = False
        for d in it:
            if d not in blue:
                blue.add(d)
                stack.append((d, iter(succ(d))))
                advanced = True
                break
        if advanced:
            continue
        stack.pop()
        if q in accepting and _red_search(q, succ, red):
            return True
    return False


def _red_search(seed: int, succ, red: set[int]) -> bool:
    frontier = [seed]
    while frontier:
        q = frontier.pop()
        for d in succ(q):
            if d == seed:
                return True
            if d not in red:
                red.add(d)
                frontier.append(d)
    return False


def _sccs(n: int, succ) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, iter(succ(w))))
                    pushed = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


def letter_word(run: Sequence[Transition], approx: Approximation) -> list[dict]:
    """The AP letters a run reads; predicates the guard leaves open default to false."""
    word = []
    for t in run:
        g = dict(t.guard)
        chosen = set(t.updates)
        letter: dict = {}
        for p in approx.predicates:
            letter[p] = g.get(p.term, False)
        for c, ups in approx.updates_by_cell:
            for u in ups:
                letter[u] = (u.cell, u.term) in chosen
        word.append(letter)
    return word
