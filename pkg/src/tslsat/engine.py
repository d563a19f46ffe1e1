"""Dual search for TSL satisfiability modulo uninterpreted functions.

Two breadth-first searches share one exclusion set of label words (a label
is a transition's guard and updates, without its states):

* ``Exclude`` grows a tree of label words readable from some automaton state
  and records every word whose constraints clash syntactically.
* ``Search`` grows a block tree from the initial states, drops blocks whose
  trace can no longer be extended to an accepting run avoiding the excluded
  words, and checks every lasso ending at a block with a congruence query.
"""
from __future__ import annotations

import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from . import formula as fm
from .automata import (
    BSA,
    AutomatonTooLarge,
    DEFAULT_LETTER_CAP,
    NBA,
    PARTIAL,
    TOTAL,
    ExecutionEffect,
    LetterCapExceeded,
    Transition,
    effect_of_run,
    find_syntactic_conflict,
    letter_word,
    ltl_to_nba,
    nba_to_bsa,
)
from .euf import (
    CongruenceStore,
    EufQuery,
    EufResult,
    QueryBudgetExceeded,
    check_query,
    check_query_external,
    export_smtlib,
    load_query,
)
from .ltl import FINITARY, GENERAL, Approximation, approximate, finitarize, ltl_lasso_check
from .terms import Signature, Term, substitute

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

# guard expansion: run the partial- and total-guard automata side by side
BOTH = "both"

DEAD = -1
EMPTY = 0


# ---------------------------------------------------------------------------
# blocks


class Block:
    """Search-tree node: a state plus the transition that led here.

    The cell terms of the trace's execution effect are cached; the
    constraints are stored as the literals this step added, so the full set
    is the union along the parent chain.  Children are created bare and get
    their effect filled in by :class:`EffectFiller` when first needed.
    """

    __slots__ = ("state", "parent", "trans", "depth", "terms", "lits", "conflict", "res_gen", "res_id")

    def __init__(self, state: int, parent: Block | None, trans: Transition | None,
                 terms: tuple[Term, ...] | None = None, lits: tuple[tuple[Term, bool], ...] = (),
                 conflict: bool = False):
        self.state = state
        self.parent = parent
        self.trans = trans
        self.depth = 0 if parent is None else parent.depth + 1
        self.terms = terms
        self.lits = lits
        self.conflict = conflict
        self.res_gen = -1
        self.res_id = EMPTY

    def constraints(self) -> frozenset[tuple[Term, bool]]:
        out: set[tuple[Term, bool]] = set()
        b: Block | None = self
        while b is not None:
            out.update(b.lits)
            b = b.parent
        return frozenset(out)

    def effect(self, cells: tuple[Term, ...]) -> ExecutionEffect:
        return ExecutionEffect(cells, self.terms, self.constraints())

    def __repr__(self) -> str:
        return f"Block(state={self.state}, depth={self.depth})"


def root_block(state: int, cells: tuple[Term, ...]) -> Block:
    return Block(state, None, None, cells, (), False)


def trace(b: Block) -> list[Transition]:
    out = []
    while b.parent is not None:
        out.append(b.trans)
        b = b.parent
    out.reverse()
    return out


def children(b: Block, bsa: BSA) -> list[Block]:
    """Bare children, one per outgoing transition, in the automaton's transition order."""
    return [Block(t.dst, b, t) for t in bsa.out[b.state]]


class EffectFiller:
    """Computes a child's effect from its parent's.

    Siblings are usually filled one after another, so the substitution memo
    and the parent's constraint set are kept for the most recent parent.
    """

    def __init__(self, cells: tuple[Term, ...]):
        self.cells = cells
        self.parent: Block | None = None
        self.mapping: dict[Term, Term] = {}
        self.memo: dict[int, Term] = {}
        self.known: frozenset | None = None

    def fill(self, b: Block) -> Block:
        if b.terms is not None:
            return b
        p = b.parent
        if p is not self.parent:
            self.parent = p
            self.mapping = dict(zip(self.cells, p.terms))
            self.memo = {}
            self.known = None
        mapping, memo = self.mapping, self.memo
        t = b.trans
        lits = tuple((substitute(g, mapping, memo), v) for g, v in t.guard)
        if lits and self.known is None:
            self.known = p.constraints()
        b.lits = lits
        b.conflict = p.conflict or (bool(lits) and _clashes(lits, self.known))
        upd = dict(t.updates)
        b.terms = tuple(substitute(upd.get(c, c), mapping, memo) for c in self.cells)
        return b


def successors(b: Block, bsa: BSA) -> list[Block]:
    """Children of b with their effects computed."""
    filler = EffectFiller(bsa.cells)
    return [filler.fill(c) for c in children(b, bsa)]


def _clashes(lits, known) -> bool:
    seen = {}
    for p, v in lits:
        if (p, not v) in known or seen.get(p, v) != v:
            return True
        seen[p] = v
    return False


def find_accepting_loops(b: Block, accepting: frozenset[int]) -> list[Block]:
    """Ancestors in b's state with an accepting state visited on the way, nearest first.

    The accepting flag is raised before the state comparison, so an
    accepting loop start counts as visited.
    """
    found = []
    seen_accepting = False
    p = b.parent
    while p is not None:
        if p.state in accepting:
            seen_accepting = True
        if p.state == b.state and seen_accepting:
            found.append(p)
        p = p.parent
    return found


# ---------------------------------------------------------------------------
# exclusion set and the suffix-residual matcher


class ExclusionSet:
    """Monotone set of excluded words, stored as a trie over label ids."""

    def __init__(self) -> None:
        self.children: list[dict[int, int]] = [{}]
        self.terminal: list[bool] = [False]
        self.words: list[tuple[int, ...]] = []
        self.generation = 0
        self.lock = threading.Lock()

    def add(self, word: tuple[int, ...]) -> bool:
        with self.lock:
            node = 0
            for tid in word:
                if self.terminal[node]:
                    return False
                nxt = self.children[node].get(tid)
                if nxt is None:
                    nxt = len(self.children)
                    self.children.append({})
                    self.terminal.append(False)
                    self.children[node][tid] = nxt
                node = nxt
            if self.terminal[node]:
                return False
            self.terminal[node] = True
            self.words.append(tuple(word))
            self.generation += 1
            return True

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return tuple(word) in set(self.words)


class ExclusionMatcher:
    """Tracks, per position, the trie nodes of excluded words partially matched by a suffix.

    A residual is an interned frozenset of trie nodes (the root is implicit);
    stepping with a transition follows that transition from every node and
    from the root.  Reaching a terminal node means an excluded word ends here.
    """

    def __init__(self, excl: ExclusionSet, label_of: tuple[int, ...] | None = None):
        self.excl = excl
        self.label_of = label_of
        self.sets: list[frozenset[int]] = [frozenset()]
        self.ids: dict[frozenset[int], int] = {frozenset(): EMPTY}
        self.memo: dict[tuple[int, int], int] = {}
        self.gen = excl.generation

    def sync(self) -> int:
        g = self.excl.generation
        if g != self.gen:
            self.gen = g
            self.memo.clear()
        return self.gen

    def step(self, rid: int, tid: int) -> int:
        key = (rid, tid)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        children = self.excl.children
        terminal = self.excl.terminal
        nodes = []
        nxt = children[0].get(tid)
        if nxt is not None:
            nodes.append(nxt)
        for n in self.sets[rid]:
            nxt = children[n].get(tid)
            if nxt is not None:
                nodes.append(nxt)
        if any(terminal[n] for n in nodes):
            out = DEAD
        else:
            fs = frozenset(nodes)
            out = self.ids.get(fs)
            if out is None:
                out = len(self.sets)
                self.sets.append(fs)
                self.ids[fs] = out
        self.memo[key] = out
        return out

    def residual(self, b: Block) -> int:
        """Residual of b's trace under the current generation (DEAD if an excluded word occurs)."""
        gen = self.gen
        chain = []
        node = b
        while node.parent is not None and node.res_gen != gen:
            chain.append(node)
            node = node.parent
        rid = EMPTY if node.parent is None else node.res_id
        label_of = self.label_of
        for blk in reversed(chain):
            if rid != DEAD:
                tid = blk.trans.id
                rid = self.step(rid, tid if label_of is None else label_of[tid])
            blk.res_gen, blk.res_id = gen, rid
        return rid


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Witness:
    initial_state: int
    pref: tuple[Transition, ...]
    rec: tuple[Transition, ...]
    query: EufQuery
    classes: tuple[tuple[Term, ...], ...] = ()
    polarities: tuple[tuple[Term, bool | None], ...] = ()


@dataclass
class Verdict:
    outcome: str
    reason: str | None = None
    witness: Witness | None = None
    stats: dict[str, Any] = field(default_factory=dict)
    exclusions: tuple[tuple[int, ...], ...] = ()
    bsa: BSA | None = field(default=None, repr=False)
    approx: Approximation | None = field(default=None, repr=False)

    @property
    def headline(self) -> str:
        return f"UNKNOWN({self.reason})" if self.outcome == UNKNOWN else self.outcome


@dataclass(frozen=True)
class CheckerConfig:
    mode: str = FINITARY
    timeout: float | None = 300.0
    workers: int = 1
    deterministic: bool = False
    letter_cap: int = DEFAULT_LETTER_CAP
    automaton_cap: int = 200_000
    block_budget: int = 5_000_000
    query_term_budget: int = 1_000_000
    exclude_per_search: int = 8
    guard_mode: str = BOTH
    recheck_every: int = 100
    solver: str | None = None
    smt_dump: str | None = None
    nba: NBA | None = None
    empty_shortcut: bool = True

    def __post_init__(self):
        if self.mode not in (FINITARY, GENERAL):
            raise ValueError(f"mode must be {FINITARY!r} or {GENERAL!r}")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.workers not in (1, 2):
            raise ValueError("workers must be 1 or 2")
        if self.guard_mode not in (BOTH, PARTIAL, TOTAL):
            raise ValueError(f"guard_mode must be {BOTH!r}, {PARTIAL!r} or {TOTAL!r}")


class _Stop(Exception):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict


# ---------------------------------------------------------------------------
# the two workers


class _Run:
    """State shared by all lanes of one check: block budget, deadline and result."""

    def __init__(self, config: CheckerConfig, deadline: float | None):
        self.config = config
        self.deadline = deadline
        self.blocks = 0
        self.result: Verdict | None = None
        self.winner: _Shared | None = None
        self.result_lock = threading.Lock()
        self.stop = threading.Event()

    def offer(self, v: Verdict, lane: _Shared | None) -> None:
        with self.result_lock:
            if self.result is None:
                self.result, self.winner = v, lane
                self.stop.set()

    def charge(self, n: int) -> None:
        self.blocks += n
        if self.blocks > self.config.block_budget:
            raise _Stop(Verdict(UNKNOWN, "cap"))


class _Shared:
    """One lane: an automaton and the exclusion set its two workers share."""

    def __init__(self, bsa: BSA, run: _Run, name: str = ""):
        self.bsa = bsa
        self.run = run
        self.config = run.config
        self.name = name
        self.excl = ExclusionSet()

    def charge(self, n: int) -> None:
        self.run.charge(n)


class ExcludeWorker:
    """Breadth-first search for conflicting label words.

    A block stands for a word of transition labels together with the set of
    states in which some run reading that word can end; the root is the set
    of all states.  Whether a word's constraints clash depends on its labels
    only, so one tree covers the words starting in every state.
    """

    def __init__(self, shared: _Shared):
        self.shared = shared
        self.bsa = bsa = shared.bsa
        self.matcher = ExclusionMatcher(shared.excl)
        self.filler = EffectFiller(bsa.cells)
        self.by_state: list[dict[int, list[int]]] = [{} for _ in range(bsa.num_states)]
        for t in bsa.transitions:
            self.by_state[t.src].setdefault(bsa.label_of[t.id], []).append(t.dst)
        self.sets: list[frozenset[int]] = []
        self.set_ids: dict[frozenset[int], int] = {}
        self.kids_memo: dict[int, list[tuple[int, int]]] = {}
        root = self._intern(frozenset(range(bsa.num_states)))
        self.queue: deque[Block] = deque([root_block(root, bsa.cells)] if bsa.num_states else [])
        shared.charge(len(self.queue))
        self.expanded = 0

    def _intern(self, states: frozenset[int]) -> int:
        i = self.set_ids.get(states)
        if i is None:
            i = self.set_ids[states] = len(self.sets)
            self.sets.append(states)
        return i

    def _label_children(self, sid: int) -> list[tuple[int, int]]:
        hit = self.kids_memo.get(sid)
        if hit is not None:
            return hit
        targets: dict[int, set[int]] = {}
        for q in self.sets[sid]:
            for lid, dsts in self.by_state[q].items():
                targets.setdefault(lid, set()).update(dsts)
        out = [(lid, self._intern(frozenset(targets[lid]))) for lid in sorted(targets)]
        self.kids_memo[sid] = out
        return out

    @property
    def idle(self) -> bool:
        return not self.queue

    def step(self) -> None:
        if not self.queue:
            return
        b = self.queue.popleft()
        self.matcher.sync()
        if b.parent is not None and self.matcher.residual(b) == DEAD:
            return
        self.expanded += 1
        if self.filler.fill(b).conflict:
            self.shared.excl.add(tuple(t.id for t in trace(b)))
            return
        labels = self.bsa.labels
        kids = [Block(sid, b, labels[lid]) for lid, sid in self._label_children(b.state)]
        self.shared.charge(len(kids))
        self.queue.extend(kids)


class SearchWorker:
    """Breadth-first search for a consistent accepting lasso from the initial states.

    Children are checked for closing an accepting loop as soon as they are
    created; blocks are visited in the same order either way, so the first
    witness found is the same one.
    """

    def __init__(self, shared: _Shared):
        self.shared = shared
        self.bsa = shared.bsa
        self.config = shared.config
        self.matcher = ExclusionMatcher(shared.excl, self.bsa.label_of)
        self.filler = EffectFiller(self.bsa.cells)
        self.queue: deque[Block] = deque(root_block(q, self.bsa.cells) for q in self.bsa.initial)
        shared.charge(len(self.queue))
        self.dead: set[tuple[int, int]] = set()
        self.viable: set[tuple[int, int]] = set()
        self.viable_gen = -1
        self.expanded = 0
        self.queries = 0
        self.rechecks = 0
        self.viability_checks = 0

    @property
    def idle(self) -> bool:
        return not self.queue

    def step(self) -> Verdict | None:
        if not self.queue:
            return Verdict(UNSAT)
        b = self.queue.popleft()
        gen = self.matcher.sync()
        if gen != self.viable_gen:
            self.viable.clear()
            self.viable_gen = gen
        if not self.is_viable(b):
            return None
        self.expanded += 1
        accepting = self.bsa.accepting
        kept = []
        for child in children(b, self.bsa):
            if self.filler.fill(child).conflict:
                continue
            loops = find_accepting_loops(child, accepting)
            if loops:
                found = self.check_loops(child, loops)
                if found is not None:
                    return found
            kept.append(child)
        self.shared.charge(len(kept))
        self.queue.extend(kept)
        return None

    def is_viable(self, b: Block) -> bool:
        rid = self.matcher.residual(b)
        if rid == DEAD:
            return False
        return self.viability(b.state, rid)

    def viability(self, state: int, rid: int) -> bool:
        """Is an accepting lasso reachable from this product position (nested DFS)?"""
        key = (state, rid)
        if key in self.dead:
            return False
        if key in self.viable:
            return True
        self.viability_checks += 1
        bsa, matcher = self.bsa, self.matcher
        label_of = bsa.label_of
        dead, viable = self.dead, self.viable

        def succ(node):
            q, r = node
            out = []
            for t in bsa.out[q]:
                r2 = matcher.step(r, label_of[t.id])
                if r2 != DEAD:
                    nxt = (t.dst, r2)
                    if nxt not in dead:
                        out.append(nxt)
            return out

        blue = {key}
        red: set[tuple[int, int]] = set()
        stack = [(key, iter(succ(key)))]
        while stack:
            node, it = stack[-1]
            pushed = False
            for nxt in it:
                if nxt in viable:
                    viable.update(n for n, _ in stack)
                    return True
                if nxt not in blue:
                    blue.add(nxt)
                    stack.append((nxt, iter(succ(nxt))))
                    pushed = True
                    break
            if pushed:
                continue
            stack.pop()
            if node[0] in bsa.accepting and _red_dfs(node, succ, red):
                viable.update(n for n, _ in stack)
                viable.add(node)
                return True
        dead.update(blue)
        return False

    def check_loops(self, b: Block, loops: list[Block]) -> Verdict | None:
        lits = b.constraints()
        store = CongruenceStore(term_budget=self.config.query_term_budget)
        pquery = EufQuery(lits, ())
        try:
            load_query(store, pquery)
        except QueryBudgetExceeded:
            raise _Stop(Verdict(UNKNOWN, "cap")) from None
        if not store.consistent():
            self.queries += 1
            return None
        for start in loops:
            self.queries += 1
            eqs = tuple((a, c) for a, c in zip(start.terms, b.terms))
            query = EufQuery(lits, eqs)
            store.push()
            try:
                for a, c in eqs:
                    store.merge(a, c)
            except QueryBudgetExceeded:
                raise _Stop(Verdict(UNKNOWN, "cap")) from None
            ok = store.consistent()
            classes = tuple(tuple(c) for c in store.classes()) if ok else ()
            pols = tuple(store.polarities()) if ok else ()
            store.pop()
            self._audit(query, ok)
            if ok:
                full = trace(b)
                k = start.depth
                w = Witness(
                    initial_state=_root(b).state,
                    pref=tuple(full[:k]),
                    rec=tuple(full[k:]),
                    query=query,
                    classes=classes,
                    polarities=pols,
                )
                return Verdict(SAT, witness=w)
        return None

    def _audit(self, query: EufQuery, ok: bool) -> None:
        cfg = self.config
        if cfg.smt_dump:
            path = Path(cfg.smt_dump)
            path.mkdir(parents=True, exist_ok=True)
            (path / f"query_{self.queries:06d}.smt2").write_text(export_smtlib(query), encoding="utf-8")
        if cfg.recheck_every and self.queries % cfg.recheck_every == 1:
            self.rechecks += 1
            fresh = check_query(query) == EufResult.SAT
            if fresh != ok:
                raise AssertionError(f"incremental and fresh congruence closure disagree on {query}")
            if cfg.solver:
                ext = check_query_external(query, cfg.solver)
                if ext is not None and (ext == EufResult.SAT) != ok:
                    raise AssertionError(f"external solver disagrees on {query}")


def _root(b: Block) -> Block:
    while b.parent is not None:
        b = b.parent
    return b


def _red_dfs(seed, succ, red: set) -> bool:
    stack = [seed]
    while stack:
        node = stack.pop()
        for nxt in succ(node):
            if nxt == seed:
                return True
            if nxt not in red:
                red.add(nxt)
                stack.append(nxt)
    return False


# ---------------------------------------------------------------------------
# scheduling


def _check_deadline(run: _Run) -> None:
    if run.deadline is not None and time.monotonic() > run.deadline:
        raise _Stop(Verdict(UNKNOWN, "timeout"))


_Lane = tuple[_Shared, ExcludeWorker, SearchWorker]


def _run_interleaved(run: _Run, lanes: list[_Lane]) -> Verdict:
    k = max(1, run.config.exclude_per_search)
    steps = 0
    try:
        while True:
            for lane in lanes:
                _, ex, se = lane
                for _ in range(k):
                    if ex.idle:
                        break
                    ex.step()
                v = se.step()
                if v is not None:
                    return _finish(v, run, lanes, lane[0])
            steps += 1
            if steps & 63 == 0:
                _check_deadline(run)
    except _Stop as s:
        return _finish(s.verdict, run, lanes, None)


def _run_threaded(run: _Run, lanes: list[_Lane]) -> Verdict:
    def exclude_loop():
        try:
            n = 0
            while not run.stop.is_set():
                busy = [ex for _, ex, _ in lanes if not ex.idle]
                if not busy:
                    return
                for ex in busy:
                    ex.step()
                n += 1
                if n & 255 == 0:
                    _check_deadline(run)
        except _Stop as s:
            run.offer(s.verdict, None)

    def search_loop():
        try:
            n = 0
            while not run.stop.is_set():
                for sh, _, se in lanes:
                    v = se.step()
                    if v is not None:
                        run.offer(v, sh)
                        return
                n += 1
                if n & 63 == 0:
                    _check_deadline(run)
        except _Stop as s:
            run.offer(s.verdict, None)

    threads = [threading.Thread(target=exclude_loop, daemon=True), threading.Thread(target=search_loop, daemon=True)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return _finish(run.result or Verdict(UNKNOWN, "timeout"), run, lanes, run.winner)


def _finish(v: Verdict, run: _Run, lanes: list[_Lane], winner: _Shared | None) -> Verdict:
    """Attach statistics: the deciding lane's, or the sum over lanes when none decided."""
    chosen = [lane for lane in lanes if lane[0] is winner] or lanes
    v.stats.update(
        blocks_exclude=sum(ex.expanded for _, ex, _ in chosen),
        blocks_search=sum(se.expanded for _, _, se in chosen),
        blocks_created=run.blocks,
        exclusions=sum(len(sh.excl) for sh, _, _ in chosen),
        queries=sum(se.queries for _, _, se in chosen),
        rechecks=sum(se.rechecks for _, _, se in chosen),
        viability_checks=sum(se.viability_checks for _, _, se in chosen),
    )
    if winner is not None:
        v.stats["lane"] = winner.name
        v.bsa = winner.bsa
    v.exclusions = tuple(w for sh, _, _ in chosen for w in sh.excl.words)
    return v


def search_lanes(bsas: dict[str, BSA], config: CheckerConfig | None = None, deadline: float | None = None) -> Verdict:
    """Run the dual search on every automaton side by side; the first decision wins.

    Each automaton must accept the same language of computations (for
    instance the partial- and total-guard expansions of one formula), so
    a verdict from any lane is a verdict for all.
    """
    config = config or CheckerConfig()
    run = _Run(config, deadline)
    try:
        lanes = []
        for name, bsa in bsas.items():
            sh = _Shared(bsa, run, name)
            lanes.append((sh, ExcludeWorker(sh), SearchWorker(sh)))
    except _Stop as s:
        return s.verdict
    if config.workers == 2 and not config.deterministic:
        return _run_threaded(run, lanes)
    return _run_interleaved(run, lanes)


def search_bsa(bsa: BSA, config: CheckerConfig | None = None, deadline: float | None = None) -> Verdict:
    """Run the dual search on an already built (and trimmed) automaton."""
    config = config or CheckerConfig()
    return search_lanes({config.guard_mode: bsa}, config, deadline)


# ---------------------------------------------------------------------------
# pipeline


def approximation_for(phi: fm.Formula, signature: Signature, mode: str = FINITARY) -> Approximation:
    """The LTL approximation the checker works on (general mode goes through finitarize)."""
    if mode == GENERAL:
        phi, signature = finitarize(phi, signature)
    return approximate(phi, signature, FINITARY)


def prepare(
    phi: fm.Formula, signature: Signature, config: CheckerConfig, deadline: float | None = None
) -> tuple[Approximation, NBA]:
    approx = approximation_for(phi, signature, config.mode)
    if config.nba is not None:
        return approx, config.nba
    return approx, ltl_to_nba(approx.core, config.automaton_cap, deadline)


def run_checker(phi: fm.Formula, signature: Signature, config: CheckerConfig | None = None) -> Verdict:
    config = config or CheckerConfig()
    t0 = time.monotonic()
    deadline = None if config.timeout is None else t0 + config.timeout
    try:
        approx, nba = prepare(phi, signature, config, deadline)
    except AutomatonTooLarge as e:
        v = Verdict(UNKNOWN, "cap", stats={"cap_nba": str(e)})
        v.stats["wall_ms"] = round((time.monotonic() - t0) * 1000, 3)
        return v
    stats: dict[str, Any] = {"nba_states": nba.num_states, "nba_edges": len(nba.edges)}
    modes = (PARTIAL, TOTAL) if config.guard_mode == BOTH else (config.guard_mode,)
    built: dict[str, BSA] = {}
    for m in modes:
        try:
            built[m] = nba_to_bsa(nba, approx, config.letter_cap, m, config.automaton_cap)
        except LetterCapExceeded as e:
            stats[f"cap_{m}"] = str(e)
    if not built:
        v = Verdict(UNKNOWN, "cap", stats=stats, approx=approx)
        v.stats["wall_ms"] = round((time.monotonic() - t0) * 1000, 3)
        return v
    full = built[modes[-1]] if modes[-1] in built else next(iter(built.values()))
    stats.update(bsa_states=full.num_states, bsa_transitions=len(full.transitions))
    if config.empty_shortcut and full.is_empty():
        v = Verdict(UNSAT, stats=stats | {"structurally_empty": True}, bsa=full, approx=approx)
        v.stats["wall_ms"] = round((time.monotonic() - t0) * 1000, 3)
        return v
    lanes = {m: b.trim() for m, b in built.items()}
    bsa = lanes.get(TOTAL) or next(iter(lanes.values()))
    stats.update(trimmed_states=bsa.num_states, trimmed_transitions=len(bsa.transitions), structurally_empty=False)
    v = search_lanes(lanes, config, deadline)
    v.stats = stats | v.stats
    v.approx = approx
    if v.bsa is None:
        v.bsa = bsa
    if v.outcome == SAT and not witness_validate(v.witness, approx, v.bsa):
        raise AssertionError("internal error: SAT witness failed validation")
    v.stats["wall_ms"] = round((time.monotonic() - t0) * 1000, 3)
    return v


def witness_validate(w: Witness, approx: Approximation, bsa: BSA | None = None) -> bool:
    """Recheck a SAT witness from scratch.

    The runs must chain from the initial state and close a loop through an
    accepting state; the stored query must equal the one rebuilt from freshly
    computed effects and be satisfiable; and the lasso's letter word must
    satisfy the LTL approximation.
    """
    if w is None or not w.rec:
        return False
    run = list(w.pref) + list(w.rec)
    state = w.initial_state
    if bsa is not None:
        if state not in bsa.initial:
            return False
        known = set(bsa.transitions)
        if any(t not in known for t in run):
            return False
    for t in run:
        if t.src != state:
            return False
        state = t.dst
    loop_start = w.rec[0].src
    if state != loop_start:
        return False
    if bsa is not None and not any(t.dst in bsa.accepting for t in w.rec):
        return False
    cells = approx.cells
    e_pref = effect_of_run(cells, w.pref)
    e_full = effect_of_run(cells, run)
    rebuilt = EufQuery(e_full.constraints, tuple(zip(e_pref.terms, e_full.terms)))
    if rebuilt != w.query:
        return False
    if find_syntactic_conflict(e_full.constraints) is not None:
        return False
    if check_query(rebuilt) != EufResult.SAT:
        return False
    stem = letter_word(w.pref, approx)
    loop = letter_word(w.rec, approx)
    return ltl_lasso_check(stem, loop, approx.formula)


def check_text(text: str, config: CheckerConfig | None = None) -> Verdict:
    from .parser import parse_formula

    phi, sig = parse_formula(text)
    return run_checker(phi, sig, config)


def check_validity(phi: fm.Formula, signature: Signature, config: CheckerConfig | None = None) -> Verdict:
    """``phi`` is (finitary) valid iff its negation is unsatisfiable.

    Returns the verdict of the negation with outcome relabelled
    ``VALID`` / ``NOT_VALID``.
    """
    v = run_checker(fm.Not(phi), signature, config)
    relabel = {SAT: "NOT_VALID", UNSAT: "VALID"}
    return replace(v, outcome=relabel.get(v.outcome, v.outcome))


def default_seed() -> int:
    return int(os.environ.get("TSLSAT_SEED", "0"))
