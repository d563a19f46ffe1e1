"""LTL to nondeterministic Büchi automata.

The formula is put in negation normal form and expanded tableau style into a
generalized Büchi automaton with one acceptance set per Until subformula
(transition based: a transition is in the set of ``a U b`` unless it
postponed ``b``).  A counter construction then yields state-based acceptance.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from ..ltl import AP, LAnd, LAtom, LNext, LNot, LTrue, LUntil, LtlFormula

# interned negation-normal-form nodes
_T, _F, _LIT, _AND, _OR, _X, _U, _R = range(8)


class _Nnf:
    def __init__(self) -> None:
        self.nodes: list[tuple] = []
        self.index: dict[tuple, int] = {}
        self.aps: list[AP] = []
        self.ap_index: dict[AP, int] = {}
        self.true = self._mk((_T,))
        self.false = self._mk((_F,))

    def _mk(self, node: tuple) -> int:
        i = self.index.get(node)
        if i is None:
            i = len(self.nodes)
            self.nodes.append(node)
            self.index[node] = i
        return i

    def ap(self, ap: AP) -> int:
        i = self.ap_index.get(ap)
        if i is None:
            i = len(self.aps)
            self.aps.append(ap)
            self.ap_index[ap] = i
        return i

    def conj(self, a: int, b: int) -> int:
        if a == self.false or b == self.false:
            return self.false
        if a == self.true:
            return b
        if b == self.true or a == b:
            return a
        return self._mk((_AND, a, b))

    def disj(self, a: int, b: int) -> int:
        if a == self.true or b == self.true:
            return self.true
        if a == self.false:
            return b
        if b == self.false or a == b:
            return a
        return self._mk((_OR, a, b))

    def convert(self, phi: LtlFormula, neg: bool = False) -> int:
        memo: dict[tuple[int, bool], int] = {}

        def go(f: LtlFormula, n: bool) -> int:
            key = (id(f), n)
            hit = memo.get(key)
            if hit is not None:
                return hit
            match f:
                case LTrue():
                    r = self.false if n else self.true
                case LAtom(ap):
                    r = self._mk((_LIT, self.ap(ap), not n))
                case LNot(a):
                    r = go(a, not n)
                case LAnd(a, b):
                    r = self.disj(go(a, True), go(b, True)) if n else self.conj(go(a, False), go(b, False))
                case LNext(a):
                    r = self._mk((_X, go(a, n)))
                case LUntil(a, b):
                    if n:
                        r = self._mk((_R, go(a, True), go(b, True)))
                    else:
                        r = self._mk((_U, go(a, False), go(b, False)))
                case _:
                    raise TypeError(f"not an LTL formula: {f!r}")
            memo[key] = r
            return r

        return go(phi, neg)


class AutomatonTooLarge(RuntimeError):
    """The translation exceeded its edge limit or deadline."""


@dataclass(frozen=True, slots=True)
class Edge:
    """NBA edge labelled by a cube: bits of ``pos`` must hold, bits of ``neg`` must not."""

    src: int
    pos: int
    neg: int
    dst: int

    def matches(self, true_bits: int) -> bool:
        return (self.pos & ~true_bits) == 0 and (self.neg & true_bits) == 0


@dataclass(frozen=True)
class NBA:
    """State-based Büchi automaton with cube-labelled edges over ``aps``."""

    aps: tuple[AP, ...]
    num_states: int
    initial: tuple[int, ...]
    accepting: frozenset[int]
    edges: tuple[Edge, ...]

    def out_edges(self) -> list[list[Edge]]:
        out: list[list[Edge]] = [[] for _ in range(self.num_states)]
        for e in self.edges:
            out[e.src].append(e)
        return out

    def successors(self, q: int):
        return [e.dst for e in self._out()[q]]

    def _out(self) -> list[list[Edge]]:
        cached = self.__dict__.get("_out_cache")
        if cached is None:
            cached = self.out_edges()
            object.__setattr__(self, "_out_cache", cached)
        return cached

    def bits_of(self, letter) -> int:
        """Bitmask of the APs a letter (mapping AP -> bool) makes true."""
        b = 0
        for i, ap in enumerate(self.aps):
            if letter.get(ap, False):
                b |= 1 << i
        return b

    def label_str(self, e: Edge) -> str:
        lits = []
        for i, ap in enumerate(self.aps):
            if e.pos >> i & 1:
                lits.append(str(ap))
            elif e.neg >> i & 1:
                lits.append(f"!{ap}")
        return " & ".join(lits) or "true"


def _expand(nnf: _Nnf, obligations: tuple[int, ...]):
    """All ways to satisfy ``obligations`` now: (pos, neg, next set, postponed untils)."""
    nodes = nnf.nodes
    results: list[tuple[int, int, frozenset[int], frozenset[int]]] = []
    stack = [(list(obligations), frozenset(), 0, 0, frozenset(), frozenset())]
    while stack:
        todo, done, pos, neg, nxt, postponed = stack.pop()
        dead = False
        while todo:
            f = todo.pop()
            if f in done:
                continue
            done = done | {f}
            node = nodes[f]
            match node[0]:
                case 0:  # true
                    pass
                case 1:  # false
                    dead = True
                    break
                case 2:  # literal
                    bit = 1 << node[1]
                    if node[2]:
                        if neg & bit:
                            dead = True
                            break
                        pos |= bit
                    else:
                        if pos & bit:
                            dead = True
                            break
                        neg |= bit
                case 3:  # and
                    todo.append(node[2])
                    todo.append(node[1])
                case 4:  # or
                    stack.append(([*todo, node[2]], done, pos, neg, nxt, postponed))
                    todo.append(node[1])
                case 5:  # next
                    nxt = nxt | {node[1]}
                case 6:  # until: b now, or a now and the until again next
                    stack.append(([*todo, node[1]], done, pos, neg, nxt | {f}, postponed | {f}))
                    todo.append(node[2])
                case 7:  # release: a and b now, or b now and the release again next
                    stack.append(([*todo, node[2]], done, pos, neg, nxt | {f}, postponed))
                    todo.append(node[2])
                    todo.append(node[1])
        if not dead:
            results.append((pos, neg, nxt, postponed))
    return results


def _flatten(nnf: _Nnf, ids) -> frozenset[int]:
    """Normalise an obligation set: split conjunctions, drop implied members."""
    out = set()
    stack = list(ids)
    while stack:
        f = stack.pop()
        node = nnf.nodes[f]
        if node[0] == _AND:
            stack += [node[1], node[2]]
        elif node[0] != _T:
            out.add(f)
    # a release demands its right operand in every step, so that operand is implied
    implied = set()
    for f in out:
        node = nnf.nodes[f]
        if node[0] == _R:
            implied |= _conjuncts(nnf, node[2])
    return frozenset(out - implied)


def _conjuncts(nnf: _Nnf, f: int) -> set[int]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        node = nnf.nodes[g]
        if node[0] == _AND:
            stack += [node[1], node[2]]
        else:
            out.add(g)
    return out


def _prune(results):
    """Drop duplicate and subsumed expansions (weaker cube, same target, fewer postponements)."""
    uniq = sorted(set(results), key=lambda r: (bin(r[0] | r[1]).count("1"), r[0], r[1], sorted(r[2]), sorted(r[3])))
    kept: list[tuple[int, int, frozenset[int], frozenset[int]]] = []
    for r in uniq:
        pos, neg, nxt, post = r
        if any(
            k[2] == nxt and (k[0] & ~pos) == 0 and (k[1] & ~neg) == 0 and k[3] <= post
            for k in kept
        ):
            continue
        kept.append(r)
    return kept


def ltl_to_nba(phi: LtlFormula, max_edges: int | None = None, deadline: float | None = None) -> NBA:
    """Translate ``phi``; raises :class:`AutomatonTooLarge` past ``max_edges`` or the ``deadline``."""

    def guard(count: int) -> None:
        if max_edges is not None and count > max_edges:
            raise AutomatonTooLarge(f"automaton exceeds {max_edges} edges")
        if deadline is not None and time.monotonic() > deadline:
            raise AutomatonTooLarge("translation ran past the deadline")

    nnf = _Nnf()
    root = nnf.convert(phi)
    untils = sorted(i for i, n in enumerate(nnf.nodes) if n[0] == _U)

    # generalized automaton over obligation sets
    init_key = _flatten(nnf, [root])
    gstates: dict[frozenset[int], int] = {init_key: 0}
    order = [init_key]
    gedges: list[tuple[int, int, int, int, frozenset[int]]] = []
    queue = deque([init_key])
    while queue:
        key = queue.popleft()
        src = gstates[key]
        for pos, neg, nxt, post in _prune(_expand(nnf, tuple(sorted(key)))):
            nxt = _flatten(nnf, nxt)
            if nxt not in gstates:
                gstates[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            gedges.append((src, pos, neg, gstates[nxt], post))
        guard(len(gedges))

    k = len(untils)
    if k == 0:
        edges = sorted({Edge(s, p, n, d) for s, p, n, d, _ in gedges}, key=_edge_key)
        return NBA(tuple(nnf.aps), len(order), (0,), frozenset(range(len(order))), tuple(edges))

    # counter degeneralization: level k marks an accepting copy
    index: dict[tuple[int, int], int] = {(0, 0): 0}
    states = [(0, 0)]
    out_by_src: dict[int, list] = {}
    for e in gedges:
        out_by_src.setdefault(e[0], []).append(e)
    edges_out: set[Edge] = set()
    queue2 = deque([(0, 0)])
    while queue2:
        g, lvl = queue2.popleft()
        src = index[(g, lvl)]
        for _, pos, neg, dst, post in out_by_src.get(g, ()):
            j = 0 if lvl == k else lvl
            while j < k and untils[j] not in post:
                j += 1
            target = (dst, j)
            if target not in index:
                index[target] = len(states)
                states.append(target)
                queue2.append(target)
            edges_out.add(Edge(src, pos, neg, index[target]))
        guard(len(edges_out))
    accepting = frozenset(i for i, (_, lvl) in enumerate(states) if lvl == k)
    return NBA(tuple(nnf.aps), len(states), (0,), accepting, tuple(sorted(edges_out, key=_edge_key)))


def _edge_key(e: Edge):
    return (e.src, e.pos, e.neg, e.dst)


def nba_accepts_lasso(nba: NBA, stem, loop) -> bool:
    """Is ``stem . loop^omega`` (letters as AP -> bool mappings) accepted?"""
    if not loop:
        raise ValueError("loop must be nonempty")
    out = nba._out()
    sbits = [nba.bits_of(w) for w in stem]
    lbits = [nba.bits_of(w) for w in loop]
    current = set(nba.initial)
    for b in sbits:
        current = {e.dst for q in current for e in out[q] if e.matches(b)}
    n = len(lbits)

    def succ(node):
        q, i = node
        return [(e.dst, (i + 1) % n) for e in out[q] if e.matches(lbits[i])]

    # product positions reachable at the loop start, then look for an accepting cycle
    reach: set[tuple[int, int]] = set()
    frontier = [(q, 0) for q in current]
    while frontier:
        v = frontier.pop()
        if v in reach:
            continue
        reach.add(v)
        frontier.extend(succ(v))
    return _has_accepting_cycle(reach, succ, lambda v: v[0] in nba.accepting)


def _has_accepting_cycle(nodes, succ, accepting) -> bool:
    """Some accepting node in ``nodes`` lies on a cycle (nodes closed under succ)."""
    for a in sorted(v for v in nodes if accepting(v)):
        seen = set()
        frontier = list(succ(a))
        while frontier:
            v = frontier.pop()
            if v == a:
                return True
            if v in seen:
                continue
            seen.add(v)
            frontier.extend(succ(v))
    return False
