"""Reading and writing state-based Büchi automata in HOA v1 format."""
from __future__ import annotations

import re
from collections.abc import Mapping

from ..ltl import AP, PredAP, UpdateAP
from ..parser import parse_term
from ..terms import PRED, Term, cell, pred, star
from .tableau import NBA, Edge


class HoaError(ValueError):
    pass


def write_hoa(nba: NBA, name: str = "") -> str:
    lines = ["HOA: v1"]
    if name:
        lines.append(f'name: "{name}"')
    lines.append(f"States: {nba.num_states}")
    for q in nba.initial:
        lines.append(f"Start: {q}")
    aps = " ".join(f'"{ap}"' for ap in nba.aps)
    lines.append(f"AP: {len(nba.aps)}{' ' + aps if aps else ''}")
    lines += [
        "acc-name: Buchi",
        "Acceptance: 1 Inf(0)",
        "properties: trans-labels explicit-labels state-acc",
        "--BODY--",
    ]
    out = nba.out_edges()
    for q in range(nba.num_states):
        lines.append(f"State: {q}{' {0}' if q in nba.accepting else ''}")
        for e in out[q]:
            lits = []
            for i in range(len(nba.aps)):
                if e.pos >> i & 1:
                    lits.append(str(i))
                elif e.neg >> i & 1:
                    lits.append(f"!{i}")
            lines.append(f"[{'&'.join(lits) or 't'}] {e.dst}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


def ap_from_name(name: str) -> AP:
    """Inverse of ``str(ap)``: ``p(x)`` or ``[x <- f(x)]`` (``*`` for STAR)."""
    m = re.fullmatch(r"\s*\[\s*([A-Za-z_][A-Za-z0-9_']*)\s*<-\s*(.*?)\s*\]\s*", name)
    if m:
        rhs = m.group(2)
        term = star() if rhs == "*" else _term(rhs)
        return UpdateAP(cell(m.group(1)), term)
    t = _term(name)
    if not t.args and t.kind != PRED and "(" not in name:
        raise HoaError(f"AP {name!r} is neither a predicate term nor an update")
    return PredAP(pred(t.head, *t.args))


def _term(text: str) -> Term:
    try:
        return parse_term(text)
    except ValueError as e:
        raise HoaError(f"cannot read term {text!r}: {e}") from None


_TOKEN = re.compile(r'\s*("(?:[^"\\]|\\.)*"|[A-Za-z@][A-Za-z0-9_.-]*:|--[A-Z]+--|\[[^\]]*\]|\{[^}]*\}|[^\s"\[{]+)')


def _tokens(text: str) -> list[str]:
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1):
            out.append(m.group(1))
        pos = m.end()
    return out


def parse_hoa(text: str, universe: Mapping[str, AP] | None = None) -> NBA:
    """Parse a state-based Büchi automaton with explicit transition labels.

    AP names are mapped through ``universe`` (name -> AP) when given, else
    parsed with :func:`ap_from_name`.
    """
    toks = _tokens(text)
    if not toks or toks[0] != "HOA:" or len(toks) < 2 or toks[1] != "v1":
        raise HoaError("missing 'HOA: v1' header")
    i = 2
    num_states = None
    starts: list[int] = []
    ap_names: list[str] = []
    acc_ok = False
    while i < len(toks) and toks[i] != "--BODY--":
        key = toks[i]
        i += 1
        args = []
        while i < len(toks) and not toks[i].endswith(":") and toks[i] != "--BODY--":
            args.append(toks[i])
            i += 1
        match key:
            case "States:":
                num_states = int(args[0])
            case "Start:":
                if "&" in args:
                    raise HoaError("alternating start states are not supported")
                starts.append(int(args[0]))
            case "AP:":
                count = int(args[0])
                ap_names = [a[1:-1].replace('\\"', '"') for a in args[1:]]
                if len(ap_names) != count:
                    raise HoaError(f"AP header declares {count} names but lists {len(ap_names)}")
            case "Acceptance:":
                acc_ok = " ".join(args).replace(" ", "") in ("1Inf(0)",)
                if not acc_ok:
                    raise HoaError(f"unsupported acceptance condition {' '.join(args)}")
            case _:
                pass
    if i >= len(toks):
        raise HoaError("missing --BODY--")
    if not acc_ok:
        raise HoaError("missing 'Acceptance: 1 Inf(0)'")
    i += 1
    aps: list[AP] = []
    for name in ap_names:
        if universe is not None:
            if name not in universe:
                raise HoaError(f"AP {name!r} is not in the formula's proposition universe")
            aps.append(universe[name])
        else:
            aps.append(ap_from_name(name))

    edges: set[Edge] = set()
    accepting: set[int] = set()
    seen_states = 0
    current = None
    while i < len(toks) and toks[i] != "--END--":
        tok = toks[i]
        if tok == "State:":
            i += 1
            if toks[i].startswith("["):
                raise HoaError("state labels are not supported")
            current = int(toks[i])
            seen_states = max(seen_states, current + 1)
            i += 1
            if i < len(toks) and toks[i].startswith('"'):
                i += 1
            if i < len(toks) and toks[i].startswith("{"):
                if toks[i][1:-1].split():
                    accepting.add(current)
                i += 1
            continue
        if tok.startswith("["):
            if current is None:
                raise HoaError("edge outside a state")
            label = tok[1:-1]
            i += 1
            dst = int(toks[i])
            i += 1
            if i < len(toks) and toks[i].startswith("{"):
                raise HoaError("transition-based acceptance is not supported")
            for pos, neg in _label_cubes(label):
                edges.add(Edge(current, pos, neg, dst))
            continue
        raise HoaError(f"unexpected token {tok!r} in body")
    if i >= len(toks):
        raise HoaError("missing --END--")
    n = num_states if num_states is not None else seen_states
    return NBA(
        aps=tuple(aps),
        num_states=n,
        initial=tuple(starts),
        accepting=frozenset(accepting),
        edges=tuple(sorted(edges, key=lambda e: (e.src, e.pos, e.neg, e.dst))),
    )


def _label_cubes(label: str) -> list[tuple[int, int]]:
    """Disjunctive normal form of a HOA label expression as (pos, neg) bitmasks."""
    toks = re.findall(r"\d+|[tf!&|()]", label)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def disj():
        cubes = conj()
        while peek() == "|":
            take()
            cubes = cubes + conj()
        return cubes

    def conj():
        cubes = unary()
        while peek() == "&":
            take()
            rhs = unary()
            cubes = [(p1 | p2, n1 | n2) for p1, n1 in cubes for p2, n2 in rhs if not ((p1 | p2) & (n1 | n2))]
        return cubes

    def unary():
        tok = take()
        if tok == "!":
            inner = unary()
            return _negate(inner)
        if tok == "(":
            c = disj()
            if take() != ")":
                raise HoaError(f"unbalanced label {label!r}")
            return c
        if tok == "t":
            return [(0, 0)]
        if tok == "f":
            return []
        if tok is not None and tok.isdigit():
            return [(1 << int(tok), 0)]
        raise HoaError(f"cannot read label {label!r}")

    cubes = disj()
    if pos != len(toks):
        raise HoaError(f"trailing input in label {label!r}")
    return sorted(set(cubes))


def _negate(cubes: list[tuple[int, int]]) -> list[tuple[int, int]]:
    # De Morgan: the negation of a disjunction of cubes is a conjunction of clauses
    result = [(0, 0)]
    for p, n in cubes:
        clause = [(0, 1 << i) for i in _bits(p)] + [(1 << i, 0) for i in _bits(n)]
        result = [
            (p1 | p2, n1 | n2) for p1, n1 in result for p2, n2 in clause if not ((p1 | p2) & (n1 | n2))
        ]
    return result


def _bits(x: int) -> list[int]:
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out
