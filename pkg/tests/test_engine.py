from __future__ import annotations

import itertools
import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tslsat import generators as gen
from tslsat.automata import Transition, effect_of_run, find_syntactic_conflict
from tslsat.engine import (
    DEAD,
    SAT,
    UNKNOWN,
    UNSAT,
    Block,
    CheckerConfig,
    ExclusionMatcher,
    ExclusionSet,
    approximation_for,
    check_text,
    check_validity,
    find_accepting_loops,
    root_block,
    run_checker,
    successors,
    trace,
    witness_validate,
)
from tslsat.euf import EufQuery, EufResult, check_query, query_from
from tslsat.formula import signature_of
from tslsat.ltl import GENERAL
from tslsat.parser import parse_formula
from tslsat.terms import app, cell, pred

x = cell("x")
f = lambda t: app("f", t)
p = lambda t: pred("p", t)

PHI1 = "G [x <- f(x)] && G F (p(x) && X !p(x))"
PHI2 = "G ([x <- f(x)] && p(x)) && F !p(f(x))"


def check(text, **kw):
    return check_text(text, CheckerConfig(**kw))


def brute_force_sat(bsa, cells, max_len):
    """Some lasso of at most ``max_len`` transitions whose query is satisfiable."""

    def runs(q, n):
        yield []
        if n:
            for t in bsa.out[q]:
                for rest in runs(t.dst, n - 1):
                    yield [t, *rest]

    for q0 in bsa.initial:
        for run in runs(q0, max_len):
            for cut in range(len(run)):
                rec = run[cut:]
                if rec[-1].dst != rec[0].src or not any(t.dst in bsa.accepting for t in rec):
                    continue
                e_pref = effect_of_run(cells, run[:cut])
                e_full = effect_of_run(cells, run)
                q = EufQuery(e_full.constraints, tuple(zip(e_pref.terms, e_full.terms)))
                if check_query(q) is EufResult.SAT:
                    return True
    return False


class TestWorkedExamples:
    def test_phi1_sat_with_expected_query(self):
        v = check(PHI1)
        assert v.outcome == SAT
        expected = query_from([(p(x), True), (p(f(x)), False)], [(x, f(f(x)))])
        assert v.witness.query == expected
        assert witness_validate(v.witness, v.approx, v.bsa)
        assert [x, f(f(x))] in [list(c) for c in v.witness.classes]

    def test_phi2_unsat(self):
        v = check(PHI2)
        assert v.outcome == UNSAT
        assert v.stats["exclusions"] > 0

    def test_always_p_sat(self):
        assert check("G p(x)").outcome == SAT

    def test_ltl_unsat_is_structural(self):
        v = check("G p(x) && F !p(x)")
        assert v.outcome == UNSAT and v.stats["structurally_empty"]

    def test_shortcut_can_be_disabled(self):
        v = check("G p(x) && F !p(x)", empty_shortcut=False)
        assert v.outcome == UNSAT and not v.stats["structurally_empty"]

    def test_two_workers_agree(self):
        assert check(PHI1, workers=2).outcome == SAT
        assert check(PHI2, workers=2).outcome == UNSAT

    @pytest.mark.parametrize("mode", ["partial", "total", "both"])
    def test_each_guard_mode(self, mode):
        assert check(PHI1, guard_mode=mode).outcome == SAT
        assert check(PHI2, guard_mode=mode).outcome == UNSAT

    def test_total_lane_decides_hold_patterns(self):
        # partial guards admit an unbounded family of conflicting words here
        e = next(e for e in gen.load_corpus() if e.name == "Filter")
        partial = run_checker(e.formula, e.signature, CheckerConfig(guard_mode="partial", block_budget=200_000))
        assert partial.outcome == UNKNOWN
        v = run_checker(e.formula, e.signature)
        assert v.outcome == UNSAT and v.stats["lane"] == "total"


class TestModes:
    def test_general_mode(self):
        assert check(PHI2, mode=GENERAL).outcome == UNSAT
        assert check("G p(x) && F [x <- f(x)]", mode=GENERAL).outcome == SAT

    def test_general_approximation_uses_fresh_cell(self):
        phi, sig = parse_formula(PHI1)
        approx = approximation_for(phi, sig, GENERAL)
        assert "n" in [c.head for c in approx.cells]

    def test_validity(self):
        phi, sig = parse_formula("G p(x) -> p(x)")
        assert check_validity(phi, sig).outcome == "VALID"
        phi, sig = parse_formula("G p(x)")
        assert check_validity(phi, sig).outcome == "NOT_VALID"

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CheckerConfig(mode="eventual")
        with pytest.raises(ValueError):
            CheckerConfig(timeout=0)
        with pytest.raises(ValueError):
            CheckerConfig(workers=3)
        with pytest.raises(ValueError):
            CheckerConfig(guard_mode="some")


class TestBudgets:
    def test_timeout(self):
        chain = next(e for e in gen.load_corpus() if e.name == "Chain")
        v = run_checker(chain.formula, chain.signature, CheckerConfig(timeout=0.05))
        assert v.outcome == UNKNOWN and v.reason == "timeout"
        assert v.headline == "UNKNOWN(timeout)"

    def test_block_budget(self):
        v = check(PHI2, block_budget=10)
        assert v.outcome == UNKNOWN and v.reason == "cap"

    def test_letter_cap(self):
        v = check("p(x) && q(x) && r(x) || true", letter_cap=2, guard_mode="total")
        assert v.outcome == UNKNOWN and v.reason == "cap"

    def test_automaton_cap(self):
        v = check("G F p(x) && G F q(x) && G F r(x)", automaton_cap=5)
        assert v.headline == "UNKNOWN(cap)" and "cap_nba" in v.stats

    def test_partial_lane_survives_letter_cap(self):
        v = check("G (p(x) || q(x) || r(x)) && G [x <- f(x)]", letter_cap=3)
        assert v.outcome == SAT and v.stats["lane"] == "partial" and "cap_total" in v.stats


class TestSearchPieces:
    def _chain(self, states, accepting=frozenset()):
        b = root_block(states[0], (x,))
        for i, q in enumerate(states[1:]):
            b = Block(q, b, Transition(i, b.state, (), (), q))
        return b

    def test_loops_need_an_accepting_state(self):
        b = self._chain([0, 1, 0])
        assert find_accepting_loops(b, frozenset()) == []
        assert [a.depth for a in find_accepting_loops(b, frozenset({1}))] == [0]

    def test_accepting_loop_start_counts(self):
        b = self._chain([0, 1, 0])
        assert [a.depth for a in find_accepting_loops(b, frozenset({0}))] == [0]

    def test_nearest_first(self):
        b = self._chain([0, 0, 0])
        assert [a.depth for a in find_accepting_loops(b, frozenset({0}))] == [1, 0]

    def test_successors_fill_effects(self):
        phi, sig = parse_formula(PHI1)
        v = run_checker(phi, sig)
        kids = successors(root_block(v.bsa.initial[0], v.bsa.cells), v.bsa)
        assert kids and all(k.terms == (f(x),) for k in kids)
        assert all(k.constraints() == frozenset(k.lits) for k in kids)


class TestExclusion:
    def test_prefix_closed_insertion(self):
        e = ExclusionSet()
        assert e.add((1, 2))
        assert not e.add((1, 2, 3))
        assert not e.add((1, 2))
        assert e.add((2,))
        assert len(e) == 2 and (1, 2) in e

    @settings(max_examples=200)
    @given(
        st.lists(st.lists(st.integers(0, 2), min_size=1, max_size=3), max_size=4),
        st.lists(st.integers(0, 2), max_size=8),
    )
    def test_residual_detects_infixes(self, words, trace_ids):
        excl = ExclusionSet()
        for w in words:
            excl.add(tuple(w))
        m = ExclusionMatcher(excl)
        m.sync()
        b = root_block(0, (x,))
        for tid in trace_ids:
            b = Block(0, b, Transition(tid, 0, (), (), 0))
        hit = any(
            tuple(trace_ids[i:j]) == tuple(w)
            for w in excl.words
            for i in range(len(trace_ids))
            for j in range(i + 1, len(trace_ids) + 1)
        )
        assert (m.residual(b) == DEAD) == hit

    def test_residual_follows_new_words(self):
        excl = ExclusionSet()
        m = ExclusionMatcher(excl)
        b = root_block(0, (x,))
        for tid in (0, 1, 0):
            b = Block(0, b, Transition(tid, 0, (), (), 0))
        m.sync()
        assert m.residual(b) != DEAD
        excl.add((1, 0))
        m.sync()
        assert m.residual(b) == DEAD


class TestWitness:
    def test_tampering_is_caught(self):
        v = check(PHI1)
        w = v.witness
        from dataclasses import replace

        assert not witness_validate(replace(w, rec=w.rec[:1]), v.approx, v.bsa)
        assert not witness_validate(replace(w, rec=()), v.approx, v.bsa)
        bad_query = query_from([(p(x), True)], [(x, f(x))])
        assert not witness_validate(replace(w, query=bad_query), v.approx, v.bsa)
        assert not witness_validate(replace(w, initial_state=1), v.approx, v.bsa)
        assert not witness_validate(None, v.approx)

    def test_run_must_chain(self):
        v = check(PHI1)
        w = v.witness
        from dataclasses import replace

        assert not witness_validate(replace(w, rec=tuple(reversed(w.rec))), v.approx, v.bsa)


SMALL_FORMULAS = [
    "G [x <- f(x)] && G (p(x) -> X !p(x)) && G F p(x)",
    "G [x <- f(x)] && p(x) && G (p(x) -> X p(x)) && F !p(f(x))",
    "G ([x <- f(x)] || [x <- x]) && G F (p(x) && X !p(x))",
    "G ([x <- f(x)] || [y <- x]) && G F (p(x) && !p(y))",
    "[x <- y] && X (p(x) && !p(y))",
    "G [x <- x] && F p(x) && F !p(x)",
]


class TestAgainstBruteForce:
    @pytest.mark.parametrize("text", SMALL_FORMULAS)
    def test_sat_when_a_short_lasso_is_consistent(self, text):
        v = check(text, timeout=60)
        assert v.outcome in (SAT, UNSAT)
        if v.outcome == SAT:
            assert witness_validate(v.witness, v.approx, v.bsa)
        elif v.bsa is not None:
            assert not brute_force_sat(v.bsa, v.bsa.cells, 4)

    @settings(max_examples=15)
    @given(st.integers(0, 10_000), st.integers(3, 9))
    def test_random_formulas(self, seed, size):
        phi = gen.gen_random(gen.RandomSpec(seed, size))
        v = run_checker(phi, signature_of(phi), CheckerConfig(timeout=20))
        if v.outcome == SAT:
            assert witness_validate(v.witness, v.approx, v.bsa)
        elif v.outcome == UNSAT and not v.stats.get("structurally_empty"):
            assert not brute_force_sat(v.bsa, v.bsa.cells, 3)


class TestDeterminism:
    @pytest.mark.parametrize("text", [PHI1, PHI2, SMALL_FORMULAS[0]])
    def test_repeatable(self, text):
        a = check(text, deterministic=True)
        b = check(text, deterministic=True)
        mask = lambda s: {k: v for k, v in s.items() if k != "wall_ms"}
        assert (a.outcome, a.witness, a.exclusions, mask(a.stats)) == (b.outcome, b.witness, b.exclusions, mask(b.stats))


class TestExternalChecks:
    def test_smt_dump(self, tmp_path):
        v = check(PHI1, smt_dump=str(tmp_path))
        files = sorted(tmp_path.glob("*.smt2"))
        assert v.outcome == SAT and files
        assert files[-1].read_text().startswith("(set-logic QF_UF)")

    @pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not installed")
    def test_solver_cross_check(self):
        assert check(PHI1, solver="z3 -in", recheck_every=1).outcome == SAT
