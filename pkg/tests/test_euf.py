from __future__ import annotations

import shutil
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import terms
from tslsat.euf import (
    BOT,
    TOP,
    CongruenceStore,
    EufQuery,
    EufResult,
    QueryBudgetExceeded,
    check_query,
    check_query_external,
    export_smtlib,
    naive_closure_oracle,
    query_from,
    run_external_solver,
)
from tslsat.terms import app, cell, pred, star

x, y = cell("x"), cell("y")
f = lambda t: app("f", t)
p = lambda t: pred("p", t)

SAT, UNSAT = EufResult.SAT, EufResult.UNSAT


def queries():
    lits = st.lists(st.tuples(st.builds(p, terms(3)), st.booleans()), max_size=4)
    eqs = st.lists(st.tuples(terms(3), terms(3)), max_size=3)
    return st.builds(query_from, lits, eqs)


class TestCheckQuery:
    def test_worked_example_is_sat(self):
        q = query_from([(p(x), True), (p(f(x)), False)], [(x, f(f(x)))])
        assert check_query(q) is SAT

    def test_congruence_forces_conflict(self):
        q = query_from([(p(x), True), (p(f(x)), False)], [(x, f(x))])
        assert check_query(q) is UNSAT

    def test_deep_congruence(self):
        # f^3(x) = x and f^5(x) = x give f(x) = x
        fx = x
        powers = [x]
        for _ in range(5):
            fx = f(fx)
            powers.append(fx)
        q = query_from([(p(x), True), (p(f(x)), False)], [(powers[3], x), (powers[5], x)])
        assert check_query(q) is UNSAT

    def test_same_literal_both_ways(self):
        assert check_query(query_from([(p(x), True), (p(x), False)])) is UNSAT

    def test_empty_query(self):
        assert check_query(EufQuery()) is SAT
        assert str(EufQuery()) == "true"

    def test_validation(self):
        with pytest.raises(ValueError):
            EufQuery(frozenset({(x, True)}))
        with pytest.raises(ValueError):
            EufQuery(equalities=((x, star()),))

    def test_budget(self):
        q = query_from([(p(f(f(f(x)))), True)])
        with pytest.raises(QueryBudgetExceeded):
            check_query(q, term_budget=4)

    @given(queries())
    def test_matches_oracle(self, q):
        assert check_query(q) is naive_closure_oracle(q)

    @given(queries())
    def test_literal_order_irrelevant(self, q):
        rev = EufQuery(q.signed_predicates, tuple(reversed(q.equalities)))
        assert check_query(rev) is check_query(q)

    @given(queries(), st.tuples(terms(3), terms(3)))
    def test_adding_equalities_is_monotone(self, q, eq):
        more = EufQuery(q.signed_predicates, q.equalities + (eq,))
        if check_query(more) is SAT:
            assert check_query(q) is SAT


class TestStore:
    def test_push_pop_restores(self):
        s = CongruenceStore()
        s.assert_literal(p(x), True)
        s.push()
        s.merge(x, f(x))
        s.assert_literal(p(f(x)), False)
        assert not s.consistent()
        s.pop()
        assert s.consistent()
        assert not s.equal(x, f(x))

    def test_classes_and_polarities(self):
        s = CongruenceStore()
        s.assert_literal(p(x), True)
        s.merge(x, f(f(x)))
        assert [x, f(f(x))] in s.classes()
        assert (p(x), True) in s.polarities()
        assert all(TOP not in c and BOT not in c for c in s.classes())

    @given(queries(), queries())
    def test_incremental_equals_fresh(self, q1, q2):
        s = CongruenceStore()
        for t, v in q1.sorted_literals():
            s.assert_literal(t, v)
        s.push()
        for t, v in q2.sorted_literals():
            s.assert_literal(t, v)
        for a, b in q2.equalities:
            s.merge(a, b)
        s.pop()
        for a, b in q1.equalities:
            s.merge(a, b)
        assert (s.consistent()) == (check_query(q1) is SAT)


class TestOracle:
    def test_universe_limit(self):
        t = x
        for _ in range(600):
            t = f(t)
        with pytest.raises(ValueError):
            naive_closure_oracle(query_from([(p(t), True)]))


class TestSmtLib:
    def test_script_shape(self):
        q = query_from([(p(x), True), (p(f(x)), False)], [(x, f(f(x)))])
        script = export_smtlib(q)
        assert script.startswith("(set-logic QF_UF)\n(declare-sort U 0)\n")
        assert "(declare-fun f_f (U) U)" in script
        assert "(declare-fun p_p (U) Bool)" in script
        assert "(assert (not (p_p (f_f c_x))))" in script
        assert "(assert (= c_x (f_f (f_f c_x))))" in script
        assert script.rstrip().endswith("(check-sat)")

    def test_names_are_sanitized(self):
        q = query_from([(pred("ok_1", app("g'", cell("a_b"))), True)])
        script = export_smtlib(q)
        assert "p_ok__1" in script and "f_g_x27_" in script and "c_a__b" in script

    def test_constants(self):
        assert "(declare-fun f_z () U)" in export_smtlib(query_from([(p(app("z")), True)]))

    def test_external_solver_protocol(self, tmp_path):
        fake = tmp_path / "solver.py"
        fake.write_text("import sys\ntext = sys.stdin.read()\nprint('unsat' if 'not' in text else 'sat')\n")
        cmd = f"{sys.executable} {fake}"
        assert check_query_external(query_from([(p(x), True)]), cmd) is SAT
        assert check_query_external(query_from([(p(x), False)]), cmd) is UNSAT
        silent = tmp_path / "silent.py"
        silent.write_text("print('hello')\n")
        with pytest.raises(RuntimeError):
            run_external_solver("(check-sat)", f"{sys.executable} {silent}")


Z3 = shutil.which("z3")


@pytest.mark.skipif(Z3 is None, reason="z3 not installed")
class TestAgainstZ3:
    @settings(max_examples=30)
    @given(queries())
    def test_agrees(self, q):
        assert check_query_external(q, f"{Z3} -in") is check_query(q)
