from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tslsat import formula as fm
from tslsat import generators as gen
from tslsat.formula import conjuncts, show, signature_of, size
from tslsat.generators import (
    Assign,
    Dec,
    Goto,
    GotoIfEq,
    GotoProgram,
    GotoSyntaxError,
    IfEqConst,
    Inc,
    JumpIfEq,
    Label,
    RandomSpec,
    Reset,
)
from tslsat.parser import parse_formula
from tslsat.terms import app, cell, pred

TABLE = {
    "Chain": "SAT",
    "Filter": "UNSAT",
    "Gamemodechooser Ass.": "UNSAT",
    "Holding Arbiter": "SAT",
    "Small Holding Arbiter": "SAT",
    "P. T. Arbiter": "UNSAT",
    "Approx. P. T. Arbiter": "UNSAT",
    "Inductive Ass.": "UNSAT",
    "One Of Two": "UNSAT",
    "One Of Three": "UNSAT",
    "Injector": "UNSAT",
    "Invariant Holding": "UNSAT",
    "Scheduler": "UNSAT",
}


def _nodes(tree) -> int:
    return 1 if tree[0] == "ap" else 1 + sum(_nodes(c) for c in tree[1:])


class TestScalable:
    @pytest.mark.parametrize("n", range(0, 11))
    def test_sat_family_shape(self, n):
        phi = gen.gen_scal_sat(n)
        assert parse_formula(show(phi))[0] == phi
        preds = [c for c in conjuncts(phi) if isinstance(c, fm.Pred)]
        assert len(preds) == n + 1
        assert preds[-1] == fm.Pred(pred("p", _f_power(n)))

    @pytest.mark.parametrize("n", range(1, 6))
    def test_unsat_family_shape(self, n):
        phi = gen.gen_scal_unsat(n)
        assert parse_formula(show(phi))[0] == phi
        assert pred("q", _f_power(n)) in fm.predicates(phi)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            gen.gen_scal_sat(-1)
        with pytest.raises(ValueError):
            gen.gen_scal_unsat(0)


def _f_power(n):
    t = cell("x")
    for _ in range(n):
        t = app("f", t)
    return t


class TestRandom:
    @given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
    def test_size_and_pools(self, seed, size, cells, updates, preds):
        spec = RandomSpec(seed, size, cells, updates, preds)
        phi = gen.gen_random(spec)
        assert _nodes(gen._skeleton(random.Random(seed), size, 3)) == size
        sig = signature_of(phi)
        assert len(sig.cells) <= cells
        assert len(fm.updates(phi)) <= updates
        assert gen.gen_random(spec) == phi

    def test_batch_is_deterministic(self):
        a = gen.random_specs(3, sizes=(5, 10), per_size=4)
        assert a == gen.random_specs(3, sizes=(5, 10), per_size=4)
        assert [s.tree_size for s in a] == [5] * 4 + [10] * 4
        assert gen.random_batch(3, sizes=(5,), per_size=2) == [gen.gen_random(s) for s in a[:2]]

    def test_full_batch_size(self):
        assert len(gen.random_specs(0)) == 19 * 30

    @pytest.mark.parametrize("bad", [dict(tree_size=0), dict(cell_count=4), dict(predicate_count=0)])
    def test_spec_validation(self, bad):
        args = dict(seed=1, tree_size=3) | bad
        with pytest.raises(ValueError):
            RandomSpec(**args)

    def test_weights(self):
        assert gen.WEIGHTS == {"!": 1, "&&": 2, "||": 2, "X": 1, "U": 1, "F": 1, "G": 1}


class TestCorpus:
    def test_thirteen_entries_with_expected_verdicts(self):
        entries = gen.load_corpus()
        assert {e.name: e.expected for e in entries} == TABLE

    def test_filter_shape(self):
        e = next(e for e in gen.load_corpus() if e.name == "Filter")
        parts = conjuncts(e.formula)
        assert isinstance(parts[-1], fm.Not)
        assert len(parts) == 5

    def test_headers(self):
        e = gen.read_corpus_text("#!name: demo\n#!expect: sat\n#!tags: slow, big\np(x)\n")
        assert (e.name, e.expected, e.tags) == ("demo", "SAT", ("slow", "big"))

    @pytest.mark.parametrize("text", ["p(x)\n", "#!expect: maybe\np(x)\n", "#!expect: SAT\np(x) &&\n"])
    def test_bad_files(self, text):
        with pytest.raises(gen.CorpusError):
            gen.read_corpus_text(text)

    def test_directory_loader(self, tmp_path):
        (tmp_path / "b.tsl").write_text("#!expect: UNSAT\np(x) && !p(x)\n")
        (tmp_path / "a.tsl").write_text("#!expect: SAT\np(x)\n")
        (tmp_path / "notes.txt").write_text("ignored")
        assert [e.name for e in gen.load_corpus_dir(tmp_path)] == ["a", "b"]


class TestGoto:
    def test_run(self):
        # v1 := v0 + 1 by counting
        g = GotoProgram(2, (Inc(1), GotoIfEq(0, 0, 3), Inc(1)))
        assert g.terminal == 3
        assert run_goto_values(g, 5) == (5, 1)

    def test_validation(self):
        with pytest.raises(ValueError):
            GotoProgram(1, (Inc(1),))
        with pytest.raises(ValueError):
            GotoProgram(1, (GotoIfEq(0, 0, 5),))
        with pytest.raises(ValueError):
            GotoProgram(0, ())

    def test_fuel(self):
        loop = GotoProgram(1, (GotoIfEq(0, 0, 0),))
        assert gen.run_goto(loop, 0, fuel=50) is None

    def test_goto_gadget(self):
        g = gen.desugar_goto([Goto("end"), Inc(0), Label("end")])
        assert g.actions == (Reset(1), GotoIfEq(1, 1, 3), Inc(0))

    def test_empty_program(self):
        assert gen.desugar_goto([]) == GotoProgram(1, ())

    @pytest.mark.parametrize(
        "stmts",
        [
            [Assign(1, 0)],
            [Assign(1, 0, 3)],
            [Assign(1, 0, -2)],
            [Dec(0)],
            [Dec(0), Dec(0), Assign(2, 0, 1)],
            [IfEqConst(0, 2, "two"), Inc(1), Goto("end"), Label("two"), Inc(1), Inc(1), Label("end")],
            [Label("top"), IfEqConst(0, 0, "end"), Dec(0), Inc(1), Goto("top"), Label("end")],
            [JumpIfEq(0, 1, "end"), Assign(1, 0, 1), Label("end")],
        ],
    )
    def test_desugaring_preserves_semantics(self, stmts):
        g = gen.desugar_goto(stmts)
        assert all(isinstance(a, (Inc, Reset, GotoIfEq)) for a in g.actions)
        width = len(gen.run_classic(stmts, 0))
        for inp in range(6):
            assert gen.run_goto(g, inp)[:width] == gen.run_classic(stmts, inp)

    def test_undefined_label(self):
        with pytest.raises(ValueError):
            gen.desugar_goto([Goto("nowhere")])

    def test_duplicate_label(self):
        with pytest.raises(ValueError):
            gen.desugar_goto([Label("a"), Label("a")])

    def test_parse(self):
        g = gen.parse_goto("l0: INC v1\nl1: GOTOEQ v1 v0 l0   # loop\n")
        assert g.actions == (Inc(1), GotoIfEq(1, 0, 0))
        assert gen.parse_goto("") == GotoProgram(1, ())

    def test_parse_classic(self):
        g = gen.parse_goto("ASSIGN v1 v0 2\nDEC v1\nIFEQ v1 0 done\nHALT\ndone: RESET v0\n")
        for inp in range(4):
            out = gen.run_goto(g, inp)
            assert out[1] == inp + 1
            assert out[0] == inp

    @pytest.mark.parametrize(
        "text", ["FOO v1", "INC", "INC x1", "GOTOEQ v1 v2", "GOTO nowhere", "ASSIGN v1", "a: INC v0\na: INC v0"]
    )
    def test_parse_errors(self, text):
        with pytest.raises(GotoSyntaxError):
            gen.parse_goto(text)


def run_goto_values(g, inp):
    return gen.run_goto(g, inp)


class TestEncodings:
    def test_num_tu(self):
        phi = gen.encode_num_tu()
        first, second = phi.left, phi.right
        assert conjuncts(first)[0] == fm.Update(cell("e"), app("z"))
        assert conjuncts(second)[:2] == [fm.Update(cell("x"), app("z")), fm.Update(cell("b"), app("z"))]
        assert sorted(signature_of(phi).cells) == ["b", "e", "x"]
        assert pred("eq", cell("x"), cell("b")) in fm.predicates(phi)

    def test_enc_te(self):
        phi = gen.encode_enc_te()
        sig = signature_of(phi)
        assert sig.cells == ["e"]
        assert sig.functions == {"z": 0, "f": 1, "g": 1}
        assert sig.predicates == {"eq": 2}
        e = cell("e")
        assert "!eq(f(e), z())" in show(phi)
        assert pred("eq", e, app("g", app("f", e))) in fm.predicates(phi)

    @given(st.lists(st.sampled_from(["INC v0", "RESET v1", "GOTOEQ v0 v1 l0", "INC v1"]), min_size=1, max_size=6))
    def test_goto_parts(self, lines):
        g = gen.parse_goto("\n".join(f"l{k}: {s}" for k, s in enumerate(lines)))
        distinct, simulate, restart, init, halts = gen.encode_goto_parts(g)
        m = g.terminal
        assert init == fm.And(fm.Update(cell("i"), app("z")), fm.Update(cell("l"), app(f"l{m}")))
        assert halts == fm.Globally(fm.Eventually(fm.Pred(pred(f"p{m}", cell("l")))))
        assert {p.head for p in fm.predicates(distinct)} == {f"p{k}" for k in range(m + 1)}
        assert {a.head for p in fm.predicates(distinct) for a in p.args} == {f"l{k}" for k in range(m + 1)}
        text = show(gen.encode_goto(g))
        assert text.count(show(init)) == 1
        assert text.count(show(halts)) == 1
        sim = show(simulate)
        for k in range(m):
            assert sim.count(f"(p{k}(l) -> ") == 1
        assert f"(p{m}(l) -> " not in sim
        assert f"(p{m}(l) -> " in show(restart)

    def test_theories(self):
        g = gen.parse_goto("INC v0\n")
        assert gen.encode_goto(g, gen.TU).left == gen.encode_num_tu()
        assert gen.encode_goto(g, gen.TE).left == gen.encode_enc_te()
        with pytest.raises(ValueError):
            gen.encode_goto(g, "nat")

    def test_encodings_parse_back(self):
        g = gen.parse_goto("l0: INC v1\nl1: GOTOEQ v1 v0 l0\n")
        for theory in (gen.TU, gen.TE):
            phi = gen.encode_goto(g, theory)
            assert parse_formula(show(phi))[0] == phi
            assert size(phi) > 0

