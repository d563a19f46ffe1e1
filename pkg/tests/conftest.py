from __future__ import annotations

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tslsat import formula as fm
from tslsat.terms import app, cell, pred

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CELLS = ("x", "y")


def terms(max_leaves: int = 6):
    base = st.sampled_from([cell("x"), cell("y"), app("c")])
    return st.recursive(
        base,
        lambda sub: st.one_of(
            st.builds(lambda a: app("f", a), sub),
            st.builds(lambda a, b: app("g", a, b), sub, sub),
        ),
        max_leaves=max_leaves,
    )


def predicate_terms():
    return st.one_of(
        st.builds(lambda a: pred("p", a), terms(3)),
        st.builds(lambda a, b: pred("q", a, b), terms(2), terms(2)),
    )


def formulas(max_leaves: int = 8):
    atom = st.one_of(
        st.just(fm.TRUE),
        st.builds(fm.Pred, predicate_terms()),
        st.builds(fm.Update, st.sampled_from([cell(c) for c in CELLS]), terms(3)),
    )
    return st.recursive(
        atom,
        lambda sub: st.one_of(
            st.builds(fm.Not, sub),
            st.builds(fm.Next, sub),
            st.builds(fm.And, sub, sub),
            st.builds(fm.Until, sub, sub),
            st.builds(fm.Or, sub, sub),
            st.builds(fm.Globally, sub),
            st.builds(fm.Eventually, sub),
        ),
        max_leaves=max_leaves,
    )


# acceptance report: one line per criterion, printed after the run
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}
ACCEPTANCE_TITLES: dict[int, str] = {}


def record(criterion: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_TITLES[criterion] = title
    ACCEPTANCE.setdefault(criterion, []).append((ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[k]
        ok = all(r for r, _ in rows)
        notes = "; ".join(d for r, d in rows if d and (not r or len(rows) == 1))
        line = f"[{'PASS' if ok else 'FAIL'}] {k}. {ACCEPTANCE_TITLES[k]}"
        terminalreporter.write_line(line + (f" ({notes})" if notes else ""))
