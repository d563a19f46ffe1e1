"""Command-line front end: ``tslsat check | gen | encode-goto | bench``."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import generators as gen
from .automata import HoaError, LetterCapExceeded, parse_hoa
from .automata.bsa import DEFAULT_LETTER_CAP
from .engine import SAT, UNKNOWN, UNSAT, CheckerConfig, Verdict, approximation_for, check_validity, run_checker
from .formula import show
from .ltl import FINITARY, GENERAL
from .parser import ParseError, parse_formula
from .terms import SignatureError

EXIT_CODES = {SAT: 0, UNSAT: 1, UNKNOWN: 2, "NOT_VALID": 0, "VALID": 1}
EXIT_INPUT_ERROR = 3


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = FINITARY
    timeout: float = 300.0
    deterministic: bool = False
    workers: int = 1
    letter_cap: int = DEFAULT_LETTER_CAP
    block_budget: int = 5_000_000
    json: bool = False
    nba_from: str | None = None
    solver: str | None = None
    smt_dump: str | None = None
    validity: bool = False

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.workers not in (1, 2):
            raise ValueError("workers must be 1 or 2")

    def checker_config(self, **extra: Any) -> CheckerConfig:
        return CheckerConfig(
            mode=self.mode,
            timeout=self.timeout,
            workers=self.workers,
            deterministic=self.deterministic,
            letter_cap=self.letter_cap,
            block_budget=self.block_budget,
            solver=self.solver,
            smt_dump=self.smt_dump,
            **extra,
        )


# ---------------------------------------------------------------------------
# reports


def _transition_line(t) -> str:
    return f"  {t}"


def verdict_dict(v: Verdict) -> dict[str, Any]:
    out: dict[str, Any] = {"outcome": v.outcome, "reason": v.reason}
    w = v.witness
    if w is not None:
        out["witness"] = {
            "initial_state": w.initial_state,
            "pref": [str(t) for t in w.pref],
            "rec": [str(t) for t in w.rec],
            "query": str(w.query),
        }
        out["model"] = {
            "classes": [[str(t) for t in cls] for cls in w.classes],
            "predicates": {str(t): val for t, val in w.polarities},
        }
    stats = dict(v.stats)
    out["stats"] = stats
    return out


def render_text(v: Verdict) -> str:
    lines = [v.headline]
    w = v.witness
    if w is not None:
        lines.append(f"query: {w.query}")
        lines.append("pref:")
        lines += [_transition_line(t) for t in w.pref]
        lines.append("rec:")
        lines += [_transition_line(t) for t in w.rec]
        lines.append("model:")
        for cls in w.classes:
            lines.append("  {" + ", ".join(str(t) for t in cls) + "}")
        for t, val in w.polarities:
            mark = "?" if val is None else ("T" if val else "F")
            lines.append(f"  {t} = {mark}")
    return "\n".join(lines) + "\n"


def render_json(d: dict[str, Any]) -> str:
    return json.dumps(d, sort_keys=True, ensure_ascii=False)


# ---------------------------------------------------------------------------
# check


def _read_source(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None


def _parse(text: str, origin: str):
    if not text.strip():
        raise InputError(f"{origin}: empty input")
    try:
        return parse_formula(text)
    except ParseError as e:
        raise InputError(f"{origin}: {e}") from None
    except SignatureError as e:
        raise InputError(f"{origin}: {e}") from None


def cmd_check(path: str | None, rc: RunConfig, out=None) -> int:
    out = out or sys.stdout
    phi, sig = _parse(_read_source(path), path or "<stdin>")
    extra: dict[str, Any] = {}
    digest = None
    if rc.nba_from:
        raw = _read_source(rc.nba_from)
        digest = hashlib.sha256(raw.encode("utf-8")).hexdigest()
        approx = approximation_for(phi, sig, rc.mode)
        universe = {str(ap): ap for ap in approx.aps}
        try:
            extra["nba"] = parse_hoa(raw, universe)
        except HoaError as e:
            raise InputError(f"{rc.nba_from}: {e}") from None
    cfg = rc.checker_config(**extra)
    try:
        v = check_validity(phi, sig, cfg) if rc.validity else run_checker(phi, sig, cfg)
    except LetterCapExceeded as e:
        v = Verdict(UNKNOWN, "cap", stats={"cap": str(e)})
    if rc.json:
        d = verdict_dict(v)
        if digest:
            d["nba_sha256"] = digest
        out.write(render_json(d) + "\n")
    else:
        text = render_text(v)
        if digest:
            text += f"nba-sha256: {digest}\n"
        out.write(text)
    return EXIT_CODES[v.outcome]


# ---------------------------------------------------------------------------
# gen and encode-goto


def cmd_gen(args: argparse.Namespace, out=None) -> int:
    out = out or sys.stdout
    match args.family:
        case "scal-sat":
            phi = gen.gen_scal_sat(args.n)
        case "scal-unsat":
            if args.n < 1:
                raise InputError("scal-unsat needs n >= 1")
            phi = gen.gen_scal_unsat(args.n)
        case "random":
            seed = args.seed if args.seed is not None else int(os.environ.get("TSLSAT_SEED", "0"))
            phi = gen.gen_random(gen.RandomSpec(seed, args.size, args.cells, args.updates, args.predicates))
        case _:
            raise InputError(f"unknown family {args.family}")
    out.write(show(phi) + "\n")
    return 0


def cmd_encode_goto(path: str | None, theory: str, out=None) -> int:
    out = out or sys.stdout
    text = _read_source(path)
    try:
        program = gen.parse_goto(text)
    except gen.GotoSyntaxError as e:
        raise InputError(f"{path or '<stdin>'}: {e}") from None
    except ValueError as e:
        raise InputError(f"{path or '<stdin>'}: {e}") from None
    out.write(show(gen.encode_goto(program, theory)) + "\n")
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(directory: str | None, rc: RunConfig, strict: bool = False, skip_tags=(), out=None) -> int:
    out = out or sys.stdout
    try:
        entries = gen.load_corpus_dir(directory) if directory else gen.load_corpus()
    except (gen.CorpusError, ParseError, SignatureError) as e:
        raise InputError(str(e)) from None
    if not entries:
        raise InputError(f"no corpus files in {directory}")
    mismatches = soft = 0
    if not rc.json:
        out.write(f"{'name':28} {'expected':8} {'got':16} {'time':>9}\n")
    for e in entries:
        if set(e.tags) & set(skip_tags):
            continue
        t0 = time.monotonic()
        try:
            v = run_checker(e.formula, e.signature, rc.checker_config())
            got = v.headline
            outcome = v.outcome
        except LetterCapExceeded:
            got, outcome = "UNKNOWN(cap)", UNKNOWN
        secs = time.monotonic() - t0
        if outcome == UNKNOWN:
            status = "fail" if strict else "soft"
            soft += 1
        elif outcome == e.expected:
            status = "ok"
        else:
            status = "fail"
        if status == "fail":
            mismatches += 1
        if rc.json:
            row = {"name": e.name, "expected": e.expected, "got": got, "status": status,
                   "stats": {"wall_ms": round(secs * 1000, 3)}}
            out.write(render_json(row) + "\n")
        else:
            out.write(f"{e.name:28} {e.expected:8} {got:16} {secs:8.2f}s {status}\n")
    if not rc.json:
        out.write(f"{mismatches} mismatches, {soft} unknown\n")
    return 1 if mismatches else 0


# ---------------------------------------------------------------------------
# argument parsing


def _positive_float(s: str) -> float:
    x = float(s)
    if x <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=(FINITARY, GENERAL), default=FINITARY)
    p.add_argument("--timeout", type=_positive_float, default=300.0, help="seconds per formula")
    p.add_argument("--workers", type=int, choices=(1, 2), default=1)
    p.add_argument("--deterministic", action="store_true", help="interleave the two searches in one thread")
    p.add_argument("--json", action="store_true")
    p.add_argument("--letter-cap", type=int, default=DEFAULT_LETTER_CAP)
    p.add_argument("--block-budget", type=int, default=5_000_000)
    p.add_argument("--solver", help="external SMT-LIB solver command used to cross-check queries")
    p.add_argument("--smt-dump", metavar="DIR", help="write every congruence query as an .smt2 file")


def _run_config(a: argparse.Namespace) -> RunConfig:
    return RunConfig(
        mode=a.mode,
        timeout=a.timeout,
        deterministic=a.deterministic,
        workers=a.workers,
        letter_cap=a.letter_cap,
        block_budget=a.block_budget,
        json=a.json,
        nba_from=getattr(a, "nba_from", None),
        solver=a.solver,
        smt_dump=a.smt_dump,
        validity=getattr(a, "validity", False),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tslsat", description="TSL satisfiability modulo uninterpreted functions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check one formula (file or stdin)")
    p.add_argument("file", nargs="?")
    _run_options(p)
    p.add_argument("--nba-from", metavar="HOA", help="use this automaton instead of translating the formula")
    p.add_argument("--validity", action="store_true", help="check validity instead of satisfiability")

    p = sub.add_parser("gen", help="print a generated benchmark formula")
    p.add_argument("family", choices=("scal-sat", "scal-unsat", "random"))
    p.add_argument("n", type=int, nargs="?", default=0)
    p.add_argument("--seed", type=int, default=None, help="defaults to $TSLSAT_SEED or 0")
    p.add_argument("--size", type=int, default=20)
    p.add_argument("--cells", type=int, default=1)
    p.add_argument("--updates", type=int, default=1)
    p.add_argument("--predicates", type=int, default=1)

    p = sub.add_parser("encode-goto", help="encode a GOTO program as a formula")
    p.add_argument("file", nargs="?")
    p.add_argument("--theory", choices=(gen.TU, gen.TE), default=gen.TU)

    p = sub.add_parser("bench", help="run a corpus directory (default: the bundled corpus)")
    p.add_argument("dir", nargs="?")
    _run_options(p)
    p.add_argument("--strict", action="store_true", help="count UNKNOWN as a failure")
    p.add_argument("--skip-tag", action="append", default=[], help="skip entries with this tag")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        match args.command:
            case "check":
                return cmd_check(args.file, _run_config(args))
            case "gen":
                return cmd_gen(args)
            case "encode-goto":
                return cmd_encode_goto(args.file, args.theory)
            case "bench":
                return cmd_bench(args.dir, _run_config(args), args.strict, tuple(args.skip_tag))
    except InputError as e:
        print(f"tslsat: error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValueError as e:
        print(f"tslsat: error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
