"""Command-line front end: ``umt <check|plan|run|verify> ...``.

Exit codes::

    0  success
    1  parse or validation error
    2  interference rejection
    3  runtime error
    4  assumption failure
    5  post-verification failure
"""

import argparse
import sys
from pathlib import Path

from .engine import run, verify_cons
from .errors import ExecutionError, PlanningError, UmtError
from .metamodel import merge, parse_metamodel, validate
from .model import ModelState, parse_model, serialize_model
from .planner import derive_plan
from .spec import check_assumptions, parse_spec

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTERFERENCE = 2
EXIT_RUNTIME = 3
EXIT_ASSUMPTION = 4
EXIT_VERIFY = 5


class _Exit(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code


def build_parser():
    p = argparse.ArgumentParser(prog="umt", description="Run declarative model transformations.")
    p.add_argument("command", choices=["check", "plan", "run", "verify"])
    p.add_argument("-m", "--metamodel", action="append", required=True,
                   help="metamodel file (give twice for source and target)")
    p.add_argument("-s", "--spec", required=True, help="transformation specification")
    p.add_argument("-i", "--input", help="input model (empty model when omitted)")
    p.add_argument("-o", "--output", help="output model path, or - for standard output")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--force", action="store_true",
                   help="run even when assumptions fail or a phase is rejected")
    p.add_argument("--verify", action="store_true", help="verify the constraints after run")
    return p


def _read(path, what):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Exit(EXIT_INVALID, f"cannot read {what} {path}: {exc.strerror}") from None


def _load(args, err):
    if len(args.metamodel) > 2:
        raise _Exit(EXIT_INVALID, "at most two metamodels may be given")
    mms = []
    for path in args.metamodel:
        try:
            mms.append(parse_metamodel(_read(path, "metamodel")))
        except UmtError as exc:
            raise _Exit(EXIT_INVALID, f"{path}: {exc}") from None
    bad = False
    for i, mm in enumerate(mms):
        for d in validate(mm, mms[:i] + mms[i + 1:]):
            print(f"{args.metamodel[i]}: {d}", file=err)
            bad = True
    if bad:
        raise _Exit(EXIT_INVALID)
    try:
        mm = merge(mms) if len(mms) > 1 else mms[0]
        spec = parse_spec(_read(args.spec, "spec"), mm)
    except UmtError as exc:
        raise _Exit(EXIT_INVALID, f"{args.spec}: {exc}") from None
    raw = {}
    for item in args.param:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise _Exit(EXIT_INVALID, f"--param expects NAME=VALUE, got {item!r}")
        raw[name] = value
    try:
        params = spec.coerce_params(raw)
    except UmtError as exc:
        raise _Exit(EXIT_INVALID, str(exc)) from None
    return mm, spec, params


def _load_model(path, mm, what="input model"):
    if path is None:
        return ModelState(mm)
    try:
        state = parse_model(_read(path, what), mm)
    except UmtError as exc:
        raise _Exit(EXIT_INVALID, f"{path}: {exc}") from None
    problems = state.validate()
    if problems:
        raise _Exit(EXIT_INVALID, f"{path}: " + "; ".join(problems))
    return state


def _assumptions(spec, state, params, out):
    ok = True
    for verdict in check_assumptions(spec, state, params):
        print(verdict, file=out)
        ok = ok and verdict.ok
    return ok


def _plan(spec):
    try:
        return derive_plan(spec)
    except PlanningError as exc:
        raise _Exit(EXIT_INVALID, str(exc)) from None


def _report_rejections(plan, err):
    for p in plan.phases:
        if not p.verdict.ok:
            print(f"{p.label}: {p.verdict}", file=err)


def _cmd_check(args, out, err):
    mm, spec, params = _load(args, err)
    state = _load_model(args.input, mm)
    if not _assumptions(spec, state, params, err):
        return EXIT_ASSUMPTION
    print(f"{spec.name}: {len(spec.assumptions)} assumption(s), "
          f"{len(spec.constraints)} constraint(s) ok", file=err)
    return EXIT_OK


def _cmd_plan(args, out, err):
    _, spec, _ = _load(args, err)
    plan = _plan(spec)
    out.write(plan.format())
    if not plan.ok:
        _report_rejections(plan, err)
        return EXIT_INTERFERENCE
    return EXIT_OK


def _cmd_run(args, out, err):
    if not args.output:
        raise _Exit(EXIT_INVALID, "run needs -o <path> or -o -")
    mm, spec, params = _load(args, err)
    state = _load_model(args.input, mm)
    plan = _plan(spec)
    if not plan.ok and not args.force:
        _report_rejections(plan, err)
        return EXIT_INTERFERENCE
    if not _assumptions(spec, state, params, err) and not args.force:
        return EXIT_ASSUMPTION
    try:
        result = run(plan, state, params, force=args.force)
    except ExecutionError as exc:
        raise _Exit(EXIT_RUNTIME, f"run failed: {exc}") from None
    text = serialize_model(result.final_state)
    if args.output == "-":
        out.write(text)
    else:
        Path(args.output).write_text(text)
    if args.verify:
        verdicts = verify_cons(spec, result.final_state, result.pre_state, params)
        return _report_verdicts(verdicts, err)
    return EXIT_OK


def _cmd_verify(args, out, err):
    if not args.output:
        raise _Exit(EXIT_INVALID, "verify needs the output model via -o <path>")
    mm, spec, params = _load(args, err)
    pre = _load_model(args.input, mm)
    post = _load_model(args.output, mm, "output model")
    pre.frozen = True
    return _report_verdicts(verify_cons(spec, post, pre, params), err)


def _report_verdicts(verdicts, err):
    ok = True
    for v in verdicts:
        print(v, file=err)
        ok = ok and v.ok
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"check": _cmd_check, "plan": _cmd_plan, "run": _cmd_run, "verify": _cmd_verify}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args, out, err)
    except _Exit as exc:
        if str(exc):
            print(f"umt: {exc}", file=err)
        return exc.code
    except UmtError as exc:
        print(f"umt: {exc}", file=err)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
