"""Command line entry point.

Exit codes: 0 success, Sat or Secret; 1 Unsat, Leak or Reachable; 2 Unknown
or budget exhausted; 64 usage error; 65 input error.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Callable, Dict, List, Optional, Sequence

from .apds import REACHABLE, UNREACHABLE, Apds, ApdsError, apds_reach_fixpoint, apds_to_horn, apds_to_protocol
from .classify import ClassError, preprocess_onevar, tags
from .onevar import decompose
from .protocol import LEAK, ProtocolError, check_secrecy, read_protocol
from .saturation.log import SAT, UNKNOWN, UNSAT, Budget, BudgetExceeded, Result
from .syntax import ParseError, format_clauses, parse_atom, parse_term, read_clause_file
from .terms import Clause

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 64, 65
PROCEDURES = ("auto", "onevar", "flat", "c", "c-horn", "oracle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _budget(args) -> Budget:
    return Budget(seconds=args.budget)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _print_trace(res: Optional[Result]) -> None:
    if res is not None:
        for line in res.trace():
            print(line)


def cmd_classify(args) -> int:
    cf = read_clause_file(args.file)
    for c in cf.clauses:
        print(f"{','.join(sorted(tags(c)))}\t{c}")
    if args.preprocess:
        branches = preprocess_onevar(cf.clauses)
        parts = []
        for i, b in enumerate(branches, 1):
            parts.append(f"# branch {i} of {len(branches)}\n" + format_clauses(b))
        _emit("".join(parts), args.emit)
    return EXIT_OK


def cmd_decompose(args) -> int:
    t = parse_term(args.term)
    if t.ground or len(t.vars) != 1:
        raise ClassError(f"{t} is not a non-ground one-variable term")
    for p in decompose(t):
        print(p)
    return EXIT_OK


def _decide(S: List[Clause], procedure: str, budget: Budget, trace: bool, depth: int) -> Result:
    from .saturation.combined import decide_c, decide_c_horn
    from .saturation.flat import decide_flat
    from .saturation.onevar_proc import decide_onevar_all
    from .saturation.oracle import ground_saturation_oracle

    if procedure == "auto":
        procedure = "c-horn" if all(c.is_horn() for c in S) else "c"
    if procedure == "oracle":
        return Result(ground_saturation_oracle(S, depth))
    run: Dict[str, Callable[..., Result]] = {
        "onevar": decide_onevar_all, "flat": decide_flat, "c": decide_c, "c-horn": decide_c_horn,
    }
    return run[procedure](S, budget=budget, trace=trace)


def _verdict_code(v: str) -> int:
    return {SAT: EXIT_OK, UNSAT: EXIT_NO}.get(v, EXIT_UNKNOWN)


def cmd_sat(args) -> int:
    S = read_clause_file(args.file).clauses
    res = _decide(S, args.procedure, _budget(args), args.trace, args.depth)
    print(res.verdict)
    if args.trace:
        _print_trace(res)
    return _verdict_code(res.verdict)


def cmd_secrecy(args) -> int:
    spec = read_protocol(args.file)
    secrets = [parse_term(args.secret)] if args.secret else spec.secrets
    if not secrets:
        raise UsageError("no secret given and none declared in the file")
    code = EXIT_OK
    for s in secrets:
        r = check_secrecy(spec, s, budget=_budget(args), trace=args.trace, procedure=args.procedure)
        print(f"{r.verdict} {s}")
        if args.trace:
            _print_trace(r.result)
        if r.verdict == LEAK:
            code = EXIT_NO
    return code


def cmd_apds(args) -> int:
    a = Apds(read_clause_file(args.file).clauses)
    goal = parse_atom(args.goal)
    if args.via == "fixpoint":
        v = apds_reach_fixpoint(a, goal, args.depth)
    elif args.via == "horn":
        from .saturation.combined import decide_c_horn

        res = decide_c_horn(apds_to_horn(a, goal), budget=_budget(args))
        v = REACHABLE if res.verdict == UNSAT else UNREACHABLE
    else:
        spec, secret = apds_to_protocol(a, goal)
        v = REACHABLE if check_secrecy(spec, secret, budget=_budget(args)).leaked else UNREACHABLE
    print(v)
    return {REACHABLE: EXIT_NO, UNREACHABLE: EXIT_OK}.get(v, EXIT_UNKNOWN)


def cmd_normalize(args) -> int:
    from .normalizer import normalize

    n = normalize(read_clause_file(args.file).clauses, budget=_budget(args), state_cap=args.state_cap)
    _emit(n.format(), args.emit)
    return EXIT_OK


def cmd_generate(args) -> int:
    from .generators import GenConfig, random_apds, random_instance

    rng = random.Random(args.seed)
    for i in range(args.count):
        if args.kind == "apds":
            S = random_apds(rng)
        else:
            kind = "mixed" if args.kind == "horn" else args.kind
            S = random_instance(rng, GenConfig(horn=args.kind == "horn"), kind)
        print(f"# instance {i + 1}")
        sys.stdout.write(format_clauses(S))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="blindcopy", description="Decision procedures for flat and one-variable clauses.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(q, budget=True, trace=False):
        if budget:
            q.add_argument("--budget", type=float, default=None, metavar="SECONDS", help="time limit")
        if trace:
            q.add_argument("--trace", action="store_true", help="print the derivation log")

    q = sub.add_parser("classify", help="tag each clause")
    q.add_argument("file")
    q.add_argument("--preprocess", action="store_true", help="also print the preprocessed branches")
    q.add_argument("--emit", metavar="OUT", help="write the preprocessed branches to OUT")
    q.set_defaults(run=cmd_classify)

    q = sub.add_parser("decompose", help="split a one-variable term into its parts")
    q.add_argument("term")
    q.set_defaults(run=cmd_decompose)

    q = sub.add_parser("sat", help="decide satisfiability of a clause file")
    q.add_argument("file")
    q.add_argument("--procedure", choices=PROCEDURES, default="auto")
    q.add_argument("--depth", type=int, default=3, help="term depth for the oracle")
    common(q, trace=True)
    q.set_defaults(run=cmd_sat)

    q = sub.add_parser("secrecy", help="check the declared secrets of a protocol")
    q.add_argument("file")
    q.add_argument("--secret", help="check this message instead of the declared ones")
    q.add_argument("--procedure", choices=("c-horn", "normalize"), default="c-horn")
    common(q, trace=True)
    q.set_defaults(run=cmd_secrecy)

    q = sub.add_parser("apds", help="reachability in an alternating pushdown system")
    q.add_argument("file")
    q.add_argument("--goal", required=True, help="ground atom, e.g. 'P(s(a))'")
    q.add_argument("--depth", type=int, default=8, help="term depth for the fixpoint")
    q.add_argument("--via", choices=("horn", "protocol", "fixpoint"), default="horn")
    common(q)
    q.set_defaults(run=cmd_apds)

    q = sub.add_parser("normalize", help="normalize definite clauses into an automaton")
    q.add_argument("file")
    q.add_argument("--emit", metavar="OUT", help="write the normal clauses to OUT")
    q.add_argument("--state-cap", type=int, default=1 << 12)
    common(q)
    q.set_defaults(run=cmd_normalize)

    q = sub.add_parser("generate", help="print seeded random instances")
    q.add_argument("kind", choices=("mixed", "flat", "onevar", "horn", "apds"))
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--count", type=int, default=1)
    q.set_defaults(run=cmd_generate)
    return p


def _positive(args) -> None:
    for name in ("budget", "depth", "state_cap", "count"):
        v = getattr(args, name, None)
        if v is not None and v <= 0 and not (name == "depth" and v == 0):
            raise UsageError(f"--{name.replace('_', '-')} must be positive")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _positive(args)
        return args.run(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e.strerror or e}: {getattr(e, 'filename', '')}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ClassError, ProtocolError, ApdsError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as e:
        print(UNKNOWN)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
