"""Command-line front end.

Exit codes: 0 success, 1 computational guard exceeded, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from ccbell import bell, classical_cc, correlations, problems, protocol_sim, quantum

EXIT_OK, EXIT_GUARD, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _builtin(name: str):
    """``(problem, protocol)`` for a built-in name."""
    if name == "rac":
        return problems.rac21(), quantum.rac_quantum_protocol()
    if name.startswith("index") and name[5:].isdigit():
        bits = int(name[5:])
        if not 1 <= bits <= 6:
            raise InputError("index problems are limited to 1..6 bits")
        return problems.index_problem(bits), quantum.index_quantum_protocol(bits)
    raise InputError(f"unknown built-in {name!r} (choose rac or indexN)")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _load_problem(args):
    if getattr(args, "problem", None):
        return problems.from_json(_read(args.problem))
    if getattr(args, "input", None) and args.command == "cc":
        return problems.from_json(_read(args.input))
    if args.builtin:
        return _builtin(args.builtin)[0]
    raise InputError("no problem given (use --input/--problem or --builtin)")


def _parse_state(spec: str, d: int) -> quantum.QState:
    kind, _, arg = spec.partition(":")
    try:
        if kind == "phi":
            return quantum.phi_plus(d)
        if kind in ("werner", "iso", "isotropic"):
            p = float(arg)
            if kind == "werner" and d != 2:
                raise InputError("werner states are two-qubit; use iso:p for other dimensions")
            return quantum.isotropic(d, p)
    except ValueError as exc:
        raise InputError(f"bad state {spec!r}: {exc}") from None
    raise InputError(f"unknown state {spec!r} (phi, werner:p, iso:p)")


def _parse_grid(text):
    if text is None:
        return None
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad delta grid {text!r}") from None
    if not grid or any(not 0 < d < 1 for d in grid):
        raise InputError("delta grid values must lie in (0, 1)")
    return grid


def _family(args, family="VSP") -> bell.AsymptoticFamily:
    try:
        return bell.AsymptoticFamily(family=family, c=args.const_c, c_prime=args.const_cp,
                                     c_dprime=args.const_cpp, alpha=args.alpha)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _fmt(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return "" if v is None else str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _emit(args, header, rows, document):
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        text = buf.getvalue()
    else:
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


# --- subcommands ----------------------------------------------------------


def cmd_cc(args):
    problem = _load_problem(args)
    if args.max_bits < 0:
        raise InputError("--max-bits must be >= 0")
    rows = [(c, classical_cc.optimal_success(problem, c)) for c in range(args.max_bits + 1)]
    doc = {"problem": problem.name, "rows": [{"bits": c, "optimal_success": v} for c, v in rows]}
    _emit(args, ["bits", "optimal_success"], rows, doc)


def _box_and_problem(args):
    if args.input:
        box = correlations.CorrelationBox.from_json(_read(args.input))
        problem = _load_problem(args)
        return box, problem, None
    if not args.builtin:
        raise InputError("bell needs --input BOX (with --problem) or --builtin")
    problem, protocol = _builtin(args.builtin)
    state = _parse_state(args.state, protocol.dim)
    return quantum.box_from_protocol(protocol, state, problem), problem, protocol


def cmd_bell(args):
    box, problem, _ = _box_and_problem(args)
    ns = correlations.check_nonsignaling(box, args.tol)
    if not ns.passed:
        print(f"warning: box is signaling (alice {ns.alice_deviation:.3g}, bob {ns.bob_deviation:.3g});"
              " evaluating anyway", file=sys.stderr)
    if args.inequality == "rac":
        value = bell.rac_inequality(box, problem)
        violated = bell.rac_violated(value)
        doc = {"inequality": "rac", "value": value, "bound": bell.RAC_CLASSICAL_BOUND, "violated": violated,
               "nonsignaling": ns.passed}
        _emit(args, ["inequality", "value", "bound", "violated"],
              [("rac", value, bell.RAC_CLASSICAL_BOUND, violated)], doc)
        return
    summary = correlations.summarize(box, problem)
    source = {"exact": bell.RHS_EXACT, "pumped": bell.RHS_PUMPED, "asymptotic": bell.RHS_ASYMPTOTIC}[args.rhs]
    report = bell.evaluate(summary, problem, _parse_grid(args.delta_grid), source,
                           fam=_family(args) if source == bell.RHS_ASYMPTOTIC else None)
    doc = report.to_dict()
    doc.update({"p_A": summary.p_A, "p_B": summary.p_B, "nonsignaling": ns.passed})
    rows = [(r["delta"], r["lhs"], r["success"], r["rhs"], r["gap"]) for r in report.per_delta]
    _emit(args, ["delta", "lhs", "success", "rhs", "gap"], rows, doc)


def cmd_curves(args):
    if args.family == "vsp":
        if args.n < 2:
            raise InputError("--n must be >= 2")
        grid = np.linspace(0.5, 1.0, args.points)
        table = bell.fig3_curves(args.n, _family(args), grid)
        rows = [(pb, c, b) for pb, c, b in table.rows]
        doc = {"n": args.n, "constants": table.constants, "regions": list(bell.REGIONS),
               "rows": [{"p_B": pb, "C": c, "boundary": b} for pb, c, b in rows]}
        _emit(args, ["p_B", "C", "boundary"], rows, doc)
        return
    fam = _family(args, "alphaPHM")
    delta = args.delta if args.delta is not None else 0.5
    rows = []
    for n in bell.default_n_grid(2, max(args.n, 2), per_decade=10):
        left, right, v = bell.asymptotic_phm(n, delta, fam)
        rows.append((n, left, right, v))
    doc = {"delta": delta, "constants": fam.constants(),
           "crossover": bell.crossover(lambda n: bell.asymptotic_phm(n, delta, fam)[2], [r[0] for r in rows]),
           "rows": [{"n": n, "lhs": l, "rhs": r, "violated": v} for n, l, r, v in rows]}
    _emit(args, ["n", "lhs", "rhs", "violated"], rows, doc)


def cmd_noise(args):
    problem, protocol = _builtin(args.builtin)
    kw = {}
    if args.inequality == "theorem1":
        kw["delta_grid"] = _parse_grid(args.delta_grid)
    p_star = bell.noise_threshold(protocol, problem, args.inequality, args.tol, **kw)
    verdict = "none" if p_star is None else "violation"
    doc = {"protocol": args.builtin, "inequality": args.inequality, "tol": args.tol,
           "threshold": p_star, "verdict": verdict}
    _emit(args, ["protocol", "inequality", "threshold", "verdict"],
          [(args.builtin, args.inequality, p_star, verdict)], doc)


def cmd_simulate(args):
    box, problem, _ = _box_and_problem(args)
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    try:
        proto = protocol_sim.compile_protocol(box, problem, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = protocol_sim.simulate(proto, args.trials, args.seed)
    exact = protocol_sim.exact_success(proto)
    guaranteed = protocol_sim.guaranteed_success(proto)
    doc = {"k": args.k, "copies": proto.copies, "message_bits": proto.message_bits, "p_A": proto.p_A,
           "p_B": proto.p_B, "exact_success": exact, "guaranteed_success": guaranteed,
           "empirical": res.estimate, "stderr": res.stderr, "trials": args.trials, "seed": args.seed}
    _emit(args, list(doc), [tuple(doc.values())], doc)


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="json"):
        p.add_argument("--output", help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=fmt)

    def consts(p):
        p.add_argument("--const-c", type=float, default=1.0)
        p.add_argument("--const-cp", type=float, default=1.0)
        p.add_argument("--const-cpp", type=float, default=1.0)
        p.add_argument("--alpha", type=float, default=1.0)

    p = sub.add_parser("cc", help="exact one-way complexity table")
    p.add_argument("--input", help="problem JSON")
    p.add_argument("--builtin", help="rac or indexN")
    p.add_argument("--max-bits", type=int, default=2)
    common(p, "csv")
    p.set_defaults(func=cmd_cc)

    p = sub.add_parser("bell", help="evaluate a Bell inequality")
    p.add_argument("--input", help="box JSON")
    p.add_argument("--problem", help="problem JSON (with --input)")
    p.add_argument("--builtin", help="rac or indexN")
    p.add_argument("--state", default="phi", help="phi, werner:p or iso:p")
    p.add_argument("--inequality", choices=("rac", "theorem1"), default="theorem1")
    p.add_argument("--rhs", choices=("exact", "pumped", "asymptotic"), default="exact")
    p.add_argument("--delta-grid")
    p.add_argument("--tol", type=float, default=1e-10, help="non-signaling tolerance")
    consts(p)
    common(p)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("curves", help="complexity and detection-boundary curves")
    p.add_argument("--family", choices=("vsp", "phm"), default="vsp")
    p.add_argument("--n", type=float, default=1e4)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--delta", type=float)
    consts(p)
    common(p, "csv")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("noise", help="isotropic-noise threshold")
    p.add_argument("--builtin", default="rac")
    p.add_argument("--inequality", choices=("rac", "theorem1"), default="rac")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--delta-grid")
    common(p)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("simulate", help="Monte Carlo run of the first-acceptance protocol")
    p.add_argument("--input", help="box JSON")
    p.add_argument("--problem", help="problem JSON (with --input)")
    p.add_argument("--builtin", default="rac")
    p.add_argument("--state", default="phi")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", 1.0) is not None and getattr(args, "tol", 1.0) <= 0:
        parser.error("--tol must be positive")
    try:
        args.func(args)
    except classical_cc.GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, problems.ProblemError, correlations.BoxError, quantum.QuantumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
