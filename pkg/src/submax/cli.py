"""Command-line front end.

Subcommands: solve, verify, lovasz, hardness, brute-force.  All reports are
deterministic for a fixed seed (wall-clock timing is opt-in via --timing so
byte-identical output stays the default); rationals are printed exactly as
p/q with a decimal rendering alongside where that helps a human.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from typing import Optional

from . import hardness as hardness_mod
from .core import (
    SizeError, brute_force_opt, check_submodular, format_rational, parse_rational,
    prune_ground_set, subset_key,
)
from .instances import (
    Instance, InstanceFormatError, load_instance_file, parse_point_spec,
)
from .lovasz import CLOSURE_MAX, FractionalPoint, convex_closure_value, lovasz_value
from .neighborhoods import (
    NeighborhoodFunction, empirical_conic_check, polyhedral_neighborhood_function,
    swap_neighborhood_function,
)
from .search import basic_local_search, iterative_local_search, monotone_local_search

VERIFY_MAX_N = 16


class CLIError(Exception):
    pass


def _decimal(q: Fraction, places: int = 12) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = q * 10 ** places
    digits = scaled.numerator // scaled.denominator
    whole, frac = divmod(digits, 10 ** places)
    return f"{sign}{whole}.{str(frac).zfill(places)}".rstrip("0").rstrip(".") or "0"


def _emit(payload: dict, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        rows = payload.get("rows")
        if rows is None:
            rows = [{k: v for k, v in payload.items() if not isinstance(v, (list, dict))}]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        stream.write(buf.getvalue())
    else:
        for key, value in payload.items():
            if key == "rows":
                for row in value:
                    stream.write("  " + " ".join(f"{k}={v}" for k, v in row.items()) + "\n")
            else:
                stream.write(f"{key}: {value}\n")


def _build_neighborhood(instance: Instance, spec_text: Optional[str]) -> NeighborhoodFunction:
    spec = {"kind": "polyhedral"}
    if spec_text:
        try:
            spec = json.loads(spec_text)
        except json.JSONDecodeError as exc:
            raise CLIError(f"--neighborhood: invalid JSON ({exc.msg})") from exc
    kind = spec.get("kind")
    if kind == "polyhedral":
        extra = set(spec) - {"kind"}
        if extra:
            raise CLIError(f"--neighborhood: unknown fields {sorted(extra)}")
        return polyhedral_neighborhood_function(instance.ground, instance.family)
    if kind == "swap":
        extra = set(spec) - {"kind", "k", "p"}
        if extra:
            raise CLIError(f"--neighborhood: unknown fields {sorted(extra)}")
        return swap_neighborhood_function(instance.ground, instance.family,
                                          int(spec.get("k", 1)), int(spec.get("p", 1)))
    raise CLIError(f"--neighborhood: unknown kind {kind!r}")


def _write_trace(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({
                "j": rec.j, "i": rec.anchor, "scanned": rec.scanned,
                "value": format_rational(rec.value),
                "delta": format_rational(rec.delta),
            }, sort_keys=True) + "\n")


def cmd_solve(args) -> int:
    instance = load_instance_file(args.instance)
    ground, family, f = instance.ground, instance.family, instance.oracle
    if args.algorithm == "monotone" and not instance.monotone:
        raise CLIError("the monotone algorithm needs an instance flagged monotone")
    if args.algorithm in ("basic", "iterative") and not instance.down_closed:
        raise CLIError(f"the {args.algorithm} algorithm needs a down-closed family")
    N = _build_neighborhood(instance, args.neighborhood)
    epsilon = parse_rational(args.epsilon)
    alpha = N.claimed_alpha if args.alpha is None else parse_rational(args.alpha)

    within = ground.full_mask
    if family.is_down_closed and ground.n > 0:
        within = prune_ground_set(ground, family, f)

    t0 = time.perf_counter()
    if args.algorithm == "monotone":
        if within == 0:
            result_set, result_value, steps, calls = 0, f(0), 0, 1
            records = []
        else:
            res = monotone_local_search(ground, family, N, f, epsilon,
                                        within=within, alpha=alpha)
            result_set, result_value = res.final_set, res.final_value
            steps, calls, records = res.trace.steps, res.trace.oracle_calls, res.trace.records
    elif args.algorithm == "basic":
        if within == 0:
            result_set, result_value, steps, calls, records = 0, f(0), 0, 1, []
        else:
            res = basic_local_search(ground, family, alpha, N, f, epsilon, within=within)
            result_set, result_value = res.S, res.S_value
            steps, calls, records = res.trace.steps, res.trace.oracle_calls, res.trace.records
    else:
        res = iterative_local_search(ground, family, alpha, N, f, epsilon, within=within)
        result_set, result_value = res.S, res.S_value
        steps = res.trace.total_steps
        calls = res.trace.oracle_calls
        records = [r for rnd in res.trace.rounds if rnd.trace is not None
                   for r in rnd.trace.records]
    elapsed = time.perf_counter() - t0

    if args.trace:
        _write_trace(args.trace, records)

    payload = {
        "instance": args.instance,
        "ground_size": ground.n,
        "constraint_backend": family.backend,
        "algorithm": args.algorithm,
        "epsilon": format_rational(epsilon),
        "alpha": format_rational(alpha),
        "neighborhood": N.backend,
        "result_set": list(ground.ids_of(result_set)),
        "result_value": format_rational(result_value),
        "steps": steps,
        "oracle_calls": calls,
    }
    if instance.hardness_instance is not None:
        hi = instance.hardness_instance
        payload["beta"] = hi.beta
        payload["sqrt_n"] = hi.sqrt_n
        payload["secret_value"] = format_rational(Fraction(hi.sqrt_n))
    if args.verify:
        if ground.n > VERIFY_MAX_N:
            raise CLIError(f"--verify needs n <= {VERIFY_MAX_N}")
        opt_set, opt_value = brute_force_opt(f, family, ground)
        payload["brute_force_value"] = format_rational(opt_value)
        payload["brute_force_set"] = list(ground.ids_of(opt_set))
        ratio = result_value / opt_value if opt_value else Fraction(1)
        payload["ratio"] = format_rational(ratio)
        payload["ratio_decimal"] = _decimal(ratio)
    if args.timing:
        payload["wall_time_s"] = f"{elapsed:.3f}"
    _emit(payload, args.output, sys.stdout)
    return 0


def cmd_brute_force(args) -> int:
    instance = load_instance_file(args.instance)
    opt_set, opt_value = brute_force_opt(instance.oracle, instance.family, instance.ground)
    _emit({
        "instance": args.instance,
        "optimal_set": list(instance.ground.ids_of(opt_set)),
        "optimal_value": format_rational(opt_value),
        "optimal_value_decimal": _decimal(opt_value),
    }, args.output, sys.stdout)
    return 0


def cmd_lovasz(args) -> int:
    if args.action != "eval":
        raise CLIError(f"unknown lovasz action {args.action!r}")
    instance = load_instance_file(args.instance)
    coords = parse_point_spec(instance.ground, args.point)
    point = FractionalPoint.from_coords(instance.ground, coords)
    value = lovasz_value(instance.oracle, point)
    payload = {
        "instance": args.instance,
        "point": {e: format_rational(q) for e, q in sorted(coords.items())},
        "lovasz_value": format_rational(value),
        "lovasz_value_decimal": _decimal(value),
    }
    if args.closure:
        if instance.ground.n > CLOSURE_MAX:
            raise CLIError(f"--closure needs n <= {CLOSURE_MAX}")
        closure, _ = convex_closure_value(instance.oracle, point)
        payload["convex_closure_value"] = format_rational(closure)
        payload["agrees"] = closure == value
    _emit(payload, args.output, sys.stdout)
    return 0


def cmd_verify(args) -> int:
    instance = load_instance_file(args.instance)
    ground, family, f = instance.ground, instance.family, instance.oracle
    ok = True
    payload = {"instance": args.instance, "check": args.what}

    if args.what == "submodular":
        if ground.n > VERIFY_MAX_N:
            raise CLIError(f"submodularity check needs n <= {VERIFY_MAX_N}")
        table = f.table()
        good, witness = check_submodular(table, ground.n)
        ok = good
        payload["submodular"] = good
        if witness:
            s_mask, t_mask = witness
            payload["violating_S"] = list(ground.ids_of(s_mask))
            payload["violating_T"] = list(ground.ids_of(t_mask))

    elif args.what == "conic":
        N = _build_neighborhood(instance, args.neighborhood)
        alpha = N.claimed_alpha if args.alpha is None else parse_rational(args.alpha)
        report = empirical_conic_check(ground, family, N, alpha,
                                       samples=args.samples, seed=args.seed)
        ok = report.all_passed
        payload["alpha"] = format_rational(alpha)
        payload["exhaustive"] = report.exhaustive
        payload["pairs_checked"] = report.pairs_checked
        payload["failures"] = len(report.failures)
        payload["rows"] = [
            {"S": ",".join(ground.ids_of(r.S)) or "{}",
             "T": ",".join(ground.ids_of(r.T)) or "{}",
             "ok": r.ok,
             "support": "" if r.support_size is None else r.support_size}
            for r in report.records if not r.ok] or [
            {"S": "all", "T": "all", "ok": True, "support": ""}]

    elif args.what == "guarantees":
        if ground.n > VERIFY_MAX_N:
            raise CLIError(f"guarantee check needs n <= {VERIFY_MAX_N}")
        epsilon = parse_rational(args.epsilon)
        _, opt_value = brute_force_opt(f, family, ground)
        N = _build_neighborhood(instance, args.neighborhood)
        alpha = N.claimed_alpha if args.alpha is None else parse_rational(args.alpha)
        rows = []
        within = prune_ground_set(ground, family, f) if family.is_down_closed \
            else ground.full_mask
        if instance.monotone:
            if within == 0:
                value = f(0)
            else:
                value = monotone_local_search(ground, family, N, f, epsilon,
                                              within=within, alpha=alpha).final_value
            bound_ok = (alpha + 1 + epsilon) * value >= opt_value
            ok = ok and bound_ok
            rows.append({"algorithm": "monotone",
                         "value": format_rational(value),
                         "opt": format_rational(opt_value),
                         "bound": f"(alpha+1+eps) f >= OPT", "ok": bound_ok})
        if instance.down_closed:
            if within == 0:
                value = f(0)
            else:
                value = iterative_local_search(ground, family, alpha, N, f, epsilon,
                                               within=within).S_value
            floor_a = int(alpha)
            bound_ok = (floor_a + 1) * (alpha + 1 + epsilon) * value >= floor_a * opt_value
            ok = ok and bound_ok
            rows.append({"algorithm": "iterative",
                         "value": format_rational(value),
                         "opt": format_rational(opt_value),
                         "bound": "(floor(a)+1)(alpha+1+eps) f >= floor(a) OPT",
                         "ok": bound_ok})
        if not rows:
            raise CLIError("guarantees need a monotone or down-closed instance")
        payload["rows"] = rows

    else:
        raise CLIError(f"unknown verify target {args.what!r}")

    payload["passed"] = ok
    _emit(payload, args.output, sys.stdout)
    return 0 if ok else 1


def cmd_hardness(args) -> int:
    if args.beta is None and args.c is None and args.d is None:
        raise CLIError("give --beta, --c, or --d")
    if args.curve:
        inst = hardness_mod.generate_instance(args.sqrt_n, c=args.c, beta=args.beta,
                                              d=args.d, seed=args.seed)
        rows = hardness_mod.detection_curve(
            inst, trials=args.trials, seed=args.seed,
            exact=args.sqrt_n <= hardness_mod.EXACT_DETECTION_MAX_SQRT)
        payload = {
            "sqrt_n": args.sqrt_n, "beta": inst.beta, "trials": args.trials,
            "seed": args.seed,
            "rows": [{
                "weight_family": r["weight_family"],
                "k_blocks": r["k_blocks"],
                "standard_max": format_rational(r["standard_max"]),
                "mc_probability": format_rational(r["mc_probability"]),
                "exact_probability": format_rational(r["exact_probability"])
                if "exact_probability" in r else "",
            } for r in rows],
        }
        _emit(payload, args.output, sys.stdout)
        return 0
    report = hardness_mod.run_adversary(
        args.sqrt_n, query_budget=args.budget, trials=args.trials,
        strategy=args.strategy, beta=args.beta, c=args.c, d=args.d, seed=args.seed)
    payload = {
        "sqrt_n": args.sqrt_n, "beta": report.beta, "strategy": report.strategy,
        "budget": args.budget, "trials": args.trials, "seed": args.seed,
        "detection_frequency": format_rational(report.detection_frequency),
        "rows": [{
            "trial": o.trial, "queries_used": o.queries_used,
            "detected_special": int(o.detected_special),
            "best_value": format_rational(o.best_value),
            "ratio_to_opt": format_rational(o.ratio_to_opt),
        } for o in report.outcomes],
    }
    _emit(payload, args.output, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="submax",
        description="Local search for constrained submodular maximization, "
                    "with exact rational arithmetic throughout.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed for sampled checks")
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is sequential")
    common.add_argument("--output", choices=("text", "csv", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p_solve = add_parser("solve", help="run a local-search algorithm on an instance")
    p_solve.add_argument("instance")
    p_solve.add_argument("--algorithm", choices=("monotone", "basic", "iterative"),
                         default="iterative")
    p_solve.add_argument("--epsilon", default="1/10")
    p_solve.add_argument("--alpha", default=None,
                         help="override the neighborhood's conic parameter")
    p_solve.add_argument("--neighborhood", default=None,
                         help='e.g. {"kind":"swap","k":2,"p":1} or {"kind":"polyhedral"}')
    p_solve.add_argument("--trace", default=None, help="write per-step records here")
    p_solve.add_argument("--verify", action="store_true",
                         help="cross-check against brute force (n <= 16)")
    p_solve.add_argument("--timing", action="store_true",
                         help="include wall time (breaks byte-identical output)")

    p_verify = add_parser("verify", help="run a verification suite on an instance")
    p_verify.add_argument("what", choices=("conic", "submodular", "guarantees"))
    p_verify.add_argument("instance")
    p_verify.add_argument("--alpha", default=None)
    p_verify.add_argument("--neighborhood", default=None)
    p_verify.add_argument("--samples", type=int, default=None)
    p_verify.add_argument("--epsilon", default="1/10")

    p_lovasz = add_parser("lovasz", help="evaluate the continuous extension")
    p_lovasz.add_argument("action", choices=("eval",))
    p_lovasz.add_argument("instance")
    p_lovasz.add_argument("--point", required=True, help='e.g. "a=1/2,b=3/10"')
    p_lovasz.add_argument("--closure", action="store_true",
                          help="also solve the convex-closure LP (n <= 12)")

    p_hard = add_parser("hardness", help="linear-oracle hardness experiments")
    p_hard.add_argument("--sqrt-n", dest="sqrt_n", type=int, required=True)
    p_hard.add_argument("--beta", type=int, default=None)
    p_hard.add_argument("--c", type=int, default=None)
    p_hard.add_argument("--d", type=int, default=None)
    p_hard.add_argument("--trials", type=int, default=100)
    p_hard.add_argument("--strategy", choices=sorted(hardness_mod.BUILTIN_STRATEGIES),
                        default="random-weights")
    p_hard.add_argument("--budget", type=int, default=16, help="oracle calls per trial")
    p_hard.add_argument("--curve", action="store_true",
                        help="emit the detection-probability curve instead of adversary runs")

    p_bf = add_parser("brute-force", help="exact optimum by enumeration (n <= 20)")
    p_bf.add_argument("instance")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "verify": cmd_verify,
        "lovasz": cmd_lovasz,
        "hardness": cmd_hardness,
        "brute-force": cmd_brute_force,
    }
    try:
        return handlers[args.command](args)
    except (CLIError, InstanceFormatError, SizeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
