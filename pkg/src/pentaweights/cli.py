"""Command line entry point: ``pentaweights <command> [options]``.

Every command prints (or writes) a JSON report and exits with 0 when all
checks pass, 1 when some check fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from typing import Any, Callable


from . import one_boson as ob
from . import two_boson as tb
from .errors import PentaweightsError
from .finite_field import check_prime, verify_33_discrete
from .linalg import rank
from .quasi_gaussian import annihilator_subspace, lagrangian_of
from .report import FAIL, PASS, SKIPPED, Check, Verification
from .scalars import exact, format_scalar
from .symplectic import apply_gauge, random_gauge

SCHEMA = 1
# spectral reconstructions are only accurate to this level
GAUGE_TOL = 1e-7

COMMANDS = (
    "one-boson-identities",
    "one-boson-canonical",
    "one-boson-gauge",
    "verify-33-one",
    "two-boson-cocycle",
    "two-boson-delta",
    "two-boson-gauge",
    "verify-33-two",
    "oracle-finite-field",
)


class InputError(Exception):
    pass


# -- input ----------------------------------------------------------------------


def load_input(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("input must be a JSON object")
    return data


def parse_matrix(rows: Any, n: int) -> list[list]:
    try:
        m = [[exact(c) for c in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad matrix entry: {exc}") from None
    if len(m) != n or any(len(r) != n for r in m):
        raise InputError(f"F must be {n}x{n}")
    return m


def parse_chain(values: Any) -> tb.OneChain:
    try:
        return tb.OneChain({tuple(int(ch) for ch in k): exact(v) for k, v in values.items()})
    except (AttributeError, TypeError, ValueError) as exc:
        raise InputError(f"bad chain: {exc}") from None


def parse_cocycle(values: Any) -> tb.MultiplicativeCocycle:
    try:
        return tb.MultiplicativeCocycle({tuple(int(ch) for ch in k): exact(v) for k, v in values.items()})
    except (AttributeError, TypeError, ValueError) as exc:
        raise InputError(f"bad cocycle: {exc}") from None


def matrix_witness(F) -> list:
    return [[format_scalar(c) for c in row] for row in F]


# -- aggregation ------------------------------------------------------------------


def _merge(trials: list[tuple[Any, Verification]]) -> list[Check]:
    """One check per name: fails if any trial fails; the witness is the first failing input."""
    merged: dict[str, Check] = {}
    for witness, report in trials:
        for c in report.checks:
            m = merged.get(c.name)
            if m is None:
                m = merged[c.name] = Check(c.name, SKIPPED, None, None, {"trials": 0})
            if c.status == SKIPPED:
                continue
            m.detail["trials"] += 1
            if c.residual is not None:
                m.residual = max(m.residual or 0.0, float(c.residual))
            if c.status == FAIL and m.status != FAIL:
                m.status = FAIL
                m.witness = {"input": witness, "check": c.witness}
            elif m.status == SKIPPED:
                m.status = PASS
    return list(merged.values())


def _error_check(name: str, exc: Exception, witness: Any) -> Verification:
    return Verification([Check(name, FAIL, None, {"input": witness, "error": f"{type(exc).__name__}: {exc}"})])


# -- commands ----------------------------------------------------------------------


def cmd_one_boson_identities(args, data) -> tuple[list[Check], dict]:
    rng = random.Random(args.seed)
    inputs = [parse_matrix(data["F"], 5)] if "F" in data else [ob.random_symmetric_matrix(rng) for _ in range(args.trials)]
    trials = []
    for F in inputs:
        report = ob.verify_edge_identities(F)
        c = report.data["c"]
        # the common commutator value equals the cyclic quantity (with its sign)
        report.add(Check.of("cyclic_formula", c == ob.cyclic_quantity(F)))
        trials.append((matrix_witness(F), report))
    generic = sum(1 for _, r in trials if r.data["generic"])
    return _merge(trials), {"instances": len(inputs), "generic": generic}


def cmd_one_boson_canonical(args, data) -> tuple[list[Check], dict]:
    cF = ob.canonical_matrix()
    checks = [Check.of("cyclic_quantity", ob.cyclic_quantity(cF) == exact(1), witness=str(ob.cyclic_quantity(cF)))]
    table = ob.edge_operators(cF)
    bad = []
    u = ob.STANDARD
    for t in u.faces:
        i, j, k, l = t
        s = u.face_sign(t)
        expected = {(i, j): (1, 0), (k, l): (1, 0), (i, k): (0, s), (j, l): (0, s), (i, l): (-1, -s), (j, k): (-1, -s)}
        for e, (beta, gamma) in expected.items():
            if table[e].component(t) != (exact(beta), exact(gamma)):
                bad.append(f"{e[0]}{e[1]}|{''.join(map(str, t))}")
    checks.append(Check.of("edge_table", not bad, witness=bad))
    checks += ob.verify_edge_identities(cF).checks
    return checks, {}


def cmd_one_boson_gauge(args, data) -> tuple[list[Check], dict]:
    rng = random.Random(args.seed)
    if "F" in data:
        inputs, resamples = [parse_matrix(data["F"], 5)], 0
    else:
        inputs, resamples = [], 0
        for _ in range(args.trials):
            F, r = ob.random_generic_matrix(rng)
            inputs.append(F)
            resamples += r
    trials = []
    for F in inputs:
        try:
            res = ob.gauge_residual(F, tol=args.tolerance)
            rep = Verification([Check.of("gauge_to_canonical", res < args.tolerance, residual=res)])
        except PentaweightsError as exc:
            rep = _error_check("gauge_to_canonical", exc, None)
        trials.append((matrix_witness(F), rep))
    return _merge(trials), {"instances": len(inputs), "resamples": resamples}


def cmd_verify_33_one(args, data) -> tuple[list[Check], dict]:
    report = ob.verify_33_one_boson()
    return report.checks, {"result": report.data["left"].to_dict()}


def _two_boson_inputs(args, data, rng) -> tuple[list, int]:
    if "F" in data:
        return [parse_matrix(data["F"], 10)], 0
    return [ob.random_symmetric_matrix(rng, 10) for _ in range(args.trials)], 0


def cmd_two_boson_cocycle(args, data) -> tuple[list[Check], dict]:
    rng = random.Random(args.seed)
    inputs, _ = _two_boson_inputs(args, data, rng)
    trials = []
    for F in inputs:
        try:
            rep = tb.verify_holonomies(F, tol=args.tolerance)
        except PentaweightsError as exc:
            rep = _error_check("holonomy", exc, None)
        trials.append((matrix_witness(F), rep))
    extra = {}
    if len(inputs) == 1 and "omega" in trials[0][1].data:
        extra["omega"] = trials[0][1].data["omega"].to_dict()
    return _merge(trials), {"instances": len(inputs), **extra}


def delta_report(nu: tb.OneChain, tol: float) -> Verification:
    report = Verification()
    a = tb.delta_matrix(nu)
    r = rank(a)
    report.add(Check.of("rank", r == 5, witness={"rank": r}))
    minor = tb.bottom_right_minor(nu)
    report.add(Check.of("minor_formula", minor == tb.minor_formula(nu),
                        witness={"minor": format_scalar(minor), "formula": format_scalar(tb.minor_formula(nu))},
                        detail={"minor": format_scalar(minor)}))
    weight = tb.build_delta_weight(nu)
    omega = tb.extract_cocycle(weight)
    target = nu.coboundary()
    dist = min(omega.distance(target), omega.distance(target.inverse()))
    report.add(Check.of("cocycle_round_trip", dist < tol, residual=dist, witness=omega.to_dict()))
    return report


def cmd_two_boson_delta(args, data) -> tuple[list[Check], dict]:
    rng = random.Random(args.seed)
    resamples = 0
    if "nu" in data:
        inputs = [parse_chain(data["nu"])]
    elif "omega" in data:
        inputs = [tb.standard_nu(parse_cocycle(data["omega"]))]
    else:
        inputs = [tb.OneChain.constant(range(1, 6))]
        for _ in range(args.trials - 1):
            nu, r = tb.random_admissible_chain(range(1, 6), rng)
            inputs.append(nu)
            resamples += r
    trials = []
    for nu in inputs:
        try:
            rep = delta_report(nu, args.tolerance)
        except PentaweightsError as exc:
            rep = _error_check("delta_weight", exc, None)
        trials.append((nu.to_dict(), rep))
    extra = {}
    if len(inputs) == 1:
        extra["minor"] = format_scalar(tb.bottom_right_minor(inputs[0])) if not trials[0][1].failures() else None
    return _merge(trials), {"instances": len(inputs), "resamples": resamples, **extra}


# transvections per face when perturbing a Lagrangian; more of them make the
# data too ill-conditioned for the floating-point standardization
GAUGE_STEPS = 2


def cmd_two_boson_gauge(args, data) -> tuple[list[Check], dict]:
    """Perturb one Lagrangian by two independent random gauges and recover
    the transform between the copies."""
    rng = random.Random(args.seed)
    spec = ob.STANDARD.spec(2)
    resamples = 0
    if "F" in data:
        sources = [("F", matrix_witness(F), lagrangian_of(F, spec)) for F in [parse_matrix(data["F"], 10)]]
    else:
        nus = [parse_chain(data["nu"])] if "nu" in data else []
        for _ in range(args.trials if not nus else 0):
            nu, r = tb.random_admissible_chain(range(1, 6), rng)
            nus.append(nu)
            resamples += r
        sources = []
        for nu in nus:
            try:
                sources.append(("nu", nu.to_dict(), annihilator_subspace(tb.build_delta_weight(nu))))
            except PentaweightsError as exc:
                sources.append(("nu", nu.to_dict(), exc))
    trials = []
    for kind, witness, lag in sources:
        if isinstance(lag, Exception):
            trials.append(({kind: witness}, _error_check("gauge_between", lag, None)))
            continue
        g1, g2 = random_gauge(spec, rng, GAUGE_STEPS), random_gauge(spec, rng, GAUGE_STEPS)
        w = {kind: witness, "gauges": {"seed": args.seed, "steps": GAUGE_STEPS}}
        try:
            l1, l2 = apply_gauge(g1, lag), apply_gauge(g2, lag)
            res = tb.gauge_residual(l1, l2, tol=GAUGE_TOL)
            std = tb.standardize_bases(l1)
            rep = Verification([
                Check.of("gauge_between", res < GAUGE_TOL, residual=res),
                Check.of("standard_bases", std.residual < GAUGE_TOL, residual=std.residual, witness=std.residuals),
                Check.of("stabilizer_dimension", tb.stabilizer_dimension(l1) == 1),
            ])
        except PentaweightsError as exc:
            rep = _error_check("gauge_between", exc, None)
        trials.append((w, rep))
    return _merge(trials), {"instances": len(sources), "resamples": resamples, "gauge_tolerance": GAUGE_TOL}


def cmd_verify_33_two(args, data) -> tuple[list[Check], dict]:
    rng = random.Random(args.seed)
    resamples = 0
    if "nu" in data:
        inputs = [parse_chain(data["nu"])]
    else:
        inputs = [tb.OneChain.constant(range(1, 7))]
        for _ in range(args.trials - 1):
            nu, r = tb.random_admissible_chain(range(1, 7), rng)
            inputs.append(nu)
            resamples += r
    trials = []
    for nu in inputs:
        try:
            rep = tb.verify_33_two_boson(nu)
        except PentaweightsError as exc:
            rep = _error_check("verify_33_two", exc, None)
        trials.append((nu.to_dict(), rep))
    return _merge(trials), {"instances": len(inputs), "resamples": resamples}


def cmd_oracle_finite_field(args, data) -> tuple[list[Check], dict]:
    report = verify_33_discrete(args.p, args.char_index, exhaustive=args.exhaustive or None, seed=args.seed,
                                tol=args.tolerance)
    info = {k: v for k, v in report.data.items() if k != "ratio"}
    if "ratio" in report.data:
        z = report.data["ratio"]
        info["ratio"] = {"re": repr(z.real), "im": repr(z.imag)}
    return report.checks, info


HANDLERS: dict[str, Callable] = {
    "one-boson-identities": cmd_one_boson_identities,
    "one-boson-canonical": cmd_one_boson_canonical,
    "one-boson-gauge": cmd_one_boson_gauge,
    "verify-33-one": cmd_verify_33_one,
    "two-boson-cocycle": cmd_two_boson_cocycle,
    "two-boson-delta": cmd_two_boson_delta,
    "two-boson-gauge": cmd_two_boson_gauge,
    "verify-33-two": cmd_verify_33_two,
    "oracle-finite-field": cmd_oracle_finite_field,
}


# -- argument parsing ----------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _prime(text: str) -> int:
    try:
        return check_prime(int(text))
    except (ValueError, PentaweightsError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pentaweights", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--trials", type=_positive_int, default=100)
    parser.add_argument("--tolerance", type=_positive_float, default=1e-9)
    parser.add_argument("--input", help="JSON file with F, nu or omega")
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--exhaustive", action="store_true", help="finite-field oracle: every boundary point")
    parser.add_argument("--p", type=_prime, default=3, help="finite-field oracle: odd prime <= 13")
    parser.add_argument("--char-index", type=int, default=1, help="finite-field oracle: character e(k) = exp(2 pi i c k / p)")
    parser.add_argument("--timing", action="store_true", help="include wall-clock time (reports are then not reproducible)")
    return parser


def run(args: argparse.Namespace) -> dict:
    data = load_input(args.input)
    if args.command == "oracle-finite-field" and not 1 <= args.char_index < args.p:
        raise InputError(f"--char-index must lie in 1..{args.p - 1}")
    start = time.perf_counter()
    try:
        checks, info = HANDLERS[args.command](args, data)
    except PentaweightsError as exc:
        checks, info = [Check("precondition", FAIL, None, {"error": f"{type(exc).__name__}: {exc}"})], {}
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "seed": args.seed,
        "trials": args.trials,
        "tolerance": args.tolerance,
        "input": args.input,
        "status": PASS if all(c.status != FAIL for c in checks) else FAIL,
        "checks": [c.to_dict() for c in checks],
        "data": info,
    }
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
    return report


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = run(args)
    except InputError as exc:
        print(f"pentaweights: error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, sort_keys=False, default=str) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["status"] == PASS else 1


if __name__ == "__main__":
    sys.exit(main())
