"""Command-line front end: ``bellce <command> [options]``.

Every command emits a table (CSV by default, JSON with ``--format json``) to
stdout or to ``--out``. Exit codes: 0 success, 2 invalid input, 3 resource
limits, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import noise, stats
from .errors import ContractViolation, NumericalError, ResourceError
from .measures import ce_lower_bound, exact_ce, exact_ntangle, generalized_concurrence
from .sampler import (
    MeasurementRecord,
    bell_sample,
    count_all_singlet_rounds,
    count_odd_parity_rounds,
    count_singlet_rounds,
    estimate_ce_lower_bound,
    estimate_subsystem_purity,
    read_record,
    write_record,
)
from .statevec import PureState, as_subset
from .states import Family, NamedStateFamily, make_state

EXIT_VALIDATION, EXIT_RESOURCE, EXIT_NUMERICAL = 2, 3, 4
COLUMNS = ("quantity", "subset", "value", "lower", "upper", "successes", "M")


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


# ---------------------------------------------------------------- parsing helpers


def parse_subset(text: str | None, n: int) -> tuple[int, ...]:
    if text is None:
        return tuple(range(n))
    try:
        items = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise ContractViolation(f"--subset must be comma-separated qubit indices, got {text!r}") from None
    return as_subset(items, n)


def parse_n_range(text: str) -> list[int]:
    """Accepts ``5``, ``2..6`` (inclusive) or ``2,4,6``."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise ContractViolation(f"cannot parse n range {text!r}; use e.g. 2..6 or 2,4,6") from None


def read_state_file(path: str | Path, normalize: bool = False) -> PureState:
    """State file: ``n=<n>`` on the first line, then ``2^n`` lines of ``re im``."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ContractViolation(f"{path}: line 1 must be n=<number of qubits>")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise ContractViolation(f"{path}: line 1: bad qubit count {lines[0]!r}") from None
    if n < 1 or len(lines) - 1 != 2**n:
        raise ContractViolation(f"{path}: expected {2**max(n, 0)} amplitude lines for n={n}, found {len(lines) - 1}")
    amps = np.empty(2**n, dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        try:
            re, im = (float(v) for v in parts)
        except ValueError:
            raise ContractViolation(f"{path}: line {i + 2}: expected 're im', got {line!r}") from None
        amps[i] = complex(re, im)
    state = PureState.from_amplitudes(amps, normalize=normalize)
    if not state.is_normalized():
        raise ContractViolation(f"{path}: state has squared norm {state.squared_norm:.6g}; pass --normalize")
    return state


def write_state_file(state: PureState, path: str | Path) -> None:
    lines = [f"n={state.n_qubits}"]
    lines += [f"{fmt(float(a.real))} {fmt(float(a.imag))}" for a in state.amplitudes]
    Path(path).write_text("\n".join(lines) + "\n")


def _state_from_args(args) -> tuple[PureState, str]:
    if args.state_file:
        return read_state_file(args.state_file, args.normalize), f"file {args.state_file}"
    if args.family is None:
        raise ContractViolation("give either --family or --state-file")
    fam = Family.parse(args.family)
    n = args.n
    if fam is Family.PRODUCT and args.bits is not None:
        n = len(args.bits) if n is None else n
    if n is None:
        raise ContractViolation("--n is required with --family")
    named = NamedStateFamily(fam, n, seed=args.seed if fam is Family.HAAR_RANDOM else None, bitstring=args.bits)
    return make_state(named), named.describe()


# ---------------------------------------------------------------- output


def emit(rows: list[dict], columns, args) -> str:
    if args.format == "json":
        clean = [
            {c: (None if isinstance(r.get(c), float) and math.isnan(r[c]) else r.get(c)) for c in columns}
            for r in rows
        ]
        text = json.dumps(clean, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return text


def _subset_label(s) -> str:
    return " ".join(str(q) for q in s)


# ---------------------------------------------------------------- commands


def cmd_exact(args) -> list[dict]:
    state, _ = _state_from_args(args)
    n = state.n_qubits
    s = parse_subset(args.subset, n)
    measures = ["ce", "ntangle", "concurrence", "lower-bound"] if args.measure == "all" else [args.measure]
    rows = []
    for m in measures:
        if m == "ce":
            res = exact_ce(state, s)
            rows.append({"quantity": "ce", "subset": _subset_label(s), "value": res.value})
            rows += [
                {"quantity": "purity", "subset": _subset_label(a), "value": v}
                for a, v in res.purity_terms.items()
            ]
        elif m == "ntangle":
            rows.append({"quantity": "ntangle", "subset": _subset_label(range(n)), "value": exact_ntangle(state)})
        elif m == "concurrence":
            rows.append({"quantity": "concurrence", "subset": _subset_label(range(n)),
                         "value": float(generalized_concurrence(state))})
        elif m == "lower-bound":
            rows.append({"quantity": "lower_bound", "subset": _subset_label(s), "value": ce_lower_bound(state, s)})
    return rows


def estimate_rows(record: MeasurementRecord, s: tuple[int, ...], delta: float) -> list[dict]:
    """Point estimates with Clopper-Pearson intervals at level ``1 - delta``."""
    M, n = record.M, record.n_pairs
    rows = []
    k = count_singlet_rounds(record, s)
    ci = stats.clopper_pearson(k, M, delta)
    rows.append({"quantity": "ce", "subset": _subset_label(s), "value": k / M,
                 "lower": ci.lower, "upper": ci.upper, "successes": k, "M": M})
    k = count_all_singlet_rounds(record)
    ci = stats.clopper_pearson(k, M, delta)
    scale = 2.0**n
    rows.append({"quantity": "ntangle", "subset": _subset_label(range(n)), "value": scale * k / M,
                 "lower": scale * ci.lower, "upper": scale * ci.upper, "successes": k, "M": M})
    # the purity estimate is 1 - 2 * (fraction of rounds with odd singlet parity on s)
    gamma = estimate_subsystem_purity(record, s)
    odd = count_odd_parity_rounds(record, s)
    ci = stats.clopper_pearson(odd, M, delta)
    rows.append({"quantity": "purity", "subset": _subset_label(s), "value": gamma,
                 "lower": 1 - 2 * ci.upper, "upper": 1 - 2 * ci.lower, "successes": odd, "M": M})
    rows.append({"quantity": "lower_bound", "subset": _subset_label(range(n)),
                 "value": estimate_ce_lower_bound(record), "M": M})
    return rows


def cmd_sample(args) -> list[dict]:
    state, descr = _state_from_args(args)
    if args.M < 1:
        raise ContractViolation(f"--M must be a positive integer, got {args.M}")
    record = bell_sample(state, args.M, args.seed, source=descr)
    if args.record:
        write_record(record, args.record)
    return estimate_rows(record, parse_subset(args.subset, state.n_qubits), args.delta)


def cmd_estimate(args) -> list[dict]:
    record = read_record(args.record)
    if not isinstance(record, MeasurementRecord):
        raise ContractViolation(f"{args.record} is a c-SWAP record; estimate expects a Bell record")
    return estimate_rows(record, parse_subset(args.subset, record.n_pairs), args.delta)


PLAN_COLUMNS = ("quantity", "M", "value", "note")
CURVE_COLUMNS = ("M", "cp_half_width", "hoeffding_epsilon", "truncated_mass")


def cmd_plan(args) -> list[dict]:
    if args.curve:
        if args.assumed_p is None:
            raise ContractViolation("--curve needs --assumed-p")
        rows = []
        for M in (int(m) for m in args.curve_M.split(",")):
            b = stats.expected_ci_bounds(args.assumed_p, M, args.delta)
            rows.append({"M": M, "cp_half_width": b.half_width,
                         "hoeffding_epsilon": stats.hoeffding_epsilon(M, args.delta),
                         "truncated_mass": b.truncated_mass})
        return rows
    plan = stats.plan_budget(args.epsilon, args.delta, args.assumed_p, args.subsystem_size)
    rows = [
        {"quantity": "epsilon_half_width", "value": plan.epsilon},
        {"quantity": "delta", "value": plan.delta},
        {"quantity": "M_hoeffding", "M": plan.M_hoeffding},
    ]
    if plan.M_cp is not None:
        rows.append({"quantity": "M_clopper_pearson", "M": plan.M_cp, "value": plan.assumed_p})
    rows += [{"quantity": "warning", "note": w} for w in plan.warnings]
    return rows


COMPARE_COLUMNS = noise.CSV_HEADER
REPORT_COLUMNS = ("family", "n", "method", "norm_sq", "shot_overhead", "cz_count", "ccz_count", "note")

_MODELS = {
    "default": noise.default_noise_model,
    "ideal": noise.ideal_noise_model,
    "phase-only": noise.phase_only_noise_model,
}


def _sweep(args):
    families = [f for f in args.families.split(",") if f.strip()]
    if not families:
        raise ContractViolation("--families must name at least one family")
    methods = ["bell", "cswap"] if args.method == "both" else [args.method]
    return noise.comparison_sweep(
        families, parse_n_range(args.n), _MODELS[args.model](), methods, args.noise_prep, args.cswap_max_n
    )


def cmd_compare(args) -> list[dict]:
    rows = _sweep(args)
    # the CSV layout has no note column, so skipped or failed cells are explained on stderr
    for r in rows:
        if r.note:
            print(f"{r.family} n={r.n} {r.method.value}: {r.note}", file=sys.stderr)
    return [
        {"family": r.family, "n": r.n, "method": r.method.value, "ce_est": r.ce_estimated,
         "ce_theory": r.ce_theory, "rel_err": r.relative_error, "norm_sq": r.squared_norm}
        for r in rows
    ]


def cmd_noise_report(args) -> list[dict]:
    return [
        {"family": r.family, "n": r.n, "method": r.method.value, "norm_sq": r.squared_norm,
         "shot_overhead": r.shot_overhead, "cz_count": r.cz_count, "ccz_count": r.ccz_count, "note": r.note}
        for r in _sweep(args)
    ]


# ---------------------------------------------------------------- argparse


def _add_state_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="ghz, w, line, product or haar")
    p.add_argument("--n", type=int, help="number of qubits")
    p.add_argument("--bits", help="bitstring for the product family (character k is qubit k)")
    p.add_argument("--state-file", help="text file: n=<n> then 2^n lines 're im'")
    p.add_argument("--normalize", action="store_true", help="normalize a state file instead of rejecting it")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--families", default="ghz", help="comma-separated families")
    p.add_argument("--n", default="2..6", help="qubit counts: 5, 2..6 or 2,4,6")
    p.add_argument("--method", choices=("bell", "cswap", "both"), default="both")
    p.add_argument("--model", choices=tuple(_MODELS), default="default")
    p.add_argument("--noise-prep", action="store_true", help="use the noisy CZ in line-state preparation")
    p.add_argument("--cswap-max-n", type=int, default=noise.CSWAP_MAX_N)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellce", description="Concentratable Entanglement toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact entanglement measures of a state")
    _add_state_args(p)
    p.add_argument("--seed", type=int, help="seed for Haar-random states")
    p.add_argument("--measure", choices=("ce", "ntangle", "concurrence", "lower-bound", "all"), default="ce")
    p.add_argument("--subset", help="comma-separated qubit indices (default: all)")
    _add_output_args(p)
    p.set_defaults(func=cmd_exact, columns=COLUMNS)

    p = sub.add_parser("sample", help="simulate Bell-basis rounds and estimate")
    _add_state_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--M", type=int, required=True, help="number of rounds")
    p.add_argument("--delta", type=float, default=0.05, help="intervals at level 1 - delta")
    p.add_argument("--subset", help="comma-separated pair indices (default: all)")
    p.add_argument("--record", help="also write the measurement record here")
    _add_output_args(p)
    p.set_defaults(func=cmd_sample, columns=COLUMNS)

    p = sub.add_parser("estimate", help="estimate from a stored Bell record")
    p.add_argument("--record", required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--subset")
    _add_output_args(p)
    p.set_defaults(func=cmd_estimate, columns=COLUMNS)

    p = sub.add_parser("plan", help="shot budget for a target CI half width")
    p.add_argument("--epsilon", type=float, default=0.05, help="target half width of the interval")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--assumed-p", type=float, help="assumed success rate for the Clopper-Pearson plan")
    p.add_argument("--subsystem-size", type=int, help="warn if epsilon is too coarse for this subsystem")
    p.add_argument("--curve", action="store_true", help="emit expected half width versus M instead")
    p.add_argument("--curve-M", default="100,1000,10000,100000", help="comma-separated M values for --curve")
    _add_output_args(p)
    p.set_defaults(func=cmd_plan, columns=PLAN_COLUMNS)

    p = sub.add_parser("compare", help="noisy Bell versus c-SWAP CE accuracy")
    _add_sweep_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_compare, columns=COMPARE_COLUMNS)

    p = sub.add_parser("noise-report", help="norm loss, shot overhead and gate counts")
    _add_sweep_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_noise_report, columns=REPORT_COLUMNS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.func is cmd_plan and args.curve:
        args.columns = CURVE_COLUMNS
    try:
        rows = args.func(args)
        emit(rows, args.columns, args)
    except (ContractViolation, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ResourceError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
