"""Command-line drivers for reproducible experiments.

Every command honors --out, --seed, and --threads, emits deterministic
JSON/CSV artifacts (timings go to the log, never into files), and drops
rendered figures next to the delimited output unless --no-figures is
given.  Exit codes: 0 pass, 1 property violation found, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field

from . import figures, reports
from .primes import load_or_sieve
from .representations import build_table, transference_demo, verify_window
from .residues import SquareFreeModulus, sharpness_witness, verify_sumset_cover
from .restriction import l4_check, level_set_scaling_scan, lp_norm
from .spectral import (
    ArcParams,
    DEFAULT_GRID_FACTOR,
    DEFAULT_SIGMA,
    DEFAULT_SIGMA0,
    default_grid_size,
    discrepancy,
    f_grid,
    major_arc_error_scan,
    nu_grid,
)
from .subsets import PrimeSubsetSpec
from .wtrick import WTrickParams

log = logging.getLogger("adl")

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


class UsageError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    """Resolved experiment parameters; serialization round-trips."""

    w: int | None = None
    N: int | None = None
    n0: int | None = None
    spec: dict | None = None
    epsilon: float | None = None
    sigma: float = DEFAULT_SIGMA
    sigma0: float = DEFAULT_SIGMA0
    grid_factor: int = DEFAULT_GRID_FACTOR
    seed: int = 0
    out: str = "reports"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        # the output directory is environment, not experiment: leaving it
        # out keeps reports byte-identical across working directories
        doc = {
            "w": self.w,
            "N": self.N,
            "n0": self.n0,
            "spec": self.spec,
            "epsilon": self.epsilon,
            "sigma": self.sigma,
            "sigma0": self.sigma0,
            "grid_factor": self.grid_factor,
            "seed": self.seed,
        }
        doc.update(self.extra)
        return doc

    @staticmethod
    def from_json(doc: dict) -> "ExperimentConfig":
        known = {k: doc[k] for k in (
            "w", "N", "n0", "spec", "epsilon", "sigma", "sigma0",
            "grid_factor", "seed") if k in doc}
        extra = {k: v for k, v in doc.items() if k not in known}
        return ExperimentConfig(**known, extra=extra)

    def params(self) -> WTrickParams:
        if (self.N is None) == (self.n0 is None):
            raise UsageError("exactly one of --N / --n0 is required")
        if self.n0 is not None:
            return WTrickParams.from_target(self.w, self.n0)
        return WTrickParams.from_length(self.w, self.N)


def _parse_spec(text: str) -> PrimeSubsetSpec:
    try:
        return PrimeSubsetSpec.parse(text)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad --spec value: {exc}") from exc


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _window(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError as exc:
        raise UsageError(f"bad --window value {text!r} (expected LO:HI)") from exc


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify_sumset(args) -> int:
    qs = _int_list(args.q)
    moduli = []
    for q in qs:
        try:
            moduli.append(SquareFreeModulus.from_int(q))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    records = []
    failures = 0
    for mod in moduli:
        rep = verify_sumset_cover(
            mod,
            mode=args.mode,
            count=args.count,
            seed=args.seed,
            threads=args.threads,
        )
        log.info("q=%d: %d sets in %.0f ms", mod.q, rep.sets_tested, rep.elapsed_ms)
        records.append(rep.to_record(include_timing=False))
        failures += rep.counterexample_count
    body = {"records": records, "total_counterexamples": failures}
    if args.witness:
        wits = {}
        for mod in moduli:
            found = sharpness_witness(mod)
            wits[str(mod.q)] = (
                None
                if found is None
                else {"members": found[0].members(), "missed": found[1].members()}
            )
        body["threshold_witnesses"] = wits
    doc = reports.payload("sumset_cover", _config_doc(args), body)
    path = reports.write_json(os.path.join(args.out, "verify_sumset.json"), doc)
    log.info("wrote %s", path)
    if args.figures:
        figures.sumset_cover_figure(records, os.path.join(args.out, "verify_sumset.png"))
    return EXIT_PASS if failures == 0 else EXIT_VIOLATION


def cmd_scan_spectrum(args) -> int:
    config = _spectrum_config(args)
    params = config.params()
    spec = _parse_spec(args.spec)
    table = load_or_sieve(params.sieve_limit)
    arc = ArcParams.from_params(params, sigma=args.sigma, sigma0=args.sigma0)
    m = default_grid_size(params.N, args.grid_factor)
    summary_rows = []
    scans = []
    for b in params.units():
        t0 = time.perf_counter()
        grid = nu_grid(params, b, table, m)
        disc = discrepancy(grid)
        scan = major_arc_error_scan(params, b, table, arc=arc, grid=grid)
        fg = f_grid(params, b, spec, table, m)
        g_mean = fg.source.mean()
        log.info("b=%d scanned in %.1f s", b, time.perf_counter() - t0)
        summary_rows.append(
            (b, disc, scan.major_max, scan.minor_max if scan.minor_max is not None else "",
             scan.unit_arc_disc, scan.euler_maclaurin_max, g_mean)
        )
        scans.append(scan)
        reports.write_csv(
            os.path.join(args.out, f"arc_errors_b{b}.csv"),
            ("alpha_index", "kind", "q", "a", "abs_err_over_N"),
            scan.rows(),
        )
        if args.figures:
            figures.spectrum_figure(
                grid.alphas,
                scan.err_over_N,
                scan.q > 0,
                f"W={params.W} b={b} N={params.N}",
                os.path.join(args.out, f"spectrum_b{b}.png"),
            )
            figures.per_q_error_figure(
                scan.per_q_max,
                f"per-q model error, W={params.W} b={b}",
                os.path.join(args.out, f"per_q_b{b}.png"),
            )
    reports.write_csv(
        os.path.join(args.out, "spectrum_summary.csv"),
        ("b", "discrepancy", "major_max", "minor_max", "unit_arc_disc",
         "euler_maclaurin_max", "g_mean"),
        summary_rows,
    )
    doc = reports.payload(
        "spectrum_scan",
        config.to_json(),
        {"summaries": [s.summary() for s in scans],
         "discrepancies": [
             {"W": params.W, "b": row[0], "N": params.N, "discrepancy": row[1]}
             for row in summary_rows
         ]},
    )
    reports.write_json(os.path.join(args.out, "spectrum_summary.json"), doc)
    return EXIT_PASS


def cmd_restriction(args) -> int:
    config = _spectrum_config(args)
    params = config.params()
    spec = _parse_spec(args.spec)
    if args.b is not None and args.b not in params.units():
        raise UsageError(f"--b {args.b} is not a unit mod W={params.W}")
    b = args.b if args.b is not None else params.units()[0]
    table = load_or_sieve(params.sieve_limit)
    grid = f_grid(params, b, spec, table, default_grid_size(params.N, args.grid_factor))
    rhos = _float_list(args.rho)
    norm_rows = []
    for rho in rhos:
        val = lp_norm(grid, rho)
        norm_rows.append((rho, val, val / params.N ** (rho - 1)))
    scan = level_set_scaling_scan(
        params, b, spec, table,
        deltas=_float_list(args.delta),
        epsilon0=args.epsilon0,
        rho=rhos[0],
        grid=grid,
    )
    l4 = l4_check(params, b, spec, table, grid=grid)
    reports.write_csv(
        os.path.join(args.out, "restriction_norms.csv"),
        ("rho", "lp_norm", "normalized"),
        norm_rows,
    )
    delta_rows = [
        {"delta": r.delta, "measure": r.measure, "point_count": r.point_count,
         "measure_stat": r.measure_stat, "count_stat": r.count_stat}
        for r in scan.rows
    ]
    reports.write_csv(
        os.path.join(args.out, "restriction_levels.csv"),
        ("delta", "measure", "point_count", "measure_stat", "count_stat"),
        [(r["delta"], r["measure"], r["point_count"], r["measure_stat"], r["count_stat"])
         for r in delta_rows],
    )
    doc = reports.payload(
        "restriction",
        config.to_json(),
        {
            "b": b,
            "norms": [{"rho": r, "lp": v, "normalized": nv} for r, v, nv in norm_rows],
            "levels": delta_rows,
            "direct_lp": scan.direct_lp,
            "reassembled_lp": scan.reassembled_lp,
            "agreement": scan.agreement,
            "l4_ratio": l4.ratio,
        },
    )
    reports.write_json(os.path.join(args.out, "restriction.json"), doc)
    if args.figures:
        figures.restriction_figure(delta_rows, os.path.join(args.out, "restriction.png"))
    return EXIT_PASS


def cmd_represent(args) -> int:
    spec = _parse_spec(args.spec)
    lo, hi = _window(args.window)
    n_max = args.max if args.max is not None else hi
    if n_max < hi:
        raise UsageError(f"--max {n_max} below window top {hi}")
    table = load_or_sieve(n_max)
    try:
        rt = build_table(spec, n_max, table)
    except ValueError:
        log.warning("exact counts would overflow; rebuilding support-only")
        rt = build_table(spec, n_max, table, support_only=True)
    rep = verify_window(rt, lo, hi)
    doc = reports.payload(
        "representation_window",
        _config_doc(args, spec=spec.to_json()),
        {
            "spec": spec.to_json(),
            "lo": lo,
            "hi": hi,
            "evens_checked": rep.evens_checked,
            "exception_count": rep.exception_count,
            "exceptions": rep.exceptions[: args.max_exceptions],
        },
    )
    reports.write_json(os.path.join(args.out, "represent.json"), doc)
    reports.write_csv(
        os.path.join(args.out, "represent_exceptions.csv"),
        ("n", "mod2", "mod3", "mod5", "mod7", "mod11"),
        [
            (e["n"], e["residues"]["2"], e["residues"]["3"], e["residues"]["5"],
             e["residues"]["7"], e["residues"]["11"])
            for e in rep.exceptions
        ],
    )
    if args.figures:
        figures.window_figure(
            rep.exceptions, lo, hi,
            f"unrepresented evens, spec={spec.label()}",
            os.path.join(args.out, "represent.png"),
        )
    log.info("%d evens checked, %d exceptions", rep.evens_checked, rep.exception_count)
    return EXIT_PASS


def cmd_demo_transference(args) -> int:
    spec = _parse_spec(args.spec)
    params = WTrickParams.from_target(args.w, args.n0)
    table = load_or_sieve(max(params.sieve_limit, args.n0))
    rep = transference_demo(args.n0, spec, args.epsilon, w=args.w, table=table)
    doc = reports.payload(
        "transference_demo", _config_doc(args, spec=spec.to_json()), rep.to_json()
    )
    reports.write_json(os.path.join(args.out, "demo_transference.json"), doc)
    if rep.success:
        print(f"n0 = {rep.n0} decomposes with residues {list(rep.residues)} "
              f"(total g = {rep.g_total:.4f})")
        print(f"n' = {rep.n_prime} lies in ({rep.window[0]:.3f}, {rep.window[1]:.3f})")
        print(f"witness primes: {' + '.join(str(p) for p in rep.witness_primes)} = {rep.n0}")
        return EXIT_PASS
    print(f"demo failed at stage {rep.failed_stage}: {rep.diagnostics}")
    return EXIT_VIOLATION


def cmd_report(args) -> int:
    merged = reports.merge_reports(args.inputs)
    path = reports.write_json(os.path.join(args.out, "merged.json"), merged)
    log.info("merged %d reports into %s", len(merged["reports"]), path)
    if args.figures:
        figures.merged_overview_figure(merged, os.path.join(args.out, "merged.png"))
        trend_entries = []
        for entry in merged["reports"]:
            doc = entry["report"]
            if doc.get("kind") == "spectrum_scan":
                trend_entries.extend(doc.get("discrepancies", []))
        if trend_entries:
            figures.discrepancy_trend_figure(
                trend_entries, os.path.join(args.out, "discrepancy_trend.png")
            )
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def _config_doc(args, **extra) -> dict:
    doc = {
        "command": args.command,
        "seed": getattr(args, "seed", 0),
    }
    for key in ("q", "mode", "count", "w", "N", "n0", "spec", "epsilon", "sigma",
                "sigma0", "grid_factor", "rho", "delta", "epsilon0", "window", "max"):
        if hasattr(args, key) and getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    doc.update(extra)
    return doc


def _spectrum_config(args) -> ExperimentConfig:
    if (args.N is None) == (args.n0 is None):
        raise UsageError("exactly one of --N / --n0 is required")
    return ExperimentConfig(
        w=args.w,
        N=args.N,
        n0=args.n0,
        spec=_parse_spec(args.spec).to_json(),
        epsilon=getattr(args, "epsilon", None),
        sigma=getattr(args, "sigma", DEFAULT_SIGMA),
        sigma0=getattr(args, "sigma0", DEFAULT_SIGMA0),
        grid_factor=getattr(args, "grid_factor", DEFAULT_GRID_FACTOR),
        seed=args.seed,
        out=args.out,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adl",
        description="Additive density lab: sumset, spectral, restriction, "
        "and representation experiments over subsets of the primes.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="reports", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="RNG seed")
    common.add_argument("--threads", type=int, default=1, help="worker count")
    common.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True,
                        help="render PNG figures next to the delimited output")
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-sumset", parents=[common],
                       help="four-fold sumset cover verification in Z_q*")
    p.add_argument("--q", required=True, help="comma-separated square-free moduli")
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--count", type=int, default=None, help="sampled subsets per q")
    p.add_argument("--witness", action="store_true",
                   help="also search for threshold sharpness witnesses")
    p.set_defaults(func=cmd_verify_sumset)

    p = sub.add_parser("scan-spectrum", parents=[common],
                       help="transform grids, discrepancy, and arc-error scans")
    _add_progression_args(p)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--sigma0", type=float, default=DEFAULT_SIGMA0)
    p.set_defaults(func=cmd_scan_spectrum)

    p = sub.add_parser("restriction", parents=[common],
                       help="moment norms and level-set scaling")
    _add_progression_args(p)
    p.add_argument("--rho", default="5", help="comma-separated exponents (>= 2)")
    p.add_argument("--delta", default="0.5,0.25,0.125,0.0625",
                   help="comma-separated thresholds in (0, 1)")
    p.add_argument("--epsilon0", type=float, default=0.5)
    p.add_argument("--b", type=int, default=None, help="progression residue (unit mod W)")
    p.set_defaults(func=cmd_restriction)

    p = sub.add_parser("represent", parents=[common],
                       help="eight-fold representation window verification")
    p.add_argument("--spec", default="all")
    p.add_argument("--window", required=True, help="LO:HI window of even integers")
    p.add_argument("--max", type=int, default=None, help="table size (default window top)")
    p.add_argument("--max-exceptions", type=int, default=200,
                   help="cap on exceptions kept in the JSON report")
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("demo-transference", parents=[common],
                       help="end-to-end eight-prime decomposition of one target")
    p.add_argument("--n0", type=int, required=True, help="even target integer")
    p.add_argument("--w", type=int, default=3, help="smoothness cutoff")
    p.add_argument("--spec", default="all")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.set_defaults(func=cmd_demo_transference)

    p = sub.add_parser("report", parents=[common], help="merge JSON reports")
    p.add_argument("--inputs", nargs="+", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def _add_progression_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--w", type=int, default=3, help="smoothness cutoff (W = prod p <= w)")
    p.add_argument("--N", type=int, default=None, help="progression length")
    p.add_argument("--n0", type=int, default=None, help="target (sets N = n0 / 4W)")
    p.add_argument("--spec", default="all", help="'all', 'modM-R[,R..]', or JSON")
    p.add_argument("--grid-factor", type=int, default=DEFAULT_GRID_FACTOR,
                   dest="grid_factor")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
