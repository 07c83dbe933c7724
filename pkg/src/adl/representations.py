"""Additive representation tables: sums of 2, 4, and 8 subset primes.

Pair counts use the ordered-tuple convention throughout (convolution
native), so r2[n] counts (p, p') and (p', p) separately.  Exact counts
are built by FFT convolution with a nearest-integer verification pass
that fails loudly instead of silently corrupting counts; eight-fold
counts are never stored, only their support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .primes import PrimeTable
from .residues import EightSumWitness, eight_sum_search_totals
from .subsets import PrimeSubsetSpec, density_estimate
from .wtrick import WTrickParams, g_by_unit, h_transform

# Exact doubles hold integers up to 2^53; counts are bounded by pi(n)^3.
_COUNT_SAFE = float(2 ** 53)
ORACLE_LIMIT = 400


def _rounded_counts(raw: np.ndarray, what: str) -> np.ndarray:
    counts = np.rint(raw)
    residual = float(np.abs(raw - counts).max()) if raw.size else 0.0
    if residual >= 0.25:
        raise RuntimeError(
            f"{what}: convolution residual {residual:.3f} too large for exact counts"
        )
    return counts.astype(np.int64)


@dataclass
class RepresentationTable:
    """Counts/support of two-, four-, and eight-fold sums up to n_max."""

    spec: PrimeSubsetSpec
    n_max: int
    r2: np.ndarray | None
    r4: np.ndarray | None
    r2_support: np.ndarray = field(repr=False, default=None)
    r4_support: np.ndarray = field(repr=False, default=None)
    r8_support: np.ndarray = field(repr=False, default=None)
    prime_indicator: np.ndarray = field(repr=False, default=None)


def build_table(
    spec: PrimeSubsetSpec,
    n_max: int,
    table: PrimeTable,
    support_only: bool = False,
) -> RepresentationTable:
    """Build r2, r4 (exact ordered counts) and the eight-fold support.

    support_only skips the exact count arrays, which also lifts the
    overflow guard (counts beyond 2^53 cannot be trusted in doubles).
    """
    if n_max < 16:
        raise ValueError("n_max must be at least 16")
    members = spec.member_primes(table, n_max)
    ind = np.zeros(n_max + 1)
    ind[members] = 1.0

    if not support_only:
        bound = float(table.count_upto(n_max)) ** 3
        if bound >= _COUNT_SAFE:
            raise ValueError(
                f"counts up to pi({n_max})^3 = {bound:.2e} may overflow exact doubles; "
                "rebuild with support_only=True"
            )

    raw2 = fftconvolve(ind, ind)[: n_max + 1]
    s2 = raw2 > 0.5
    s4 = fftconvolve(s2.astype(float), s2.astype(float))[: n_max + 1] > 0.5
    s8 = fftconvolve(s4.astype(float), s4.astype(float))[: n_max + 1] > 0.5

    r2 = r4 = None
    if not support_only:
        r2 = _rounded_counts(raw2, "r2")
        r4 = _rounded_counts(
            fftconvolve(r2.astype(float), r2.astype(float))[: n_max + 1], "r4"
        )
    return RepresentationTable(
        spec=spec,
        n_max=n_max,
        r2=r2,
        r4=r4,
        r2_support=s2,
        r4_support=s4,
        r8_support=s8,
        prime_indicator=ind > 0.5,
    )


@dataclass
class WindowReport:
    """Even integers in [lo, hi] missing an eight-fold representation."""

    spec_label: str
    lo: int
    hi: int
    evens_checked: int
    exceptions: list[dict]

    @property
    def exception_count(self) -> int:
        return len(self.exceptions)


def verify_window(rt: RepresentationTable, lo: int, hi: int) -> WindowReport:
    """List even n in [lo, hi] with empty eight-fold support, with the
    residues of each exception modulo small primes as diagnostics."""
    if hi > rt.n_max:
        raise ValueError(f"window top {hi} beyond table size {rt.n_max}")
    start = lo + (lo % 2)
    evens = np.arange(start, hi + 1, 2, dtype=np.int64)
    missing = evens[~rt.r8_support[evens]]
    exceptions = [
        {"n": int(n), "residues": {str(p): int(n % p) for p in (2, 3, 5, 7, 11)}}
        for n in missing.tolist()
    ]
    return WindowReport(
        spec_label=rt.spec.label(),
        lo=lo,
        hi=hi,
        evens_checked=int(evens.size),
        exceptions=exceptions,
    )


def _counter(spec: PrimeSubsetSpec, n: int, table: PrimeTable):
    members = [int(p) for p in spec.member_primes(table, n)]

    @lru_cache(maxsize=None)
    def count(t: int, depth: int) -> int:
        if depth == 0:
            return 1 if t == 0 else 0
        total = 0
        for p in members:
            if p > t:
                break
            total += count(t - p, depth - 1)
        return total

    return count


def r8_count_small(spec: PrimeSubsetSpec, n: int, table: PrimeTable) -> int:
    """Exact ordered eight-tuple count by depth-8 recursion (n <= 400)."""
    if n > ORACLE_LIMIT:
        raise ValueError(f"recursion oracle limited to n <= {ORACLE_LIMIT}")
    return _counter(spec, n, table)(n, 8)


def r4_count_small(spec: PrimeSubsetSpec, n: int, table: PrimeTable) -> int:
    """Depth-4 variant of the recursion oracle."""
    if n > ORACLE_LIMIT:
        raise ValueError(f"recursion oracle limited to n <= {ORACLE_LIMIT}")
    return _counter(spec, n, table)(n, 4)


def representation_witness(rt: RepresentationTable, n: int) -> tuple[int, ...] | None:
    """One eight-tuple of subset primes summing to n, or None.

    Splits greedily: n into two four-fold halves, each half into two
    pair sums, each pair into primes, always taking the smallest summand.
    """
    if n > rt.n_max or not rt.r8_support[n]:
        return None

    def split(total: int, support: np.ndarray) -> tuple[int, int]:
        idx = np.nonzero(support[: total + 1] & support[total::-1])[0]
        s = int(idx[0])
        return s, total - s

    def pair(total: int) -> tuple[int, int]:
        ind = rt.prime_indicator
        idx = np.nonzero(ind[: total + 1] & ind[total::-1])[0]
        p = int(idx[0])
        return p, total - p

    left4, right4 = split(n, rt.r4_support)
    out = []
    for quad in (left4, right4):
        l2, r2 = split(quad, rt.r2_support)
        for duo in (l2, r2):
            out.extend(pair(duo))
    assert sum(out) == n
    return tuple(out)


# ---------------------------------------------------------------------------
# End-to-end transference demo
# ---------------------------------------------------------------------------


@dataclass
class TransferenceReport:
    """Structured outcome of the eight-prime decomposition pipeline."""

    n0: int
    w: int
    W: int
    N: int
    epsilon: float
    kappa: float
    density: float
    window: tuple[float, float]
    success: bool
    failed_stage: str | None = None
    mean_h: float | None = None
    residues: tuple[int, ...] | None = None
    g_weights: tuple[float, ...] | None = None
    g_total: float | None = None
    n_prime: int | None = None
    witness_primes: tuple[int, ...] | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n0": self.n0,
            "w": self.w,
            "W": self.W,
            "N": self.N,
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "density": self.density,
            "window": list(self.window),
            "success": self.success,
            "failed_stage": self.failed_stage,
            "mean_h": self.mean_h,
            "residues": list(self.residues) if self.residues else None,
            "g_weights": list(self.g_weights) if self.g_weights else None,
            "g_total": self.g_total,
            "n_prime": self.n_prime,
            "witness_primes": list(self.witness_primes) if self.witness_primes else None,
            "diagnostics": self.diagnostics,
        }


def transference_demo(
    n0: int,
    spec: PrimeSubsetSpec,
    epsilon: float,
    w: int = 3,
    table: PrimeTable | None = None,
) -> TransferenceReport:
    """Decompose n0 as Wn' + b_1 + .. + b_8 with the b_i produced by the
    eight-residue selection, place n' inside the kappa-window around 4N
    (kappa = epsilon/32), and confirm n0 against the representation table.

    Any failing stage is reported by name with diagnostics rather than
    raised; only precondition violations raise.
    """
    if n0 % 2 != 0:
        raise ValueError(f"target n0={n0} must be even")
    params = WTrickParams.from_target(w, n0)
    if params.N < 1000:
        raise ValueError(f"N = {params.N} below the minimum scale 1000")
    if table is None:
        from .primes import load_or_sieve

        table = load_or_sieve(max(params.sieve_limit, n0))

    W, N = params.W, params.N
    kappa = epsilon / 32
    lo, hi = 4 * (1 - kappa ** 2) * N, 4 * (1 + kappa) * N
    density = density_estimate(spec, min(params.sieve_limit, table.limit), table)
    report = TransferenceReport(
        n0=n0,
        w=w,
        W=W,
        N=N,
        epsilon=epsilon,
        kappa=kappa,
        density=density,
        window=(lo, hi),
        success=False,
    )
    report.diagnostics["density_hypothesis"] = density > 0.5 + 3 * epsilon

    g = g_by_unit(params, spec, table)
    ht = h_transform(g, epsilon)
    report.mean_h = float(np.mean(list(ht.values.values())))

    # admissible exact residue totals: s = n0 (mod W) with (n0 - s)/W in the window
    s_min = max(8, math.ceil(n0 - W * hi))
    s_max = min(8 * (W - 1), math.floor(n0 - W * lo))
    allowed = [s for s in range(s_min, s_max + 1) if (n0 - s) % W == 0]
    report.diagnostics["allowed_totals"] = allowed

    found = eight_sum_search_totals(ht.values, W, allowed)
    if found is None:
        unconstrained = eight_sum_search_totals(
            ht.values, W, [s for s in range(8, 8 * (W - 1) + 1) if (n0 - s) % W == 0]
        )
        report.failed_stage = (
            "window_placement" if unconstrained is not None else "residue_selection"
        )
        report.diagnostics.update(
            {
                "support": sorted(b for b, v in ht.values.items() if v > 0),
                "target_mod_W": n0 % W,
            }
        )
        return report

    weights = tuple(g[b] for b in found.residues)
    total = float(sum(weights))
    if not (total > 4 * (1 + epsilon)) or min(weights) <= epsilon / 2:
        report.failed_stage = "mean_translation"
        report.diagnostics.update({"g_total": total, "g_weights": weights})
        return report
    witness = EightSumWitness(found.residues, weights, total)
    report.residues = witness.residues
    report.g_weights = witness.weights
    report.g_total = witness.total

    s = sum(witness.residues)
    if (n0 - s) % W != 0:
        report.failed_stage = "congruence"
        return report
    n_prime = (n0 - s) // W
    report.n_prime = n_prime
    if not (lo < n_prime < hi):
        report.failed_stage = "window_placement"
        return report

    rt = build_table(spec, n0, table, support_only=True)
    if not rt.r8_support[n0]:
        report.failed_stage = "representation"
        report.diagnostics["n0_residues"] = {
            str(p): int(n0 % p) for p in (2, 3, 5, 7, 11)
        }
        return report
    report.witness_primes = representation_witness(rt, n0)
    report.success = True
    return report
