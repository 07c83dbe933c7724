"""W-trick weight functions on arithmetic progressions.

For a smoothness cutoff w, W is the product of the primes up to w and the
progression Wn + b (b a unit mod W) is scanned for n in [N].  A weight
vector assigns (phi(W)/W) * log(Wn+b) to indices where Wn + b is a prime
(optionally restricted to a prime subset), and 0 elsewhere.  Means of
these vectors feed the eight-residue selection that underpins the
transference demo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .primes import PrimeTable, euler_phi
from .residues import EightSumWitness, eight_sum_search
from .subsets import PrimeSubsetSpec, density_estimate


def compute_W(w: int) -> int:
    """Product of all primes in (1, w]; w must be at least 2."""
    if w < 2:
        raise ValueError("cutoff w must be >= 2 so that 2 | W")
    out = 1
    for p in range(2, w + 1):
        if all(p % d for d in range(2, int(p ** 0.5) + 1)):
            out *= p
    return out


@dataclass(frozen=True)
class WTrickParams:
    """Progression parameters: cutoff w, W = prod primes <= w, length N.

    When built from a target n0, N = floor(n0 / (4W)).
    """

    w: int
    W: int
    N: int
    n0: int | None = None

    @classmethod
    def from_length(cls, w: int, N: int) -> "WTrickParams":
        if N < 1:
            raise ValueError("N must be positive")
        return cls(w=w, W=compute_W(w), N=int(N))

    @classmethod
    def from_target(cls, w: int, n0: int) -> "WTrickParams":
        W = compute_W(w)
        N = n0 // (4 * W)
        if N < 1:
            raise ValueError(f"target n0={n0} too small for w={w}")
        return cls(w=w, W=W, N=N, n0=int(n0))

    @property
    def sieve_limit(self) -> int:
        return self.W * self.N + self.W

    @property
    def phi_W(self) -> int:
        return euler_phi(self.W)

    def units(self) -> list[int]:
        return [b for b in range(1, self.W + 1) if math.gcd(b, self.W) == 1]

    @property
    def log_scale(self) -> float:
        """L = log(WN + W), the running log scale."""
        return math.log(self.sieve_limit)


@dataclass
class WeightVector:
    """Values of f_b or nu_b on [N]; index i holds the value at n = i + 1."""

    params: WTrickParams
    b: int
    values: np.ndarray
    flavor: str  # "f" (subset-restricted) or "nu" (all primes)

    def mean(self) -> float:
        return float(self.values.mean())

    def total(self) -> float:
        return float(self.values.sum())


def build_weight(
    params: WTrickParams,
    b: int,
    spec: PrimeSubsetSpec | None,
    table: PrimeTable,
) -> WeightVector:
    """Weight vector on [N]: (phi(W)/W) log(Wn+b) at prime points.

    With spec=None every prime counts (flavor nu); otherwise only primes
    in the subset contribute (flavor f).
    """
    W, N = params.W, params.N
    if not 1 <= b <= W or math.gcd(b, W) != 1:
        raise ValueError(f"b={b} is not a unit mod W={W}")
    if table.limit < params.sieve_limit:
        raise ValueError(
            f"sieve limit {table.limit} below required {params.sieve_limit}"
        )
    n = np.arange(1, N + 1, dtype=np.int64)
    x = W * n + b
    keep = table.contains(x)
    if spec is not None:
        keep = keep & spec.mask(x)
    scale = params.phi_W / W
    values = np.where(keep, scale * np.log(x), 0.0)
    return WeightVector(params=params, b=b, values=values, flavor="nu" if spec is None else "f")


def weight_mean(v: WeightVector) -> float:
    """Arithmetic mean over [N]; approximately 1 for flavor nu."""
    return v.mean()


def g_by_unit(
    params: WTrickParams, spec: PrimeSubsetSpec, table: PrimeTable
) -> dict[int, float]:
    """g(b, N) = mean of f_b, for every unit b mod W."""
    return {b: build_weight(params, b, spec, table).mean() for b in params.units()}


@dataclass
class UnitMeanReport:
    """Mean of g over the units, with the partial-log-sum lower bound."""

    value: float
    lower_bound: float
    by_unit: dict[int, float]


def mean_over_units(
    params: WTrickParams, spec: PrimeSubsetSpec, table: PrimeTable
) -> UnitMeanReport:
    """Average of g(b, N) over b in Z_W*, checked against the explicit
    lower bound (1/WN) * sum of log p over subset primes in (2W, WN+1].
    """
    by_unit = g_by_unit(params, spec, table)
    value = float(np.mean(list(by_unit.values())))
    W, N = params.W, params.N
    primes = table.upto(W * N + 1)
    primes = primes[primes > 2 * W]
    primes = primes[spec.mask(primes)]
    bound = float(np.log(primes).sum() / (W * N)) if primes.size else 0.0
    if value < bound - 1e-12:
        raise RuntimeError(
            f"unit mean {value} fell below its partial-sum bound {bound}"
        )
    return UnitMeanReport(value=value, lower_bound=bound, by_unit=by_unit)


@dataclass
class HTransformResult:
    """Clipped normalized means h(b) plus a validity flag.

    ``clipped`` is True when some pre-clip value reached 1, which means N
    was too small for the chosen epsilon.
    """

    values: dict[int, float]
    clipped: bool


def h_transform(g_values: Mapping[int, float], epsilon: float) -> HTransformResult:
    """h(b) = max(0, (g(b) - eps/2) / (1 + eps)), clipped into [0, 1)."""
    if not 0 < epsilon < 1 / 6:
        raise ValueError("epsilon must lie in (0, 1/6)")
    top = math.nextafter(1.0, 0.0)
    out = {}
    clipped = False
    for b, g in g_values.items():
        h = max(0.0, (g - epsilon / 2) / (1 + epsilon))
        if h >= 1.0 - 1e-12:  # effectively 1 given rounding: N too small for epsilon
            clipped = True
            h = min(h, top)
        out[int(b)] = h
    return HTransformResult(values=out, clipped=clipped)


class WitnessSearchError(RuntimeError):
    """Raised when no admissible eight-residue witness exists; carries the
    mean of h so callers can see how far the hypothesis fails."""

    def __init__(self, message: str, mean_h: float, diagnostics: dict | None = None):
        super().__init__(message)
        self.mean_h = mean_h
        self.diagnostics = diagnostics or {}


def select_eight_residues(
    params: WTrickParams,
    spec: PrimeSubsetSpec,
    epsilon: float,
    n: int,
    table: PrimeTable,
) -> EightSumWitness:
    """Find b_1..b_8 in Z_W* with n = sum b_i (mod W), each g(b_i) > eps/2,
    and total g beyond 4(1 + eps).

    Works by the h-transform of the unit means followed by the eight-fold
    DP; the returned witness carries the g-scale weights.  Raises
    WitnessSearchError (with mean h attached) when the search fails, which
    at finite scale diagnoses a density hypothesis violation.
    """
    g = g_by_unit(params, spec, table)
    ht = h_transform(g, epsilon)
    mean_h = float(np.mean(list(ht.values.values())))
    found = eight_sum_search(ht.values, n % params.W, params.W)
    if found is None:
        dens = density_estimate(spec, min(params.sieve_limit, table.limit), table)
        raise WitnessSearchError(
            f"no eight-residue witness for n={n} mod {params.W}",
            mean_h=mean_h,
            diagnostics={
                "mean_h": mean_h,
                "density": dens,
                "support": sorted(b for b, v in ht.values.items() if v > 0),
                "target_mod_W": n % params.W,
            },
        )
    weights = tuple(g[b] for b in found.residues)
    total = float(sum(weights))
    if not (total > 4 * (1 + epsilon)) or min(weights) <= epsilon / 2:
        raise WitnessSearchError(
            "witness failed g-scale translation checks",
            mean_h=mean_h,
            diagnostics={"total_g": total, "weights": weights},
        )
    return EightSumWitness(found.residues, weights, total)
