"""Moment norms and level sets of weight-vector transforms.

The torus integral of |S|^rho is estimated by the Riemann sum over the
oversampled grid; at rho = 2 this is exact (discrete Parseval), and at
rho = 4 with M >= 2N it exactly equals the additive-quadruple sum, which
the tests exploit as a brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .primes import PrimeTable
from .spectral import SpectralGrid, f_grid
from .subsets import PrimeSubsetSpec
from .wtrick import WTrickParams


def lp_norm(grid: SpectralGrid, rho: float) -> float:
    """(1/M) sum_k |S(k/M)|^rho, the grid estimate of the torus integral."""
    if rho < 2:
        raise ValueError("rho must be at least 2")
    return float((np.abs(grid.values) ** rho).sum() / grid.M)


@dataclass
class L4Report:
    """Fourth-moment ratio against the N^3 L^2 envelope."""

    W: int
    b: int
    N: int
    lp4: float
    envelope: float
    ratio: float


def l4_check(
    params: WTrickParams,
    b: int,
    spec: PrimeSubsetSpec,
    table: PrimeTable,
    grid: SpectralGrid | None = None,
) -> L4Report:
    """Ratio of the fourth moment of f_b to N^3 L^2 (L = log(WN + W))."""
    if grid is None:
        grid = f_grid(params, b, spec, table)
    val = lp_norm(grid, 4)
    envelope = params.N ** 3 * params.log_scale ** 2
    return L4Report(
        W=params.W, b=b, N=params.N, lp4=val, envelope=envelope, ratio=val / envelope
    )


@dataclass
class LevelSetReport:
    """Superlevel set {alpha : |S(alpha)| > delta N} on the grid.

    measure is the covered grid fraction; point_count is the size of the
    greedy 1/N-separated thinning of the covered points.
    """

    delta: float
    measure: float
    point_count: int


def level_set(grid: SpectralGrid, delta: float, n: int) -> LevelSetReport:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    mags = np.abs(grid.values)
    above = np.nonzero(mags > delta * n)[0]
    measure = above.size / grid.M
    # greedy left-to-right thinning at spacing 1/N, torus wrap checked last
    spacing = grid.M / n
    kept: list[int] = []
    last = -math.inf
    for k in above.tolist():
        if k - last >= spacing:
            kept.append(k)
            last = k
    if len(kept) > 1 and (kept[0] + grid.M) - kept[-1] < spacing:
        kept.pop()
    return LevelSetReport(delta=float(delta), measure=float(measure), point_count=len(kept))


@dataclass
class ScalingRow:
    delta: float
    measure: float
    point_count: int
    measure_stat: float  # measure * delta^(4+eps0) * N
    count_stat: float  # R * delta^(4+eps0)


@dataclass
class ScalingReport:
    rho: float
    epsilon0: float
    rows: list[ScalingRow]
    direct_lp: float
    reassembled_lp: float

    @property
    def agreement(self) -> float:
        """Reassembled over direct; quadrature slack keeps this near 1."""
        if self.direct_lp == 0:
            return 1.0 if self.reassembled_lp == 0 else math.inf
        return self.reassembled_lp / self.direct_lp


def dyadic_reassembly(grid: SpectralGrid, rho: float) -> float:
    """Reassemble the rho-th moment from dyadic level-set measures.

    Uses the layer-cake identity: the integral of |S|^rho equals the
    integral of rho t^(rho-1) m(t) dt with m(t) the measure above level
    t.  Trapezoidal quadrature in m on thresholds N/2^j keeps the peak
    band honest; the stub below the last threshold is bounded by its
    level and added explicitly.
    """
    n = grid.N
    mags = np.abs(grid.values)
    thresholds = [n / 2 ** j for j in range(0, 64)]
    floor = float(mags[mags > 0].min()) if (mags > 0).any() else 0.0
    total = 0.0
    prev_t = thresholds[0]
    prev_m = float((mags > prev_t).sum() / grid.M)
    for t in thresholds[1:]:
        m = float((mags > t).sum() / grid.M)
        total += (prev_t ** rho - t ** rho) * (prev_m + m) / 2
        prev_t, prev_m = t, m
        if t < floor:
            break
    total += prev_t ** rho * prev_m
    return total


def level_set_scaling_scan(
    params: WTrickParams,
    b: int,
    spec: PrimeSubsetSpec,
    table: PrimeTable,
    deltas,
    epsilon0: float = 0.5,
    rho: float = 5.0,
    grid: SpectralGrid | None = None,
) -> ScalingReport:
    """Tabulate normalized level-set statistics over the delta list and
    cross-check the rho-th moment against its dyadic reassembly."""
    if epsilon0 <= 0:
        raise ValueError("epsilon0 must be positive")
    if grid is None:
        grid = f_grid(params, b, spec, table)
    n = params.N
    rows = []
    for delta in deltas:
        rep = level_set(grid, delta, n)
        power = delta ** (4 + epsilon0)
        rows.append(
            ScalingRow(
                delta=float(delta),
                measure=rep.measure,
                point_count=rep.point_count,
                measure_stat=rep.measure * power * n,
                count_stat=rep.point_count * power,
            )
        )
    direct = lp_norm(grid, rho)
    reassembled = dyadic_reassembly(grid, rho)
    return ScalingReport(
        rho=rho,
        epsilon0=epsilon0,
        rows=rows,
        direct_lp=direct,
        reassembled_lp=reassembled,
    )
