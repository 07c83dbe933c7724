"""Fourier analysis of weight vectors on the torus.

Grids hold the transform S(k/M) = sum_n v(n) e(nk/M) on an oversampled
power-of-two grid (e(x) = exp(2 pi i x)).  The arc machinery classifies
torus points into neighborhoods of low-denominator rationals and
evaluates the main-term model phi(W)/phi(Wq) * S_q*(a,b) * I(beta) there.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .primes import PrimeTable, euler_phi, factorize, is_square_free, mobius
from .subsets import PrimeSubsetSpec
from .wtrick import WTrickParams, WeightVector, build_weight

log = logging.getLogger(__name__)

DEFAULT_GRID_FACTOR = 8
DEFAULT_SIGMA = 3.0
DEFAULT_SIGMA0 = 1.0


def default_grid_size(n: int, factor: int = DEFAULT_GRID_FACTOR) -> int:
    """factor * (smallest power of two >= n); factor must be a power of two."""
    if factor < 2 or factor & (factor - 1):
        raise ValueError("grid factor must be a power of two >= 2")
    return factor * (1 << (int(n) - 1).bit_length())


@dataclass
class SpectralGrid:
    """Transform values of a weight vector on the M-point torus grid."""

    M: int
    values: np.ndarray
    source: WeightVector

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    @property
    def N(self) -> int:
        return self.source.params.N


def transform(v: WeightVector, M: int | None = None) -> SpectralGrid:
    """Zero-padded FFT evaluation of the transform on the M-point grid.

    M must be a power of two with M >= 2N (the oversampling makes the
    grid supremum a faithful proxy for the torus supremum).
    """
    N = v.params.N
    if M is None:
        M = default_grid_size(N)
    M = int(M)
    if M < 2 * N:
        raise ValueError(f"grid size {M} below 2N = {2 * N} would alias")
    if M & (M - 1):
        raise ValueError(f"grid size {M} is not a power of two")
    buf = np.zeros(M)
    buf[1 : N + 1] = v.values
    # fft uses e(-nk/M); the conjugate flips the sign for real input
    return SpectralGrid(M=M, values=np.conj(np.fft.fft(buf)), source=v)


def nu_grid(
    params: WTrickParams, b: int, table: PrimeTable, M: int | None = None
) -> SpectralGrid:
    """Grid of the all-primes weight nu_b."""
    return transform(build_weight(params, b, None, table), M)


def f_grid(
    params: WTrickParams,
    b: int,
    spec: PrimeSubsetSpec,
    table: PrimeTable,
    M: int | None = None,
) -> SpectralGrid:
    """Grid of the subset-restricted weight f_b."""
    return transform(build_weight(params, b, spec, table), M)


def indicator_hat(alpha, n: int):
    """Closed form of sum_{m=1..n} e(m alpha); equals n at integer alpha.

    Uses the Dirichlet-kernel form e(alpha (n+1)/2) sin(pi n alpha) /
    sin(pi alpha), which is stable near the integers.
    """
    a = np.asarray(alpha, dtype=float)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    out = np.empty(a.shape, dtype=complex)
    s = np.sin(np.pi * a)
    degenerate = s == 0.0
    out[degenerate] = n
    nd = ~degenerate
    out[nd] = (
        np.exp(2j * np.pi * a[nd] * (n + 1) / 2) * np.sin(np.pi * n * a[nd]) / s[nd]
    )
    return complex(out[0]) if scalar else out


def discrepancy(grid: SpectralGrid) -> float:
    """max_k |S(k/M) - indicator_hat(k/M)| / N over the whole grid."""
    n = grid.N
    return float(np.abs(grid.values - indicator_hat(grid.alphas, n)).max() / n)


def pseudorandomness_discrepancy(
    params: WTrickParams, b: int, table: PrimeTable, M: int | None = None
) -> float:
    """Discrepancy of the all-primes weight nu_b against the interval."""
    return discrepancy(nu_grid(params, b, table, M))


# ---------------------------------------------------------------------------
# Arc dissection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcParams:
    """Dissection parameters: arcs sit around a/q for q <= Q_arc with
    half-width L^sigma / (WN), where L = log(WN + W)."""

    L: float
    sigma: float
    sigma0: float
    Q_arc: int
    half_width: float

    @classmethod
    def from_params(
        cls,
        params: WTrickParams,
        sigma: float = DEFAULT_SIGMA,
        sigma0: float = DEFAULT_SIGMA0,
    ) -> "ArcParams":
        if sigma <= 0 or sigma0 <= 0:
            raise ValueError("sigma and sigma0 must be positive")
        L = params.log_scale
        return cls(
            L=L,
            sigma=sigma,
            sigma0=sigma0,
            Q_arc=int(L ** sigma),
            half_width=L ** sigma / (params.W * params.N),
        )


@dataclass(frozen=True)
class ArcLabel:
    kind: str  # "major" or "minor"
    q: int | None = None
    a: int | None = None
    beta: float | None = None

    @property
    def is_major(self) -> bool:
        return self.kind == "major"


def classify(alpha: float, arc: ArcParams) -> ArcLabel:
    """Label a torus point: the containing window with the lowest q wins,
    then the lowest residue a; otherwise minor.

    Windows of non-reduced fractions coincide with windows at smaller q
    (the half-width does not depend on q), so only reduced candidates are
    examined at each level.
    """
    alpha = float(alpha) % 1.0
    hw = arc.half_width
    for q in range(1, arc.Q_arc + 1):
        klo = math.ceil(q * alpha - q * hw)
        khi = math.floor(q * alpha + q * hw)
        best_a, best_k = None, None
        for k in range(klo, khi + 1):
            a = k % q if q > 1 else 0
            if q > 1 and math.gcd(a, q) != 1:
                continue
            if best_a is None or a < best_a:
                best_a, best_k = a, k
        if best_a is not None:
            return ArcLabel(kind="major", q=q, a=best_a, beta=alpha - best_k / q)
    return ArcLabel(kind="minor")


def classify_grid(
    alphas: np.ndarray, arc: ArcParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Vectorized `classify` over many points.

    Returns (q, a, beta, overlap_points) where q = 0 marks minor points
    and overlap_points counts points whose winning level q admitted more
    than one window (these overlaps are also logged).
    """
    alphas = np.asarray(alphas, dtype=float) % 1.0
    m = alphas.size
    q_out = np.zeros(m, dtype=np.int64)
    a_out = np.zeros(m, dtype=np.int64)
    beta_out = np.zeros(m)
    overlap = 0
    unresolved = np.arange(m)
    hw = arc.half_width
    for q in range(1, arc.Q_arc + 1):
        if unresolved.size == 0:
            break
        al = alphas[unresolved]
        klo = np.ceil(q * al - q * hw).astype(np.int64)
        khi = np.floor(q * al + q * hw).astype(np.int64)
        span = int((khi - klo).max()) + 1 if unresolved.size else 0
        best_a = np.full(al.shape, q, dtype=np.int64)  # sentinel: q is invalid
        best_k = np.zeros(al.shape, dtype=np.int64)
        hits = np.zeros(al.shape, dtype=np.int64)
        for j in range(span):
            k = klo + j
            live = k <= khi
            a = k % q if q > 1 else np.zeros_like(k)
            valid = live & ((np.gcd(a, q) == 1) | (q == 1))
            hits += valid
            better = valid & (a < best_a)
            best_a[better] = a[better]
            best_k[better] = k[better]
        found = best_a < q if q > 1 else hits > 0
        idx = unresolved[found]
        q_out[idx] = q
        a_out[idx] = best_a[found] % q
        beta_out[idx] = al[found] - best_k[found] / q
        overlap += int((hits[found] > 1).sum())
        unresolved = unresolved[~found]
    if overlap:
        log.info("arc classification: %d points lay in overlapping windows", overlap)
    return q_out, a_out, beta_out, overlap


# ---------------------------------------------------------------------------
# Exponential sums and the major-arc model
# ---------------------------------------------------------------------------


def s_q_star(q: int, a: int, b: int, W: int) -> complex:
    """S_q*(a, b) = sum over r < q with gcd(b + Wr, q) = 1 of e(ar/q)."""
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(b, W) != 1:
        raise ValueError(f"b={b} is not a unit mod W={W}")
    if math.gcd(a % q if q > 1 else 0, q) != 1 and q > 1:
        raise ValueError(f"a={a} is not reduced mod q={q}")
    r = np.arange(q, dtype=np.int64)
    keep = np.gcd(b + W * r, q) == 1
    return complex(np.exp(2j * np.pi * a * r[keep] / q).sum())


def _v_q(q: int, a: int, b: int, W: int) -> complex:
    # V_q(a,b) = sum e_{Wq}(a(b + Wr)) over the same r; equals
    # e_{Wq}(ab) * S_q*(a,b), which is unit-tested rather than exported.
    r = np.arange(q, dtype=np.int64)
    keep = np.gcd(b + W * r, q) == 1
    return complex(np.exp(2j * np.pi * a * (b + W * r[keep]) / (W * q)).sum())


@dataclass
class CrtFactors:
    """Smooth/coprime split q = u v with both sides of the product rule."""

    q: int
    u: int
    v: int
    a1: int
    a2: int
    product: complex
    direct: complex


def crt_factor(q: int, a: int, b: int, W: int) -> CrtFactors:
    """Split q = u v (u built from primes dividing W, gcd(v, W) = 1) and
    check S_q* = S_u* S_v* plus the structural values of both factors:
    S_u* is 1 exactly when u = 1 and 0 otherwise, and |S_v*| = |mu(v)|
    for square-free v.
    """
    u = 1
    rest = q
    for p, _ in factorize(W):
        while rest % p == 0:
            u *= p
            rest //= p
    v = q // u
    if u == 1:
        a1 = 0
    else:
        vbar = pow(v, -1, u)
        a1 = (a * vbar) % u
    if v == 1:
        a2 = 0
    else:
        ubar = pow(u, -1, v)
        a2 = (a * ubar) % v
    s_u = s_q_star(u, a1, b, W) if u > 1 else complex(1.0)
    s_v = s_q_star(v, a2, b, W) if v > 1 else complex(1.0)
    direct = s_q_star(q, a, b, W)
    product = s_u * s_v
    if abs(product - direct) > 1e-9:
        raise RuntimeError(
            f"CRT product {product} disagrees with direct sum {direct} at q={q}"
        )
    expected_u = 1.0 if u == 1 else 0.0
    if abs(s_u - expected_u) > 1e-9:
        raise RuntimeError(f"smooth factor S_u* = {s_u} differs from {expected_u}")
    if is_square_free(v) and abs(abs(s_v) - abs(mobius(v))) > 1e-9:
        raise RuntimeError(f"|S_v*| = {abs(s_v)} differs from |mu({v})| = {abs(mobius(v))}")
    return CrtFactors(q=q, u=u, v=v, a1=a1, a2=a2, product=product, direct=direct)


def i_beta(beta, n: int):
    """I(beta) = integral of e(beta t) over [0, N]; N at beta = 0.

    Implemented as N sinc(N beta) e(N beta / 2), which is the exact value
    and satisfies |I| <= min(N, 1 / (pi |beta|)).
    """
    beta = np.asarray(beta, dtype=float)
    scalar = beta.ndim == 0
    beta = np.atleast_1d(beta)
    out = n * np.sinc(n * beta) * np.exp(1j * np.pi * n * beta)
    return complex(out[0]) if scalar else out


def major_arc_model(label: ArcLabel, params: WTrickParams, b: int) -> complex:
    """Main term phi(W)/phi(Wq) * S_q*(a, b) * I(beta) at a major point."""
    if not label.is_major:
        raise ValueError("model is defined on major arcs only")
    W = params.W
    scale = euler_phi(W) / euler_phi(W * label.q)
    return scale * s_q_star(label.q, label.a, b, W) * i_beta(label.beta, params.N)


@dataclass
class ArcScanReport:
    """Per-point arc errors for one (W, b, N) grid."""

    W: int
    b: int
    N: int
    M: int
    sigma: float
    sigma0: float
    q: np.ndarray
    a: np.ndarray
    beta: np.ndarray
    err_over_N: np.ndarray
    per_q_max: dict[int, float] = field(default_factory=dict)
    unit_arc_disc: float = 0.0
    euler_maclaurin_max: float = 0.0
    minor_max: float | None = None
    overlap_points: int = 0

    @property
    def major_max(self) -> float:
        major = self.q > 0
        return float(self.err_over_N[major].max()) if major.any() else 0.0

    def rows(self):
        """(alpha_index, kind, q, a, err/N) tuples for CSV emission."""
        for k in range(self.M):
            qk = int(self.q[k])
            kind = "major" if qk else "minor"
            yield (k, kind, qk or "", int(self.a[k]) if qk else "", float(self.err_over_N[k]))

    def summary(self) -> dict:
        return {
            "W": self.W,
            "b": self.b,
            "N": self.N,
            "M": self.M,
            "sigma": self.sigma,
            "sigma0": self.sigma0,
            "major_max_err_over_N": self.major_max,
            "minor_max_disc_over_N": self.minor_max,
            "unit_arc_disc_over_N": self.unit_arc_disc,
            "euler_maclaurin_max": self.euler_maclaurin_max,
            "overlap_points": self.overlap_points,
            "per_q_max": {str(k): v for k, v in sorted(self.per_q_max.items())},
        }


def major_arc_error_scan(
    params: WTrickParams,
    b: int,
    table: PrimeTable,
    arc: ArcParams | None = None,
    M: int | None = None,
    grid: SpectralGrid | None = None,
) -> ArcScanReport:
    """Compare the nu_b grid against the major-arc model everywhere.

    Major points record |nu_hat - model| / N (aggregated per q); minor
    points record |nu_hat - indicator_hat| / N.  On the unit arc around 0
    the report also tracks |nu_hat - indicator_hat| / N and the
    Euler-Maclaurin gap |indicator_hat(alpha) - I(alpha)|.
    """
    if arc is None:
        arc = ArcParams.from_params(params)
    if grid is None:
        grid = nu_grid(params, b, table, M)
    n = params.N
    m = grid.M
    alphas = grid.alphas
    q_arr, a_arr, beta_arr, overlap = classify_grid(alphas, arc)

    model = np.zeros(m, dtype=complex)
    major = q_arr > 0
    scale_cache: dict[int, float] = {}
    star_cache: dict[tuple[int, int], complex] = {}
    phi_w = euler_phi(params.W)
    maj_idx = np.nonzero(major)[0]
    pair_key = q_arr[maj_idx] * (np.int64(1) << 32) + a_arr[maj_idx]
    order = np.argsort(pair_key, kind="stable")
    maj_idx = maj_idx[order]
    pair_key = pair_key[order]
    bounds = np.nonzero(np.diff(pair_key))[0] + 1
    for seg in np.split(maj_idx, bounds):
        if seg.size == 0:
            continue
        qv, av = int(q_arr[seg[0]]), int(a_arr[seg[0]])
        if qv not in scale_cache:
            scale_cache[qv] = phi_w / euler_phi(params.W * qv)
        key = (qv, av)
        if key not in star_cache:
            star_cache[key] = s_q_star(qv, av, b, params.W)
        model[seg] = scale_cache[qv] * star_cache[key] * i_beta(beta_arr[seg], n)

    ind = indicator_hat(alphas, n)
    err = np.empty(m)
    err[major] = np.abs(grid.values[major] - model[major]) / n
    minor = ~major
    err[minor] = np.abs(grid.values[minor] - ind[minor]) / n

    per_q: dict[int, float] = {}
    for qv in np.unique(q_arr[major]):
        sel = q_arr == qv
        per_q[int(qv)] = float(err[sel].max())

    unit_arc = (q_arr == 1) & (a_arr == 0)
    unit_disc = float((np.abs(grid.values - ind)[unit_arc] / n).max()) if unit_arc.any() else 0.0
    em = (
        float(np.abs(ind[unit_arc] - i_beta(beta_arr[unit_arc], n)).max())
        if unit_arc.any()
        else 0.0
    )
    return ArcScanReport(
        W=params.W,
        b=b,
        N=n,
        M=m,
        sigma=arc.sigma,
        sigma0=arc.sigma0,
        q=q_arr,
        a=a_arr,
        beta=beta_arr,
        err_over_N=err,
        per_q_max=per_q,
        unit_arc_disc=unit_disc,
        euler_maclaurin_max=em,
        minor_max=float(err[minor].max()) if minor.any() else None,
        overlap_points=overlap,
    )
