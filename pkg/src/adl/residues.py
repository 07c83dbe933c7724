"""Sumset arithmetic, downsets, and compression in Z_q for square-free q.

Residue sets are stored as Python-int bitsets, which keeps the cyclic
sumset a handful of shift-or operations even at q = 210.  The bulk
verifier `verify_sumset_cover` instead checks four-fold sumsets for
millions of subsets at once by thresholding a batched cyclic convolution
(FFT over the subset indicator); the bitset route stays available as an
independent cross-check.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .primes import euler_phi, factorize, is_square_free

# 2^phi enumeration is capped here; larger moduli must use sampled mode.
EXHAUSTIVE_PHI_LIMIT = 24


@dataclass(frozen=True)
class SquareFreeModulus:
    """A square-free modulus q with its prime factors and phi(q)."""

    q: int
    prime_factors: tuple[int, ...]
    phi: int

    @classmethod
    def from_int(cls, q: int) -> "SquareFreeModulus":
        if q < 1:
            raise ValueError("modulus must be positive")
        fs = factorize(q)
        if any(e > 1 for _, e in fs):
            raise ValueError(f"q={q} is not square-free")
        primes = tuple(p for p, _ in fs)
        return cls(q=q, prime_factors=primes, phi=euler_phi(q))

    def __repr__(self) -> str:
        return f"SquareFreeModulus({self.q})"


class ResidueSet:
    """Subset of Z_q held as a bitset (bit r set iff r is a member)."""

    __slots__ = ("modulus", "bits")

    def __init__(self, modulus: SquareFreeModulus, bits: int = 0):
        if bits < 0 or bits >> modulus.q:
            raise ValueError("bitset has members outside Z_q")
        self.modulus = modulus
        self.bits = bits

    @classmethod
    def from_members(cls, modulus: SquareFreeModulus, members: Iterable[int]) -> "ResidueSet":
        bits = 0
        for r in members:
            r = int(r)
            if not 0 <= r < modulus.q:
                raise ValueError(f"residue {r} outside Z_{modulus.q}")
            bits |= 1 << r
        return cls(modulus, bits)

    def members(self) -> list[int]:
        q, bits = self.modulus.q, self.bits
        return [r for r in range(q) if (bits >> r) & 1]

    def __contains__(self, r: int) -> bool:
        return 0 <= r < self.modulus.q and (self.bits >> r) & 1 == 1

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ResidueSet)
            and self.modulus.q == other.modulus.q
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.modulus.q, self.bits))

    def __repr__(self) -> str:
        return f"ResidueSet(q={self.modulus.q}, members={self.members()})"


def units(modulus: SquareFreeModulus) -> ResidueSet:
    """The unit group Z_q*; for q = 1 this is {0}."""
    q = modulus.q
    return ResidueSet.from_members(modulus, (r for r in range(q) if math.gcd(r, q) == 1))


def sumset(a: ResidueSet, b: ResidueSet) -> ResidueSet:
    """{x + y mod q : x in a, y in b}."""
    if a.modulus.q != b.modulus.q:
        raise ValueError(f"modulus mismatch: {a.modulus.q} vs {b.modulus.q}")
    q = a.modulus.q
    mask = (1 << q) - 1
    out = 0
    x, y = a.bits, b.bits
    if x.bit_count() > y.bit_count():
        x, y = y, x
    r = 0
    while x:
        if x & 1:
            out |= ((y << r) | (y >> (q - r))) & mask if r else y
        x >>= 1
        r += 1
    return ResidueSet(a.modulus, out)


def iterated_sumset(a: ResidueSet, s: int) -> ResidueSet:
    """s-fold sumset sA; s must be at least 1."""
    if s < 1:
        raise ValueError("fold count must be >= 1")
    out = a
    done = 1
    while done < s:
        # double while it fits, then top up one fold at a time
        if 2 * done <= s:
            out = sumset(out, out)
            done *= 2
        else:
            out = sumset(out, a)
            done += 1
    return out


def target_set(modulus: SquareFreeModulus) -> ResidueSet:
    """Residues a with a = 0 mod gcd(2, q): all of Z_q when q is odd."""
    q = modulus.q
    step = math.gcd(2, q)
    return ResidueSet.from_members(modulus, range(0, q, step))


def _crt_combine(a: int, p: int, b: int, m: int) -> int:
    # x = a mod p, x = b mod m for coprime p, m
    inv = pow(m, -1, p)
    return (b + m * (((a - b) * inv) % p)) % (p * m)


def downset_of(v: int, modulus: SquareFreeModulus) -> ResidueSet:
    """Principal downset D(v): all b with b mod p <= v mod p for every p | q."""
    q = modulus.q
    if not 0 <= v < q:
        raise ValueError(f"residue {v} outside Z_{q}")
    bits = 0
    for b in range(q):
        if all(b % p <= v % p for p in modulus.prime_factors):
            bits |= 1 << b
    return ResidueSet(modulus, bits)


@lru_cache(maxsize=64)
def _downset_masks(modulus: SquareFreeModulus) -> tuple[int, ...]:
    return tuple(downset_of(v, modulus).bits for v in range(modulus.q))


def is_downset(a: ResidueSet) -> bool:
    """True iff D(v) is contained in a for every member v."""
    masks = _downset_masks(a.modulus)
    bits = a.bits
    for v in range(a.modulus.q):
        if (bits >> v) & 1 and masks[v] & ~bits:
            return False
    return True


def compress_to_downset(a: ResidueSet) -> ResidueSet:
    """Cardinality-preserving rearrangement of a into a downset.

    One step fixes a prime p | q and, within every fiber of fixed
    coordinates mod q/p, replaces the occupied p-coordinates by the
    initial segment {0, .., k-1} of the same size.  Iterating the primes
    round-robin reaches a fixed point that is compressed in every
    coordinate, hence a downset.
    """
    mod = a.modulus
    q = mod.q
    if not mod.prime_factors:  # q = 1
        return ResidueSet(mod, a.bits)
    cur = set(a.members())
    while True:
        changed = False
        for p in mod.prime_factors:
            co = q // p
            fibers: dict[int, int] = {}
            for r in cur:
                fibers[r % co] = fibers.get(r % co, 0) + 1
            new = set()
            for c, k in fibers.items():
                for j in range(k):
                    new.add(_crt_combine(j, p, c, co) if co > 1 else j)
            if new != cur:
                cur = new
                changed = True
        if not changed:
            return ResidueSet.from_members(mod, cur)


# ---------------------------------------------------------------------------
# Bulk verification of the four-fold cover property
# ---------------------------------------------------------------------------


@dataclass
class SumsetCoverReport:
    """Outcome of a bulk four-fold sumset cover verification."""

    q: int
    mode: str
    sets_tested: int
    sets_scanned: int
    counterexamples: list[dict] = field(default_factory=list)
    counterexample_count: int = 0
    elapsed_ms: int = 0

    @property
    def passed(self) -> bool:
        return self.counterexample_count == 0

    def to_record(self, include_timing: bool = True) -> dict:
        rec = {
            "q": self.q,
            "mode": self.mode,
            "sets_tested": self.sets_tested,
            "sets_scanned": self.sets_scanned,
            "counterexamples": self.counterexamples,
            "counterexample_count": self.counterexample_count,
        }
        if include_timing:
            rec["elapsed_ms"] = self.elapsed_ms
        return rec


def _popcount(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks)


def _check_cover_batch(
    masks: np.ndarray, unit_positions: np.ndarray, q: int, tgt: np.ndarray
) -> np.ndarray:
    """For each subset bitmask, does the 4-fold sumset equal the target?

    The subset indicator is cyclically self-convolved four times via an
    FFT of length q; counts are integers well below 2^53, so a 0.5
    threshold recovers the support exactly.
    """
    phi = unit_positions.size
    bits = ((masks[:, None] >> np.arange(phi, dtype=np.uint64)) & np.uint64(1)).astype(np.float64)
    arr = np.zeros((masks.size, q))
    arr[:, unit_positions] = bits
    spec = np.fft.rfft(arr, axis=1)
    power = np.fft.irfft(spec ** 4, n=q, axis=1)
    support = power > 0.5
    return (support == tgt[None, :]).all(axis=1)


def _counterexample_entry(mask: int, unit_list: list[int], modulus: SquareFreeModulus) -> dict:
    members = [unit_list[i] for i in range(len(unit_list)) if (mask >> i) & 1]
    a = ResidueSet.from_members(modulus, members)
    four = iterated_sumset(a, 4)
    missing = [r for r in target_set(modulus).members() if r not in four]
    return {"members": members, "four_sum_missing": missing}


def verify_sumset_cover(
    modulus: SquareFreeModulus,
    mode: str = "exhaustive",
    count: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    batch: int = 1 << 18,
    max_recorded: int = 16,
) -> SumsetCoverReport:
    """Check that 4A covers the parity-admissible residues for every
    A in Z_q* with |A| > phi(q)/2.

    Exhaustive mode enumerates all 2^phi subsets (phi <= 24); sampled
    mode draws ``count`` subsets uniformly from those above threshold.
    """
    start = time.perf_counter()
    q = modulus.q
    phi = modulus.phi
    unit_list = units(modulus).members()
    unit_positions = np.array(unit_list, dtype=np.int64)
    tgt = np.zeros(q, dtype=bool)
    tgt[target_set(modulus).members()] = True
    threshold = phi / 2.0

    if mode == "exhaustive":
        if phi > EXHAUSTIVE_PHI_LIMIT:
            raise ValueError(
                f"exhaustive mode needs phi(q) <= {EXHAUSTIVE_PHI_LIMIT}, got phi({q}) = {phi}"
            )
        total = 1 << phi
        all_masks = np.arange(total, dtype=np.uint64)
        above = all_masks[_popcount(all_masks) > threshold]
        scanned = total
    elif mode == "sampled":
        if count is None or count < 1:
            raise ValueError("sampled mode requires a positive count")
        if phi >= 64:
            raise ValueError(f"sampled mode supports phi(q) < 64, got phi = {phi}")
        rng = np.random.default_rng(seed)
        picked = []
        have = 0
        scanned = 0
        while have < count:
            # rejection-sample uniform subsets, keeping those above threshold
            draw = rng.integers(0, 1 << phi, size=max(count, 4096), dtype=np.uint64)
            keep = draw[_popcount(draw) > threshold][: count - have]
            scanned += int(draw.size)
            picked.append(keep)
            have += keep.size
        above = np.concatenate(picked)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    tested = int(above.size)
    shards = [above[s : s + batch] for s in range(0, tested, batch)]

    def run_shard(chunk: np.ndarray) -> np.ndarray:
        ok = _check_cover_batch(chunk, unit_positions, q, tgt)
        return chunk[~ok]

    if threads > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            bad_chunks = list(pool.map(run_shard, shards))
    else:
        bad_chunks = [run_shard(chunk) for chunk in shards]

    bad = [int(m) for chunk in bad_chunks for m in chunk.tolist()]
    report = SumsetCoverReport(
        q=q,
        mode=mode,
        sets_tested=tested,
        sets_scanned=int(scanned),
        counterexamples=[
            _counterexample_entry(m, unit_list, modulus) for m in bad[:max_recorded]
        ],
        counterexample_count=len(bad),
    )
    report.elapsed_ms = int((time.perf_counter() - start) * 1000)
    return report


def sharpness_witness(
    modulus: SquareFreeModulus,
) -> tuple[ResidueSet, ResidueSet] | None:
    """Search for A in Z_q* of size exactly ceil(phi/2) whose 4-fold
    sumset misses part of the target; returns (A, missed) or None.
    """
    phi = modulus.phi
    if phi > EXHAUSTIVE_PHI_LIMIT:
        raise ValueError(
            f"witness scan needs phi(q) <= {EXHAUSTIVE_PHI_LIMIT}, got phi = {phi}"
        )
    size = (phi + 1) // 2
    tgt = target_set(modulus)
    unit_list = units(modulus).members()
    for combo in itertools.combinations(unit_list, size):
        a = ResidueSet.from_members(modulus, combo)
        four = iterated_sumset(a, 4)
        missed_bits = tgt.bits & ~four.bits
        if missed_bits:
            return a, ResidueSet(modulus, missed_bits)
    return None


# ---------------------------------------------------------------------------
# Weighted eight-fold residue selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EightSumWitness:
    """Eight unit residues mod W with positive weights summing past the
    four-fold threshold; the residues sum to the requested target mod W."""

    residues: tuple[int, ...]
    weights: tuple[float, ...]
    total: float

    def __post_init__(self):
        if len(self.residues) != 8 or len(self.weights) != 8:
            raise ValueError("witness needs exactly eight residues and weights")


class _EightSumProgram:
    """Dynamic program over (picks so far, residue class mod W).

    best[c][r] is the maximum weight total for c picks summing to r mod W,
    restricted to residues of positive weight.  Ties prefer the smallest
    residue, so reconstruction is deterministic.
    """

    def __init__(self, h: Mapping[int, float], w_mod: int):
        self.w_mod = w_mod
        self.support = sorted(b for b, val in h.items() if val > 0)
        self.h = {b: float(h[b]) for b in self.support}
        neg = float("-inf")
        best = [[neg] * w_mod for _ in range(9)]
        choice = [[-1] * w_mod for _ in range(9)]
        best[0][0] = 0.0
        for c in range(1, 9):
            prev = best[c - 1]
            cur = best[c]
            ch = choice[c]
            for b in self.support:
                hb = self.h[b]
                for r in range(w_mod):
                    cand = prev[(r - b) % w_mod] + hb
                    if cand > cur[r]:
                        cur[r] = cand
                        ch[r] = b
        self.best = best
        self.choice = choice

    def best_total(self, n: int) -> float:
        return self.best[8][n % self.w_mod]

    def witness(self, n: int) -> EightSumWitness | None:
        n = n % self.w_mod
        total = self.best[8][n]
        if not (total > 4.0):
            return None
        residues = []
        r = n
        for c in range(8, 0, -1):
            b = self.choice[c][r]
            residues.append(b)
            r = (r - b) % self.w_mod
        residues.reverse()
        weights = tuple(self.h[b] for b in residues)
        return EightSumWitness(tuple(residues), weights, total)


def eight_sum_search(
    h: Mapping[int, float], n: int, w_mod: int
) -> EightSumWitness | None:
    """Best eight-residue witness for target n mod W, or None.

    Guaranteed to succeed for every even n whenever the mean of h over
    Z_W* exceeds 1/2 (W square-free and even).
    """
    if w_mod < 2 or w_mod % 2 != 0:
        raise ValueError("W must be even (and square-free)")
    if not is_square_free(w_mod):
        raise ValueError(f"W={w_mod} is not square-free")
    if n % 2 != 0:
        raise ValueError(f"target n={n} must be even")
    return _EightSumProgram(h, w_mod).witness(n)


def eight_sum_search_totals(
    h: Mapping[int, float], w_mod: int, allowed_totals: Iterable[int]
) -> EightSumWitness | None:
    """Like `eight_sum_search` but constrains the exact integer sum of the
    eight residues to lie in ``allowed_totals``.

    Used when the caller must also control (n0 - sum b_i)/W, not just the
    class mod W.  Runs the same DP over exact integer totals (residues are
    canonical representatives in [0, W)).
    """
    support = sorted(b for b, val in h.items() if val > 0)
    hvals = {b: float(h[b]) for b in support}
    width = 8 * (w_mod - 1) + 1
    neg = float("-inf")
    best = [[neg] * width for _ in range(9)]
    choice = [[-1] * width for _ in range(9)]
    best[0][0] = 0.0
    for c in range(1, 9):
        prev, cur, ch = best[c - 1], best[c], choice[c]
        for b in support:
            hb = hvals[b]
            for s in range(b, min(width, c * (w_mod - 1) + 1)):
                cand = prev[s - b] + hb
                if cand > cur[s]:
                    cur[s] = cand
                    ch[s] = b
    pick = None
    for s in allowed_totals:
        if 0 <= s < width and best[8][s] > 4.0:
            if pick is None or best[8][s] > best[8][pick]:
                pick = s
    if pick is None:
        return None
    residues = []
    s = pick
    for c in range(8, 0, -1):
        b = choice[c][s]
        residues.append(b)
        s -= b
    residues.reverse()
    return EightSumWitness(
        tuple(residues), tuple(hvals[b] for b in residues), best[8][pick]
    )
