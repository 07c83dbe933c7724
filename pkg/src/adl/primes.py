"""Prime sieving and small multiplicative-function helpers.

The sieve is segmented so memory stays bounded by the segment size rather
than the limit, and the resulting table supports vectorized membership
queries (needed when testing hundreds of thousands of progression values
at once).
"""

from __future__ import annotations

import os
import struct
from typing import Iterator

import numpy as np

# Cache file layout: 8-byte magic, uint64 little-endian limit, then the
# primes as little-endian uint64.
CACHE_MAGIC = b"ADLSIEVE"
CACHE_ENV_VAR = "ADL_CACHE_DIR"


class PrimeTable:
    """Sorted primes up to ``limit`` with vectorized membership tests."""

    __slots__ = ("primes", "limit")

    def __init__(self, primes: np.ndarray, limit: int):
        self.primes = np.asarray(primes, dtype=np.int64)
        self.limit = int(limit)

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self.primes.tolist())

    def __contains__(self, n) -> bool:
        n = int(n)
        if n < 2 or n > self.limit:
            return False
        i = int(np.searchsorted(self.primes, n))
        return i < self.primes.size and int(self.primes[i]) == n

    def __repr__(self) -> str:
        return f"PrimeTable(limit={self.limit}, count={len(self)})"

    def contains(self, values: np.ndarray) -> np.ndarray:
        """Boolean mask telling which entries of ``values`` are prime."""
        values = np.asarray(values, dtype=np.int64)
        if values.size and int(values.max()) > self.limit:
            raise ValueError(
                f"membership query up to {int(values.max())} exceeds sieve limit {self.limit}"
            )
        idx = np.searchsorted(self.primes, values)
        idx_c = np.minimum(idx, self.primes.size - 1)
        return (self.primes[idx_c] == values) & (idx < self.primes.size)

    def upto(self, x: int) -> np.ndarray:
        """Primes ``<= x`` as an array view."""
        if x > self.limit:
            raise ValueError(f"x={x} exceeds sieve limit {self.limit}")
        return self.primes[: int(np.searchsorted(self.primes, x, side="right"))]

    def count_upto(self, x: int) -> int:
        """pi(x), the number of primes <= x."""
        return int(self.upto(x).size)


def sieve_primes(limit: int, segment_size: int = 1 << 22) -> PrimeTable:
    """Segmented sieve of Eratosthenes collecting all primes <= limit."""
    if limit < 2:
        raise ValueError("sieve limit must be at least 2")
    root = int(limit ** 0.5) + 1
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for p in range(2, int(root ** 0.5) + 1):
        if base[p]:
            base[p * p :: p] = False
    base_primes = np.nonzero(base)[0]

    chunks = [base_primes[base_primes <= limit]]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + segment_size, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base_primes:
            p = int(p)
            start = ((lo + p - 1) // p) * p
            if start < p * p:
                start = p * p
            if start < hi:
                seg[start - lo :: p] = False
        chunks.append(np.nonzero(seg)[0] + lo)
        lo = hi
    return PrimeTable(np.concatenate(chunks).astype(np.int64), limit)


def save_cache(table: PrimeTable, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<Q", table.limit))
        fh.write(table.primes.astype("<u8").tobytes())


def load_cache(path: str) -> PrimeTable:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:8] != CACHE_MAGIC:
            raise ValueError(f"{path}: not a prime cache file")
        (limit,) = struct.unpack("<Q", header[8:])
        primes = np.frombuffer(fh.read(), dtype="<u8").astype(np.int64)
    return PrimeTable(primes, int(limit))


def load_or_sieve(limit: int, cache_dir: str | None = None) -> PrimeTable:
    """Return a table covering ``limit``, consulting the cache dir if set.

    The cache dir defaults to the ADL_CACHE_DIR environment variable; a
    cached table with a larger limit is reused as-is.
    """
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV_VAR)
    if not cache_dir:
        return sieve_primes(limit)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, "primes.bin")
    if os.path.exists(path):
        try:
            cached = load_cache(path)
        except (ValueError, OSError):
            cached = None
        if cached is not None and cached.limit >= limit:
            return cached
    table = sieve_primes(limit)
    save_cache(table, path)
    return table


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as (prime, exponent) pairs."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return out


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def mobius(n: int) -> int:
    fs = factorize(n)
    if any(e > 1 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def is_square_free(n: int) -> bool:
    return n >= 1 and all(e == 1 for _, e in factorize(n))


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
