"""Shared fixtures: one big sieve and the spectral N-ladder, both
session-scoped because several test modules consume them."""

from __future__ import annotations

import time

import pytest

import adl

# Covers W=30 progressions at N=2^16 (limit 1966110), the W=30 / N=1e5
# selection example (3000030), and density horizons up to 1e6.
SIEVE_LIMIT = 3_000_030

LADDER_NS = (1 << 12, 1 << 14, 1 << 16)
LADDER_WB = ((3, 6, 1), (3, 6, 5), (5, 30, 7))  # (w, W, b)


@pytest.fixture(scope="session")
def table():
    return adl.sieve_primes(SIEVE_LIMIT)


@pytest.fixture(scope="session")
def spec_all():
    return adl.PrimeSubsetSpec.all_primes()


@pytest.fixture(scope="session")
def spec_mod3_1():
    return adl.PrimeSubsetSpec.residue_classes(3, [1])


@pytest.fixture(scope="session")
def spec_mod5_123():
    return adl.PrimeSubsetSpec.residue_classes(5, [1, 2, 3])


class LadderEntry:
    def __init__(self, w, W, b, N):
        self.w, self.W, self.b, self.N = w, W, b, N
        self.discrepancy = None
        self.scan_sigma1 = None
        self.scan_sigma3 = None  # only at the ladder endpoints
        self.nu_mean = None


@pytest.fixture(scope="session")
def spectral_ladder(table):
    """Grids and arc scans for the (W, b) x N ladder used by the
    discrepancy, major-arc, minor-arc, and restriction trend checks."""
    t0 = time.perf_counter()
    entries = {}
    for (w, W, b) in LADDER_WB:
        for N in LADDER_NS:
            params = adl.WTrickParams.from_length(w, N)
            grid = adl.nu_grid(params, b, table)
            entry = LadderEntry(w, W, b, N)
            entry.nu_mean = grid.source.mean()
            entry.discrepancy = adl.discrepancy(grid)
            arc1 = adl.ArcParams.from_params(params, sigma=1.0)
            entry.scan_sigma1 = adl.major_arc_error_scan(
                params, b, table, arc=arc1, grid=grid
            )
            if N in (LADDER_NS[0], LADDER_NS[-1]):
                arc3 = adl.ArcParams.from_params(params)  # default sigma 3.0
                entry.scan_sigma3 = adl.major_arc_error_scan(
                    params, b, table, arc=arc3, grid=grid
                )
            entries[(W, b, N)] = entry
    elapsed = time.perf_counter() - t0
    return {"entries": entries, "elapsed_s": elapsed}
