"""Declarative descriptions of subsets of the primes.

A spec is deterministic: membership of a prime depends only on the spec's
fields, never on sieve state.  The random kind hashes each prime with a
seeded 64-bit mixer and compares against delta * 2^64, which gives a
reproducible subset of relative density approximately delta.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .primes import PrimeTable, is_prime

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x += np.uint64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class PrimeSubsetSpec:
    """One of: all primes, primes in residue classes, an explicit list,
    or a seeded random subset of density delta."""

    kind: str
    modulus: int | None = None
    allowed: tuple[int, ...] | None = None
    primes: tuple[int, ...] | None = None
    delta: float | None = None
    seed: int | None = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def all_primes() -> "PrimeSubsetSpec":
        return PrimeSubsetSpec(kind="all")

    @staticmethod
    def residue_classes(modulus: int, allowed) -> "PrimeSubsetSpec":
        if modulus < 2:
            raise ValueError("class modulus must be >= 2")
        allowed = tuple(sorted({int(a) % modulus for a in allowed}))
        if not allowed:
            raise ValueError("at least one residue class required")
        return PrimeSubsetSpec(kind="residue_classes", modulus=modulus, allowed=allowed)

    @staticmethod
    def explicit(primes) -> "PrimeSubsetSpec":
        primes = tuple(sorted({int(p) for p in primes}))
        for p in primes:
            if not is_prime(p):
                raise ValueError(f"explicit member {p} is not prime")
        return PrimeSubsetSpec(kind="explicit", primes=primes)

    @staticmethod
    def random_density(delta: float, seed: int) -> "PrimeSubsetSpec":
        if not 0.0 <= delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        return PrimeSubsetSpec(kind="random", delta=float(delta), seed=int(seed))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        if self.kind == "all":
            return {"kind": "all"}
        if self.kind == "residue_classes":
            return {"kind": "residue_classes", "m": self.modulus, "allowed": list(self.allowed)}
        if self.kind == "explicit":
            return {"kind": "explicit", "primes": list(self.primes)}
        return {"kind": "random", "delta": self.delta, "seed": self.seed}

    @staticmethod
    def from_json(obj: dict) -> "PrimeSubsetSpec":
        kind = obj.get("kind")
        if kind == "all":
            return PrimeSubsetSpec.all_primes()
        if kind == "residue_classes":
            return PrimeSubsetSpec.residue_classes(obj["m"], obj["allowed"])
        if kind == "explicit":
            return PrimeSubsetSpec.explicit(obj["primes"])
        if kind == "random":
            return PrimeSubsetSpec.random_density(obj["delta"], obj["seed"])
        raise ValueError(f"unknown subset kind {kind!r}")

    @staticmethod
    def parse(text: str) -> "PrimeSubsetSpec":
        """Accepts 'all', shorthand 'modM-R1[,R2,..]', or a JSON object."""
        text = text.strip()
        if text == "all":
            return PrimeSubsetSpec.all_primes()
        if text.startswith("mod"):
            head, _, tail = text.partition("-")
            if tail:
                return PrimeSubsetSpec.residue_classes(
                    int(head[3:]), [int(t) for t in tail.split(",")]
                )
        if text.startswith("{"):
            return PrimeSubsetSpec.from_json(json.loads(text))
        raise ValueError(f"cannot parse subset spec {text!r}")

    def label(self) -> str:
        """Short deterministic tag for file names and report rows."""
        if self.kind == "all":
            return "all"
        if self.kind == "residue_classes":
            return f"mod{self.modulus}-" + ",".join(str(a) for a in self.allowed)
        if self.kind == "explicit":
            return f"explicit{len(self.primes)}"
        return f"random{self.delta:g}s{self.seed}"

    # -- membership --------------------------------------------------------

    def mask(self, values: np.ndarray) -> np.ndarray:
        """Membership among ``values``, which must already be primes."""
        values = np.asarray(values, dtype=np.int64)
        if self.kind == "all":
            return np.ones(values.shape, dtype=bool)
        if self.kind == "residue_classes":
            return np.isin(values % self.modulus, np.array(self.allowed, dtype=np.int64))
        if self.kind == "explicit":
            return np.isin(values, np.array(self.primes, dtype=np.int64))
        if self.delta >= 1.0:
            return np.ones(values.shape, dtype=bool)
        seed_mix = _splitmix64(np.array([self.seed], dtype=np.uint64))[0]
        hashed = _splitmix64(values.astype(np.uint64) ^ seed_mix)
        threshold = np.uint64(int(self.delta * 2.0 ** 64))
        return hashed < threshold

    def __contains__(self, p: int) -> bool:
        return bool(self.mask(np.array([p], dtype=np.int64))[0])

    def member_primes(self, table: PrimeTable, upto: int) -> np.ndarray:
        """The members of the subset among primes <= upto."""
        primes = table.upto(upto)
        return primes[self.mask(primes)]


def density_estimate(spec: PrimeSubsetSpec, x: int, table: PrimeTable) -> float:
    """Finite-horizon relative density |A n [X]| / |P n [X]|."""
    if x < 2:
        raise ValueError("density horizon must be >= 2")
    primes = table.upto(x)
    if primes.size == 0:
        raise ValueError("no primes below horizon")
    return float(spec.mask(primes).sum() / primes.size)
