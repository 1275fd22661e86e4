"""Exact distributions over samples, represented as explicit support maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidInputError

# Probabilities below this magnitude may be negative due to rounding and
# are clamped to zero.
PROB_FLOOR = -1e-15

# Allowed |total probability - 1| after accounting for pruned mass.
MASS_TOL = 1e-9


@dataclass
class ExactDesignDistribution:
    """A sampling design given by the full map sample -> probability.

    Keys are sorted tuples of 0-based unit indices.  ``n`` is the target
    sample size; fixed-size designs have every support element of that
    size, which ``fixed_size`` reports.  ``pruned_mass`` records
    probability discarded by branch pruning during enumeration.
    """

    support: dict[tuple[int, ...], float]
    N: int
    n: int
    source: str = ""
    pruned_mass: float = 0.0

    def __post_init__(self) -> None:
        cleaned: dict[tuple[int, ...], float] = {}
        for key, p in self.support.items():
            t = tuple(sorted(int(k) for k in key))
            if len(set(t)) != len(t):
                raise InvalidInputError(f"repeated index in support element {key!r}")
            if t and (t[0] < 0 or t[-1] >= self.N):
                raise InvalidInputError(f"index out of range in {key!r}")
            p = float(p)
            if p < PROB_FLOOR:
                raise InvalidInputError(f"negative probability {p!r} for {key!r}")
            p = max(p, 0.0)
            if p > 0.0:
                cleaned[t] = cleaned.get(t, 0.0) + p
        total = sum(cleaned.values()) + self.pruned_mass
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidInputError(
                f"support probabilities sum to {total!r}, expected 1"
            )
        self.support = cleaned

    @property
    def fixed_size(self) -> bool:
        return all(len(s) == self.n for s in self.support)

    def total_mass(self) -> float:
        return float(sum(self.support.values()))

    def tv_distance(self, other: "ExactDesignDistribution") -> float:
        """Total variation distance between two support maps."""
        if self.N != other.N:
            raise InvalidInputError("distributions live on different populations")
        keys = set(self.support) | set(other.support)
        return 0.5 * sum(
            abs(self.support.get(k, 0.0) - other.support.get(k, 0.0)) for k in keys
        )

    def complement(self) -> "ExactDesignDistribution":
        """Distribution of the complementary sample U minus S."""
        full = range(self.N)
        supp = {
            tuple(k for k in full if k not in set(s)): p
            for s, p in self.support.items()
        }
        return ExactDesignDistribution(
            support=supp,
            N=self.N,
            n=self.N - self.n,
            source=f"complement({self.source})",
            pruned_mass=self.pruned_mass,
        )

    def dump(self, ids: tuple[str, ...] | None = None) -> str:
        """CSV dump, one support element per row: ``sample;probability``.

        Samples are hyphen-joined sorted ids (indices when no ids given).
        """
        if ids is not None and len(ids) != self.N:
            raise InvalidInputError("ids length must equal N")
        lines = ["sample;probability"]
        rows = []
        for s, p in self.support.items():
            label = "-".join(ids[k] if ids is not None else str(k) for k in s)
            rows.append((s, label, p))
        rows.sort(key=lambda r: r[0])
        for _, label, p in rows:
            lines.append(f"{label};{p!r}")
        return "\n".join(lines) + "\n"


def subset_probabilities(
    dist: ExactDesignDistribution, max_size: int
) -> dict[tuple[int, ...], float]:
    """Pr(T subset of S) for every T with ``|T| <= max_size``.

    Only subsets with positive probability appear in the result; the
    empty tuple maps to the total support mass.
    """
    out: dict[tuple[int, ...], float] = {(): dist.total_mass()}
    for s, p in dist.support.items():
        for size in range(1, min(max_size, len(s)) + 1):
            for sub in combinations(s, size):
                out[sub] = out.get(sub, 0.0) + p
    return out


def first_second_order(
    dist: ExactDesignDistribution,
) -> tuple[np.ndarray, np.ndarray]:
    """First- and second-order inclusion probabilities of a distribution.

    Returns (pi1, pi2) with pi2 symmetric and its diagonal equal to pi1.
    """
    pi1 = np.zeros(dist.N)
    pi2 = np.zeros((dist.N, dist.N))
    for s, p in dist.support.items():
        for a in s:
            pi1[a] += p
        for a, b in combinations(s, 2):
            pi2[a, b] += p
            pi2[b, a] += p
    np.fill_diagonal(pi2, pi1)
    return pi1, pi2
