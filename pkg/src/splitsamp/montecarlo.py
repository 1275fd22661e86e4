"""Monte Carlo estimation of tail probabilities and bound certification.

Replicates are driven by per-replicate seeds derived from one master
seed with a splitmix64 step, so runs are reproducible and independent of
replicate order.  Empirical tail frequencies carry a Wilson score upper
confidence limit; a bound is certified against the estimate only when
the frequency exceeds it by more than that statistical margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .designs import DesignKind, make_sampler
from .errors import InvalidInputError
from .population import InclusionProbabilities

_MASK64 = (1 << 64) - 1

# splitmix64 increment and mixing multipliers (Steele, Lea, Flood 2014).
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# One-sided 99% normal quantile for the Wilson limit.
DEFAULT_Z = NormalDist().inv_cdf(0.99)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for replicate ``index``: splitmix64 output ``index + 1``
    steps past ``master_seed``."""
    if index < 0:
        raise InvalidInputError("replicate index must be nonnegative")
    z = (master_seed + (index + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def wilson_upper(successes: int, trials: int, z: float = DEFAULT_Z) -> float:
    """Upper Wilson score confidence limit for a binomial proportion."""
    if trials <= 0:
        raise InvalidInputError("trials must be positive")
    if not 0 <= successes <= trials:
        raise InvalidInputError("successes outside 0..trials")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    return float(min(1.0, center + half))


@dataclass(frozen=True)
class TailEstimate:
    """Empirical tail of the normalized estimation error on a grid.

    ``freq_one[i]`` estimates Pr((t_hat - t_y)/N >= eps[i]) and
    ``freq_two[i]`` the two-sided version; ``errors`` keeps the raw
    normalized errors for reuse.
    """

    kind: str
    N: int
    n: int
    replicates: int
    master_seed: int
    eps: np.ndarray
    count_one: np.ndarray
    count_two: np.ndarray
    errors: np.ndarray

    @property
    def freq_one(self) -> np.ndarray:
        return self.count_one / self.replicates

    @property
    def freq_two(self) -> np.ndarray:
        return self.count_two / self.replicates

    def wilson_one(self, z: float = DEFAULT_Z) -> np.ndarray:
        return np.array(
            [wilson_upper(int(c), self.replicates, z) for c in self.count_one]
        )

    def wilson_two(self, z: float = DEFAULT_Z) -> np.ndarray:
        return np.array(
            [wilson_upper(int(c), self.replicates, z) for c in self.count_two]
        )

    def to_csv(self) -> str:
        lines = ["eps,freq_one_sided,freq_two_sided,wilson_upper_1s,wilson_upper_2s"]
        w1 = self.wilson_one()
        w2 = self.wilson_two()
        f1 = self.freq_one
        f2 = self.freq_two
        for i in range(self.eps.size):
            lines.append(
                f"{self.eps[i]!r},{f1[i]!r},{f2[i]!r},{w1[i]!r},{w2[i]!r}"
            )
        return "\n".join(lines) + "\n"


def estimate_tail(
    kind: DesignKind,
    *,
    y: np.ndarray,
    eps_grid: Sequence[float] | np.ndarray,
    replicates: int,
    master_seed: int = 0,
    pi: InclusionProbabilities | None = None,
    x: np.ndarray | None = None,
    n: int | None = None,
    N: int | None = None,
    stream_order: np.ndarray | None = None,
) -> TailEstimate:
    """Estimate the error tail of a design by repeated sampling.

    One sample is drawn per replicate with its derived seed, the
    Horvitz-Thompson error is normalized by N, and exceedance counts are
    taken on the grid.
    """
    if replicates < 1:
        raise InvalidInputError("replicates must be positive")
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size == 0 or float(eps.min()) < 0:
        raise InvalidInputError("eps grid must be nonempty and nonnegative")
    draw, pi = make_sampler(kind, pi=pi, x=x, n=n, N=N, stream_order=stream_order)
    y = np.asarray(y, dtype=float)
    if y.size != pi.N:
        raise InvalidInputError("y must have one entry per unit")
    y_check = y / pi.pi
    t_y = float(y.sum())
    scale = float(pi.N)
    errors = np.empty(replicates)
    for r in range(replicates):
        s = draw(derive_seed(master_seed, r))
        errors[r] = (float(y_check[list(s.selected)].sum()) - t_y) / scale
    signed = np.sort(errors)
    absolute = np.sort(np.abs(errors))
    count_one = replicates - np.searchsorted(signed, eps, side="left")
    count_two = replicates - np.searchsorted(absolute, eps, side="left")
    return TailEstimate(
        kind=kind.value,
        N=pi.N,
        n=pi.n,
        replicates=replicates,
        master_seed=master_seed,
        eps=eps,
        count_one=count_one.astype(int),
        count_two=count_two.astype(int),
        errors=errors,
    )


@dataclass(frozen=True)
class CertRow:
    """One grid point of a certification: does the bound hold up?"""

    eps: float
    freq: float
    wilson: float
    bound: float
    passed: bool


def certify(
    tail: TailEstimate,
    bound: Callable[[float], float] | Sequence[float] | np.ndarray,
    *,
    two_sided: bool = False,
    z: float = DEFAULT_Z,
) -> list[CertRow]:
    """Check an analytic tail bound against the empirical estimate.

    A grid point passes when the frequency does not exceed the bound by
    more than the Wilson margin: freq <= bound + (wilson - freq).
    ``bound`` is either a vector aligned with the grid or a callable of
    eps.
    """
    if callable(bound):
        values = np.array([float(bound(float(e))) for e in tail.eps])
    else:
        values = np.asarray(bound, dtype=float)
        if values.size != tail.eps.size:
            raise InvalidInputError("bound vector does not match the eps grid")
    freq = tail.freq_two if two_sided else tail.freq_one
    wilson = tail.wilson_two(z) if two_sided else tail.wilson_one(z)
    rows = []
    for i in range(tail.eps.size):
        margin = float(wilson[i] - freq[i])
        rows.append(
            CertRow(
                eps=float(tail.eps[i]),
                freq=float(freq[i]),
                wilson=float(wilson[i]),
                bound=float(values[i]),
                passed=bool(freq[i] <= values[i] + margin),
            )
        )
    return rows
