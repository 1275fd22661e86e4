"""Fixed-size unequal-probability sampling procedures.

Five procedures are implemented: simple random sampling without
replacement as the equal-probability baseline, Chao's reservoir
procedure, Tille's elimination procedure, the generalized Midzuno
selection procedure, and Brewer's draw-by-draw procedure.  All target an
integer sample size and hit their first-order inclusion probabilities
exactly; the oracle module verifies this by exhaustive enumeration on
small populations.

The stream procedures precompute a "plan" (ladders of capped
probability-proportional-to-size vectors) that depends only on the
sizes, so repeated Monte Carlo runs share the expensive part.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolationError, InvalidInputError, InvalidSizeError
from .population import CERTAINTY_TOL, InclusionProbabilities, compute_pips
from .splitting import (
    RANGE_TOL,
    ZERO_ONE_TOL,
    SplittingTrace,
    categorical_index,
    run_splitting,
)

# Probabilities that must sum to one may miss by at most this much.
PROB_SUM_TOL = 1e-9


class DesignKind(enum.Enum):
    SRSWOR = "srswor"
    CHAO = "chao"
    TILLE_ELIMINATION = "tille"
    GENERALIZED_MIDZUNO = "midzuno"
    BREWER = "brewer"

    @classmethod
    def from_string(cls, name: str) -> "DesignKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise InvalidInputError(
            f"unknown design {name!r}; expected one of "
            + ", ".join(k.value for k in cls)
        )


@dataclass(frozen=True)
class Sample:
    """A realized sample: sorted unit indices out of a population of N."""

    selected: tuple[int, ...]
    N: int

    def __post_init__(self) -> None:
        sel = tuple(sorted(int(k) for k in self.selected))
        if len(set(sel)) != len(sel):
            raise InvalidInputError("sample contains repeated indices")
        if sel and (sel[0] < 0 or sel[-1] >= self.N):
            raise InvalidInputError("sample index out of range")
        object.__setattr__(self, "selected", sel)

    @property
    def size(self) -> int:
        return len(self.selected)

    @property
    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.N, dtype=int)
        ind[list(self.selected)] = 1
        return ind


def _check_sum(weights: np.ndarray, expected: float, context: str) -> np.ndarray:
    """Validate a probability block and clamp rounding noise."""
    w = np.asarray(weights, dtype=float)
    lo = float(w.min()) if w.size else 0.0
    if lo < -RANGE_TOL:
        raise ContractViolationError(f"{context}: negative probability {lo!r}")
    if abs(float(w.sum()) - expected) > PROB_SUM_TOL:
        raise ContractViolationError(
            f"{context}: probabilities sum to {w.sum()!r}, expected {expected!r}"
        )
    return np.clip(w, 0.0, None)


def sample_srswor(N: int, n: int, rng_seed: int) -> Sample:
    """Simple random sampling without replacement, uniform over subsets."""
    if not 1 <= n <= N:
        raise InvalidSizeError(f"invalid size: n={n} outside 1..{N}")
    rng = np.random.default_rng(rng_seed)
    sel = rng.choice(N, size=n, replace=False)
    return Sample(selected=tuple(int(k) for k in sel), N=int(N))


# ---------------------------------------------------------------------------
# Chao's reservoir procedure.


@dataclass
class ChaoPlan:
    """Stream-order ladders for Chao's procedure.

    ``accept[j]`` is the updated probability of stream unit t = n+1+j at
    its own arrival, and ``evict_ratio[j][k]`` is
    ``1 - pi_k(t) / pi_k(t-1)`` for stream positions k < t; restricted
    to the current reservoir these are the joint accept-and-evict
    probabilities.
    """

    order: np.ndarray
    n: int
    accept: np.ndarray
    evict_ratio: list[np.ndarray]
    pi_stream: np.ndarray

    @property
    def N(self) -> int:
        return self.order.size


def chao_plan(x: np.ndarray, n: int, order: np.ndarray | None = None) -> ChaoPlan:
    x = np.asarray(x, dtype=float)
    N = x.size
    if order is None:
        order = np.arange(N)
    else:
        order = np.asarray(order, dtype=int)
        if sorted(order.tolist()) != list(range(N)):
            raise InvalidInputError("stream order must be a permutation of 0..N-1")
    if not 1 <= n <= N:
        raise InvalidSizeError(f"invalid size: n={n} outside 1..{N}")
    xs = x[order]
    accept = np.zeros(N - n)
    ratios: list[np.ndarray] = []
    prev = compute_pips(xs[:n], n).pi if n >= 1 else np.zeros(0)
    for t in range(n + 1, N + 1):
        cur = compute_pips(xs[:t], n).pi
        accept[t - n - 1] = cur[-1]
        ratios.append(1.0 - cur[: t - 1] / prev)
        prev = cur
    return ChaoPlan(order=order, n=n, accept=accept, evict_ratio=ratios, pi_stream=prev)


def _chao_run(plan: ChaoPlan, rng: np.random.Generator) -> Sample:
    N, n = plan.N, plan.n
    reservoir = np.arange(n)
    u = rng.random(N - n)
    for j in range(N - n):
        if u[j] > plan.accept[j]:
            continue
        # Unit t enters; evict one reservoir member.
        w = _check_sum(
            plan.evict_ratio[j][reservoir],
            float(plan.accept[j]),
            f"chao step t={n + 1 + j}",
        )
        victim = categorical_index(rng, w)
        reservoir[victim] = n + j
    selected = plan.order[reservoir]
    return Sample(selected=tuple(int(k) for k in selected), N=N)


def sample_chao(
    pi: InclusionProbabilities,
    x: np.ndarray,
    rng_seed: int,
    stream_order: np.ndarray | None = None,
) -> Sample:
    """Chao's reservoir procedure for capped pi-proportional-to-size.

    Units arrive one at a time (file order unless ``stream_order`` says
    otherwise).  Arrival t is accepted with its own updated probability
    and, when accepted, evicts a current reservoir member k with
    probability proportional to how much k's updated probability fell.
    """
    plan = chao_plan(x, pi.n, order=stream_order)
    back = np.empty(plan.N, dtype=float)
    back[plan.order] = plan.pi_stream
    if float(np.max(np.abs(back - pi.pi))) > PROB_SUM_TOL:
        raise InvalidInputError(
            "pi does not match the capped size shares of x at size n"
        )
    return _chao_run(plan, np.random.default_rng(rng_seed))


# ---------------------------------------------------------------------------
# Tille's elimination procedure.


@dataclass
class TillePlan:
    """Elimination probabilities r_{k,i} for i = N-1 down to n.

    ``elim[j]`` is the column for i = N-1-j; restricted to the units
    still present it sums to one.
    """

    n: int
    N: int
    elim: list[np.ndarray]


def tille_plan(sizes: np.ndarray, n: int) -> TillePlan:
    sizes = np.asarray(sizes, dtype=float)
    N = sizes.size
    if not 1 <= n <= N:
        raise InvalidSizeError(f"invalid size: n={n} outside 1..{N}")
    rungs: dict[int, np.ndarray] = {}
    for i in range(n, N + 1):
        rungs[i] = compute_pips(sizes, i).pi
    elim: list[np.ndarray] = []
    for i in range(N - 1, n - 1, -1):
        r = 1.0 - rungs[i] / rungs[i + 1]
        if float(r.min()) < -RANGE_TOL:
            raise ContractViolationError(
                f"tille ladder: negative elimination probability at i={i}"
            )
        elim.append(np.clip(r, 0.0, None))
    return TillePlan(n=n, N=N, elim=elim)


def _tille_run(plan: TillePlan, rng: np.random.Generator) -> Sample:
    alive = np.arange(plan.N)
    size = plan.N
    for j, col in enumerate(plan.elim):
        w = _check_sum(col[alive[:size]], 1.0, f"tille step i={plan.N - 1 - j}")
        out = categorical_index(rng, w)
        alive[out] = alive[size - 1]
        size -= 1
    return Sample(selected=tuple(int(k) for k in alive[:size]), N=plan.N)


def sample_tille(
    pi: InclusionProbabilities, x: np.ndarray, rng_seed: int
) -> Sample:
    """Tille's elimination procedure.

    Precomputes the capped shares at every intermediate size i = n..N
    and, walking i from N-1 down to n, eliminates exactly one of the
    still-present units with probability 1 - pi_k(i)/pi_k(i+1).  The n
    survivors form the sample.
    """
    x = np.asarray(x, dtype=float)
    if x.size != pi.N:
        raise InvalidInputError("x and pi must have equal length")
    plan = tille_plan(x, pi.n)
    target = compute_pips(x, pi.n).pi
    if float(np.max(np.abs(target - pi.pi))) > PROB_SUM_TOL:
        raise InvalidInputError(
            "pi does not match the capped size shares of x at size n"
        )
    return _tille_run(plan, np.random.default_rng(rng_seed))


# ---------------------------------------------------------------------------
# Generalized Midzuno selection.


@dataclass
class MidzunoPlan:
    """Selection probabilities over the non-certainty units.

    The ladder runs on the complementary probabilities 1 - pi: step
    j selects one not-yet-selected unit with probability
    ``select[j][k] = 1 - bar_pi_k(i) / bar_pi_k(i+1)``, i = N'-1 down to
    N'-n', where bar_pi are capped shares of 1 - pi.
    """

    N: int
    n: int
    certain: np.ndarray
    active: np.ndarray
    select: list[np.ndarray]


def midzuno_plan(pi: InclusionProbabilities) -> MidzunoPlan:
    certain = np.flatnonzero(pi.certain)
    active = np.flatnonzero(~pi.certain)
    n_active = pi.n - certain.size
    if n_active < 0:
        raise InvalidSizeError("more certainty units than the sample size")
    # n_active == 0 or n_active == active.size leave no randomness and
    # need no ladder.
    select: list[np.ndarray] = []
    if 0 < n_active < active.size:
        comp = 1.0 - pi.pi[active]
        n_prime = active.size
        m = n_prime - n_active
        rungs: dict[int, np.ndarray] = {}
        for i in range(m, n_prime + 1):
            rungs[i] = compute_pips(comp, i).pi
        for i in range(n_prime - 1, m - 1, -1):
            p = 1.0 - rungs[i] / rungs[i + 1]
            if float(p.min()) < -RANGE_TOL:
                raise ContractViolationError(
                    f"midzuno ladder: negative selection probability at i={i}"
                )
            select.append(np.clip(p, 0.0, None))
    return MidzunoPlan(
        N=pi.N, n=pi.n, certain=certain, active=active, select=select
    )


def _midzuno_run(plan: MidzunoPlan, rng: np.random.Generator) -> Sample:
    n_active = plan.n - plan.certain.size
    if n_active == plan.active.size:
        chosen = list(range(plan.active.size))
    else:
        pool = np.arange(plan.active.size)
        size = pool.size
        chosen = []
        for j, col in enumerate(plan.select):
            w = _check_sum(col[pool[:size]], 1.0, f"midzuno step {j + 1}")
            pick = categorical_index(rng, w)
            chosen.append(int(pool[pick]))
            pool[pick] = pool[size - 1]
            size -= 1
    selected = np.concatenate([plan.certain, plan.active[chosen]]) if chosen else plan.certain
    return Sample(selected=tuple(int(k) for k in selected), N=plan.N)


def sample_midzuno(pi: InclusionProbabilities, rng_seed: int) -> Sample:
    """Generalized Midzuno procedure.

    Selects n units one at a time; the selection probabilities come from
    the capped shares of the complementary probabilities 1 - pi, so the
    procedure is the complement of Tille elimination applied to 1 - pi.
    Certainty units are pre-selected.
    """
    plan = midzuno_plan(pi)
    return _midzuno_run(plan, np.random.default_rng(rng_seed))


# ---------------------------------------------------------------------------
# Brewer's procedure, expressed as a splitting rule.


class BrewerRule:
    """Splitting rule for Brewer's draw-by-draw procedure.

    At step t with r draws outstanding, undecided unit k is drawn with
    weight proportional to ``pi_k (r - pi_k) / (1 - pi_k)``; drawing k
    raises it to one and rescales every other undecided unit by
    ``(r - 1) / (r - pi_k)``.
    """

    @staticmethod
    def _active(pi: np.ndarray) -> np.ndarray:
        return np.flatnonzero((pi > ZERO_ONE_TOL) & (pi < 1.0 - ZERO_ONE_TOL))

    def alphas(self, t: int, pi: np.ndarray) -> np.ndarray:
        a = self._active(pi)
        p = pi[a]
        r = float(round(float(p.sum())))
        w = p * (r - p) / (1.0 - p)
        total = float(w.sum())
        if total <= 0.0:
            raise ContractViolationError(f"step {t}: no drawable unit")
        return w / total

    def delta(self, t: int, pi: np.ndarray, i: int) -> np.ndarray:
        a = self._active(pi)
        p = pi[a]
        r = float(round(float(p.sum())))
        pk = p[i]
        d = np.zeros(pi.size)
        d[a] = -p * (1.0 - pk) / (r - pk)
        d[a[i]] = 1.0 - pk
        return d


def _brewer_run(pi_vec: np.ndarray, rng: np.random.Generator) -> Sample:
    N = pi_vec.size
    certain = np.flatnonzero(pi_vec >= 1.0 - CERTAINTY_TOL)
    active = np.flatnonzero(pi_vec < 1.0 - CERTAINTY_TOL)
    cur = pi_vec[active].copy()
    n_draws = int(round(float(cur.sum())))
    chosen = [int(k) for k in certain]
    for t in range(1, n_draws + 1):
        r = n_draws - t + 1
        w = cur * (r - cur) / (1.0 - cur)
        j = categorical_index(rng, w)
        pj = float(cur[j])
        chosen.append(int(active[j]))
        keep = np.arange(cur.size) != j
        active = active[keep]
        cur = cur[keep] * ((r - 1.0) / (r - pj))
        if cur.size and float(cur.max()) > 1.0 + PROB_SUM_TOL:
            raise ContractViolationError(
                f"brewer step {t}: intermediate probability above 1"
            )
    return Sample(selected=tuple(chosen), N=N)


def sample_brewer(
    pi: InclusionProbabilities,
    rng_seed: int,
    trace: str | bool | None = None,
) -> Sample | tuple[Sample, SplittingTrace]:
    """Brewer's procedure: n dependent draws, one unit per step.

    Args:
        pi: target inclusion probabilities (certainty units allowed;
            they are selected up front and the remaining draws run on
            the rest).
        rng_seed: seed; one uniform is consumed per draw, so the same
            seed yields the same sample whether or not a trace is kept.
        trace: None for the plain sample; "realized" records the chosen
            update per step; "full" (or True) records and validates all
            candidate updates per step.  When set, returns
            (sample, trace).
    """
    if trace in (None, False):
        return _brewer_run(pi.pi, np.random.default_rng(rng_seed))
    record = "full" if trace is True else str(trace)
    tr = run_splitting(BrewerRule(), pi, rng_seed, record=record)
    return Sample(selected=tr.selected, N=pi.N), tr


# ---------------------------------------------------------------------------
# Uniform access for the Monte Carlo harness and the CLI.


def make_sampler(
    kind: DesignKind,
    *,
    pi: InclusionProbabilities | None = None,
    x: np.ndarray | None = None,
    n: int | None = None,
    N: int | None = None,
    stream_order: np.ndarray | None = None,
) -> tuple[Callable[[int], Sample], InclusionProbabilities]:
    """Build a seed -> Sample closure with all precomputation done once.

    Returns the closure together with the target inclusion
    probabilities (needed to expand study values).  ``pi`` may be
    derived from ``x`` and ``n`` where the design is size-driven.
    """
    if pi is None:
        if kind is DesignKind.SRSWOR:
            if N is None or n is None:
                raise InvalidInputError("srswor needs N and n (or pi)")
            pi = InclusionProbabilities(pi=np.full(N, n / N), n=int(n))
        else:
            if x is None or n is None:
                raise InvalidInputError(f"{kind.value} needs pi, or x and n")
            pi = compute_pips(np.asarray(x, dtype=float), int(n))

    if kind is DesignKind.SRSWOR:
        Nn = (pi.N, pi.n)
        return (lambda seed: sample_srswor(Nn[0], Nn[1], seed)), pi
    if kind is DesignKind.CHAO:
        if x is None:
            raise InvalidInputError("chao needs the size vector x")
        plan = chao_plan(np.asarray(x, dtype=float), pi.n, order=stream_order)
        return (lambda seed: _chao_run(plan, np.random.default_rng(seed))), pi
    if kind is DesignKind.TILLE_ELIMINATION:
        if x is None:
            raise InvalidInputError("tille needs the size vector x")
        plan = tille_plan(np.asarray(x, dtype=float), pi.n)
        return (lambda seed: _tille_run(plan, np.random.default_rng(seed))), pi
    if kind is DesignKind.GENERALIZED_MIDZUNO:
        mplan = midzuno_plan(pi)
        return (lambda seed: _midzuno_run(mplan, np.random.default_rng(seed))), pi
    if kind is DesignKind.BREWER:
        vec = pi.pi
        return (lambda seed: _brewer_run(vec, np.random.default_rng(seed))), pi
    raise InvalidInputError(f"unknown design kind {kind!r}")
