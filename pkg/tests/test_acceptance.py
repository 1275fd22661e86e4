"""Acceptance gate: one test per shipping criterion, numbered so that
``pytest tests/test_acceptance.py -v`` prints one pass/fail line each.

Criterion 5 re-samples four designs at 10^5 replicates and dominates the
runtime (a few minutes); everything else finishes in seconds.
"""

import math
import time

import numpy as np
import pytest

from splitsamp import (
    BoundInputs,
    DesignKind,
    StudyVector,
    bernstein_bound,
    certify,
    check_csyg,
    cna_bound,
    compute_pips,
    dominance_grid,
    enumerate_design,
    eps_star,
    estimate_tail,
    first_second_order,
    lipschitz_bound,
    midzuno_complementarity_tv,
    dominance_regime,
    run_experiment,
    sample_brewer,
    unbiasedness_check,
)

FOUR_DESIGNS = (
    DesignKind.CHAO,
    DesignKind.TILLE_ELIMINATION,
    DesignKind.GENERALIZED_MIDZUNO,
    DesignKind.BREWER,
)

X_REFERENCE = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
N_REFERENCE = 3


@pytest.fixture(scope="module")
def reference_dists():
    pi = compute_pips(X_REFERENCE, N_REFERENCE)
    start = time.perf_counter()
    dists = {
        kind: enumerate_design(kind, x=X_REFERENCE, pi=pi, n=N_REFERENCE)
        for kind in FOUR_DESIGNS
    }
    return pi, dists, time.perf_counter() - start


def test_criterion_01_exact_inclusion_probabilities(reference_dists):
    pi, dists, elapsed = reference_dists
    for kind in FOUR_DESIGNS:
        dist = dists[kind]
        assert dist.fixed_size, f"{kind.value}: support has off-size samples"
        for key in dist.support:
            assert len(key) == N_REFERENCE
        pi_hat, _ = first_second_order(dist)
        gap = float(np.max(np.abs(pi_hat - pi.pi)))
        assert gap <= 1e-9, f"{kind.value}: inclusion gap {gap}"
    assert elapsed <= 30.0


def test_criterion_02_conditional_syg(reference_dists):
    pi, dists, _ = reference_dists
    start = time.perf_counter()
    checked = [
        (kind.value, "x=1..6", check_csyg(dists[kind]))
        for kind in FOUR_DESIGNS
        if kind is not DesignKind.BREWER
    ]
    rng = np.random.default_rng(11)
    for trial in range(3):
        x = rng.uniform(0.5, 3.0, size=6)
        pi_t = compute_pips(x, 3)
        for kind in (
            DesignKind.CHAO,
            DesignKind.TILLE_ELIMINATION,
            DesignKind.GENERALIZED_MIDZUNO,
        ):
            dist = enumerate_design(kind, x=x, pi=pi_t, n=3)
            checked.append((kind.value, f"random {trial}", check_csyg(dist)))
    for name, inst, rpt in checked:
        # n = 3 makes the scan cover every conditioning set of size <= 1.
        assert rpt.checked_count > 0, (name, inst)
        assert rpt.max_violation <= 1e-12, (name, inst, rpt.witness)
    assert time.perf_counter() - start <= 60.0


def test_criterion_03_midzuno_tille_complementarity(reference_dists):
    pi, _, _ = reference_dists
    assert midzuno_complementarity_tv(pi) <= 1e-9


def test_criterion_04_brewer_increment_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    x = -np.log1p(-rng.random(50))
    pi = compute_pips(x, 10)
    for seed in range(10_000):
        _, tr = sample_brewer(pi, seed, trace="realized")
        cur = tr.pi0.copy()
        for step in tr.steps:
            d = step.realized_delta
            l1 = float(np.abs(d).sum())
            drawn = int(np.argmax(d))
            assert abs(l1 - 2.0 * (1.0 - cur[drawn])) <= 1e-12
            assert l1 <= 2.0 + 1e-12
            cur += d
    assert time.perf_counter() - start <= 10.0


def test_criterion_05_monte_carlo_tail_dominance():
    rng = np.random.default_rng(20260819)
    x = rng.uniform(1.0, 2.0, size=200)
    y = rng.uniform(0.0, 1.0, size=200)
    pi = compute_pips(x, 40)
    inputs = BoundInputs.from_study(
        StudyVector(y_check=y / pi.pi, _y=y, _pi=pi.pi), n=40, eps=0.0
    )
    eps_grid = np.linspace(0.025, 0.5, 20)
    bound_vec = np.array([2.0 * cna_bound(inputs, e) for e in eps_grid])
    for kind in FOUR_DESIGNS:
        start = time.perf_counter()
        tail = estimate_tail(
            kind, y=y, eps_grid=eps_grid, replicates=100_000,
            master_seed=5, pi=pi, x=x,
        )
        rows = certify(tail, bound_vec, two_sided=True)
        for row in rows:
            assert row.passed, (
                f"{kind.value} eps={row.eps}: freq {row.freq} over bound "
                f"{row.bound} with Wilson limit {row.wilson}"
            )
        assert time.perf_counter() - start <= 300.0, kind.value


def test_criterion_06_bound_arithmetic_reference_instance():
    # y identically 1 on N=100 with pi identically 0.2: v_k = 5,
    # sum v^2 = 2500, sup y^2/pi = 5; evaluated at eps = 0.5.
    inputs = BoundInputs(
        N=100, n=20.0, eps=0.5, sup_ycheck=5.0, sum_sq_ycheck=2500.0,
        sup_y=1.0, sup_y2_over_pi=5.0, equal_probability=True,
    )
    assert cna_bound(inputs) == pytest.approx(0.535261, abs=1e-5)
    assert lipschitz_bound(inputs) == pytest.approx(0.993770, abs=1e-5)
    # Closed form for this instance: 2 exp(-25 / (32 + 10/3)).
    assert bernstein_bound(inputs) == pytest.approx(
        2.0 * math.exp(-25.0 / (32.0 + 10.0 / 3.0)), rel=1e-12
    )
    assert bernstein_bound(inputs) == pytest.approx(0.9857032, abs=1e-5)


def test_criterion_07_cna_dominates_lipschitz():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        N = int(rng.integers(3, 31))
        n = int(rng.integers(1, N + 1))
        v = rng.uniform(0.5, 2.0, size=N) * rng.choice([-1.0, 1.0], size=N)
        sup = float(np.max(np.abs(v)))
        ssq = float(np.sum(v * v))
        # Pin the cna exponent to [0.1, 2] so neither bound underflows
        # and a real gap is measurable.
        tau = float(rng.uniform(0.1, 2.0))
        eps = math.sqrt(8.0 * n * sup * sup * tau) / N
        inputs = BoundInputs(
            N=N, n=float(n), eps=eps, sup_ycheck=sup, sum_sq_ycheck=ssq,
            sup_y=sup, sup_y2_over_pi=sup * sup,
        )
        c, l = cna_bound(inputs), lipschitz_bound(inputs)
        assert c <= l
        assert l - c > 1e-12, "distinct expanded values must give a gap"
    for a in (0.3, 1.0, 10.0):
        single = BoundInputs(
            N=10, n=4.0, eps=0.2, sup_ycheck=a, sum_sq_ycheck=a * a,
            sup_y=a, sup_y2_over_pi=a * a,
        )
        assert abs(cna_bound(single) - lipschitz_bound(single)) <= 1e-12


def test_criterion_08_regime_classification_and_dominance():
    N = 10_000
    # Numeric small-sample cutoff (log2 * 8/9)^(1/3) N^(2/3) ~ 394.97.
    assert dominance_regime(N, 394).kind == "SmallN_AllEps"
    assert dominance_regime(N, 395).kind == "LargeN_EpsRange"

    def equal_prob_inputs(n):
        # y identically 1, pi = n/N: v = N/n.
        ratio = N / n
        return BoundInputs(
            N=N, n=float(n), eps=0.0, sup_ycheck=ratio,
            sum_sq_ycheck=N * ratio * ratio, sup_y=1.0,
            sup_y2_over_pi=ratio, equal_probability=True,
        )

    for n in (100, 300):
        inputs = equal_prob_inputs(n)
        assert dominance_regime(N, n).kind == "SmallN_AllEps"
        for e in dominance_grid(100.0):
            assert cna_bound(inputs, e) <= bernstein_bound(inputs, e) + 1e-15

    inputs = equal_prob_inputs(6000)
    assert dominance_regime(N, 6000).kind == "LargeN_EpsRange"
    star = eps_star(inputs)
    assert star == pytest.approx(2.0 * (1.0 - 0.6) * 1.0, rel=1e-12)
    # Claimed contract: concentration <= Bernstein-type on all of
    # (0, eps_star] once n/N >= 2/(5-sqrt(2)).  The claim is false: for
    # n/N = 0.6 the exact crossover (root of the log-difference cubic)
    # sits near eps = 0.025, far below eps_star = 0.8, and the two
    # bounds separate by orders of magnitude beyond it.  The assertion
    # is kept as stated and is expected to fail; README.md documents
    # the analysis under known limitations.
    bad = [
        (float(e), cna_bound(inputs, e), bernstein_bound(inputs, e))
        for e in dominance_grid(star)
        if cna_bound(inputs, e) > bernstein_bound(inputs, e) + 1e-15
    ]
    assert not bad, (
        f"dominance claimed on (0, {star}] fails at {len(bad)} of 512 grid "
        f"points; first violation eps={bad[0][0]:.6f} with "
        f"concentration {bad[0][1]:.3e} > bernstein {bad[0][2]:.3e}"
    )


def test_criterion_09_bound_difference_curves():
    start = time.perf_counter()
    rows = run_experiment()
    assert len(rows) == 4 * 4 * 200
    noise_free = [r for r in rows if r.sigma == 0.0]
    assert noise_free and all(r.diff > 0 for r in noise_free)
    n_big = 10.0**3.5
    crossing = [r.diff for r in rows if r.sigma == 5.0 and r.n == n_big]
    assert any(d < 0 for d in crossing) and any(d > 0 for d in crossing)
    assert time.perf_counter() - start <= 10.0


def test_criterion_10_design_unbiasedness(reference_dists):
    pi, dists, _ = reference_dists
    for kind in FOUR_DESIGNS:
        gap = unbiasedness_check(dists[kind], X_REFERENCE, pi.pi)
        assert gap <= 1e-8, f"{kind.value}: bias gap {gap}"
