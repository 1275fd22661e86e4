"""Samplers: determinism, fixed size, certainty handling, and agreement
between the streaming runners and the exactly enumerated distributions.

The enumeration walks the same per-step probabilities through an
independent route (exhaustive recursion instead of random draws), so
comparing empirical frequencies of the runners against it exercises
both codepaths end to end.
"""

import numpy as np
import pytest

from splitsamp import (
    ContractViolationError,
    DesignKind,
    InvalidInputError,
    InvalidSizeError,
    Sample,
    compute_pips,
    enumerate_design,
    make_sampler,
    sample_brewer,
    sample_chao,
    sample_midzuno,
    sample_srswor,
    sample_tille,
)
from splitsamp.designs import _check_sum, chao_plan, midzuno_plan, tille_plan

from conftest import UNEQUAL_DESIGNS


class TestSample:
    def test_sorts_and_validates(self):
        s = Sample(selected=(3, 1), N=5)
        assert s.selected == (1, 3)
        assert s.size == 2
        assert s.indicator.tolist() == [0, 1, 0, 1, 0]

    def test_rejects_repeats(self):
        with pytest.raises(InvalidInputError, match="repeated"):
            Sample(selected=(1, 1), N=3)

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError, match="range"):
            Sample(selected=(0, 3), N=3)


class TestCheckSum:
    def test_clamps_rounding_noise(self):
        w = _check_sum(np.array([0.5, 0.5, -1e-14]), 1.0, "ctx")
        assert w.min() == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ContractViolationError, match="ctx"):
            _check_sum(np.array([-0.2, 1.2]), 1.0, "ctx")

    def test_rejects_wrong_total(self):
        with pytest.raises(ContractViolationError, match="sum"):
            _check_sum(np.array([0.6, 0.6]), 1.0, "ctx")


class TestDesignKind:
    def test_from_string(self):
        assert DesignKind.from_string("chao") is DesignKind.CHAO
        with pytest.raises(InvalidInputError, match="unknown design"):
            DesignKind.from_string("systematic")


class TestSrswor:
    def test_size_and_range(self):
        s = sample_srswor(10, 4, rng_seed=0)
        assert s.size == 4 and s.N == 10

    def test_deterministic(self):
        assert sample_srswor(10, 4, 7).selected == sample_srswor(10, 4, 7).selected

    def test_invalid_size(self):
        with pytest.raises(InvalidSizeError, match="invalid size"):
            sample_srswor(3, 4, 0)


@pytest.fixture(scope="module")
def pi_plain():
    # No capping: pi = x / 5.
    return compute_pips(np.array([1.0, 2.0, 3.0, 4.0]), 2)


@pytest.fixture(scope="module")
def pi_capped():
    # Unit 3 is certain: pi = [1/3, 1/3, 1/3, 1].
    return compute_pips(np.array([1.0, 1.0, 1.0, 10.0]), 2)


class TestChao:
    def test_fixed_size_and_determinism(self, pi_plain):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        a = sample_chao(pi_plain, x, rng_seed=5)
        b = sample_chao(pi_plain, x, rng_seed=5)
        assert a.selected == b.selected and a.size == 2

    def test_certainty_unit_always_sampled(self, pi_capped):
        x = np.array([1.0, 1.0, 1.0, 10.0])
        for seed in range(40):
            assert 3 in sample_chao(pi_capped, x, rng_seed=seed).selected

    def test_stream_order_is_a_relabeling(self, pi_plain):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        order = np.array([3, 1, 0, 2])
        s = sample_chao(pi_plain, x, rng_seed=9, stream_order=order)
        assert s.size == 2

    def test_bad_stream_order(self, pi_plain):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        with pytest.raises(InvalidInputError, match="permutation"):
            sample_chao(pi_plain, x, rng_seed=0, stream_order=np.array([0, 1, 1, 2]))

    def test_pi_must_match_x(self, pi_plain):
        with pytest.raises(InvalidInputError, match="capped"):
            sample_chao(pi_plain, np.array([4.0, 3.0, 2.0, 1.0]), rng_seed=0)

    def test_plan_ladder_shapes(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        plan = chao_plan(x, 2)
        assert plan.accept.size == 3
        assert len(plan.evict_ratio) == 3
        # Ratios at arrival t cover stream positions 0..t-2.
        assert [r.size for r in plan.evict_ratio] == [2, 3, 4]
        # Eviction mass equals the accept probability, reservoir-restricted
        # only at run time; over all prefix units it is at least that.
        for j, r in enumerate(plan.evict_ratio):
            assert r.min() >= -1e-12


class TestTille:
    def test_fixed_size_and_determinism(self, pi_plain):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        a = sample_tille(pi_plain, x, rng_seed=5)
        assert a.selected == sample_tille(pi_plain, x, rng_seed=5).selected
        assert a.size == 2

    def test_certainty_unit_always_sampled(self, pi_capped):
        x = np.array([1.0, 1.0, 1.0, 10.0])
        for seed in range(40):
            assert 3 in sample_tille(pi_capped, x, rng_seed=seed).selected

    def test_elimination_plan_shape(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        plan = tille_plan(x, 2)
        assert len(plan.elim) == 3
        # The full first column covers all units; later columns sum to
        # one only restricted to the survivors, which the runner and the
        # enumeration both check branch by branch.
        assert plan.elim[0].sum() == pytest.approx(1.0, abs=1e-9)
        for col in plan.elim:
            assert col.min() >= 0.0

    def test_census_has_no_steps(self):
        plan = tille_plan(np.array([1.0, 2.0]), 2)
        assert plan.elim == []


class TestMidzuno:
    def test_fixed_size_and_determinism(self, pi_plain):
        a = sample_midzuno(pi_plain, rng_seed=5)
        assert a.selected == sample_midzuno(pi_plain, rng_seed=5).selected
        assert a.size == 2

    def test_certainty_units_preselected(self, pi_capped):
        for seed in range(40):
            assert 3 in sample_midzuno(pi_capped, rng_seed=seed).selected

    def test_all_active_selected_when_forced(self):
        # pi = [1, 1, 0.5, 0.5] with n = 3: one free slot for two units.
        pi = compute_pips(np.array([10.0, 10.0, 1.0, 1.0]), 3)
        s = sample_midzuno(pi, rng_seed=1)
        assert {0, 1}.issubset(s.selected) and s.size == 3

    def test_selection_plan_shape(self, pi_plain):
        plan = midzuno_plan(pi_plain)
        assert len(plan.select) == 2
        assert plan.select[0].sum() == pytest.approx(1.0, abs=1e-9)
        for col in plan.select:
            assert col.min() >= 0.0


class TestBrewer:
    def test_fixed_size_and_determinism(self, pi_plain):
        a = sample_brewer(pi_plain, rng_seed=5)
        assert a.selected == sample_brewer(pi_plain, rng_seed=5).selected
        assert a.size == 2

    def test_certainty_units_preselected(self, pi_capped):
        for seed in range(40):
            sample = sample_brewer(pi_capped, rng_seed=seed)
            assert 3 in sample.selected and sample.size == 2

    def test_trace_true_means_full(self, pi_plain):
        _, tr = sample_brewer(pi_plain, rng_seed=0, trace=True)
        assert all(s.deltas is not None for s in tr.steps)

    def test_bad_trace_mode(self, pi_plain):
        with pytest.raises(InvalidInputError):
            sample_brewer(pi_plain, rng_seed=0, trace="verbose")


class TestMakeSampler:
    def test_matches_direct_calls(self, pi_plain):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        pairs = [
            (DesignKind.CHAO, lambda seed: sample_chao(pi_plain, x, seed)),
            (DesignKind.TILLE_ELIMINATION, lambda seed: sample_tille(pi_plain, x, seed)),
            (DesignKind.GENERALIZED_MIDZUNO, lambda seed: sample_midzuno(pi_plain, seed)),
            (DesignKind.BREWER, lambda seed: sample_brewer(pi_plain, seed)),
        ]
        for kind, direct in pairs:
            draw, pi = make_sampler(kind, pi=pi_plain, x=x)
            assert np.allclose(pi.pi, pi_plain.pi)
            for seed in range(10):
                assert draw(seed).selected == direct(seed).selected, kind

    def test_derives_pi_from_x(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        draw, pi = make_sampler(DesignKind.BREWER, x=x, n=2)
        assert pi.n == 2
        assert draw(0).size == 2

    def test_srswor_from_N(self):
        draw, pi = make_sampler(DesignKind.SRSWOR, N=6, n=2)
        assert pi.is_equal_probability()
        assert draw(3).selected == sample_srswor(6, 2, 3).selected

    def test_missing_inputs(self):
        with pytest.raises(InvalidInputError):
            make_sampler(DesignKind.CHAO, n=2)
        with pytest.raises(InvalidInputError):
            make_sampler(DesignKind.SRSWOR)


class TestRunnersMatchEnumeration:
    """Empirical frequencies of the stream runners against the exact
    distributions; 4 sigma of binomial noise at R = 4000."""

    R = 4000

    def frequencies(self, draw, dist):
        counts = {key: 0 for key in dist.support}
        extra = 0
        for seed in range(self.R):
            key = draw(seed).selected
            if key in counts:
                counts[key] += 1
            else:
                extra += 1
        assert extra == 0, "runner produced a sample outside the exact support"
        return {k: c / self.R for k, c in counts.items()}

    @pytest.mark.parametrize("kind", UNEQUAL_DESIGNS, ids=lambda k: k.value)
    def test_runner_frequencies(self, kind):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        pi = compute_pips(x, 2)
        dist = enumerate_design(kind, x=x, pi=pi, n=2)
        draw, _ = make_sampler(kind, pi=pi, x=x)
        freqs = self.frequencies(draw, dist)
        for key, p in dist.support.items():
            sigma = np.sqrt(p * (1 - p) / self.R)
            assert abs(freqs[key] - p) <= 4 * sigma + 1e-12, (kind, key)


class TestEnumeratedInclusionProbabilities:
    @pytest.mark.parametrize("kind", UNEQUAL_DESIGNS, ids=lambda k: k.value)
    def test_capped_instance(self, kind):
        x = np.array([1.0, 1.0, 1.0, 10.0])
        pi = compute_pips(x, 2)
        dist = enumerate_design(kind, x=x, pi=pi, n=2)
        from splitsamp import first_second_order

        pi_hat, _ = first_second_order(dist)
        assert np.max(np.abs(pi_hat - pi.pi)) <= 1e-9
        assert dist.fixed_size

    @pytest.mark.parametrize("kind", UNEQUAL_DESIGNS, ids=lambda k: k.value)
    def test_random_instance(self, kind):
        rng = np.random.default_rng(2024)
        x = rng.uniform(0.5, 3.0, size=5)
        pi = compute_pips(x, 3)
        dist = enumerate_design(kind, x=x, pi=pi, n=3)
        from splitsamp import first_second_order

        pi_hat, _ = first_second_order(dist)
        assert np.max(np.abs(pi_hat - pi.pi)) <= 1e-9
