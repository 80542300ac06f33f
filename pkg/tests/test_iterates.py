"""Transition kernels, kernel iterates, chain sampling, and fixed-n limits."""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import gammaln

from oplimits import (
    CATALOG,
    CutoffTooSmallError,
    TestFunction,
    bernstein_kernel,
    build_sm_kernel,
    chain_expectation_mc,
    chain_sample_sm,
    chain_terminal_values,
    kelisky_rivlin_reference,
    kernel_iterate,
    lattice_cutoff,
)


def small_kernel(n=5, x_max=2.0, tail_eps=1e-12):
    K = lattice_cutoff(n, x_max, tail_eps)
    return build_sm_kernel(n, K, tail_eps, checked_rows=int(n * x_max))


class TestKernelConstruction:
    def test_state_zero_is_absorbing(self):
        kernel = small_kernel()
        row = kernel.row_probs(0)
        assert row[0] == 1.0
        assert np.all(row[1:] == 0.0)
        assert kernel.defect[0] == 0.0

    def test_row_one_is_unit_poisson(self):
        kernel = small_kernel()
        row = kernel.row_probs(1)
        for j in range(10):
            assert row[j] == pytest.approx(math.exp(-1.0) / math.factorial(j), rel=1e-13)

    def test_checked_rows_have_small_defect(self):
        kernel = small_kernel()
        assert np.all(kernel.defect[: kernel.checked_rows + 1] <= kernel.tail_eps)

    def test_mean_preserved_per_row(self):
        kernel = small_kernel()
        latt = kernel.lattice()
        for i in range(kernel.checked_rows + 1):
            row = kernel.row_probs(i)
            mean = float(row @ latt)
            slack = kernel.defect[i] * kernel.K / kernel.n + 1e-12
            assert abs(mean - i / kernel.n) <= slack

    def test_second_moment_update_per_row(self):
        kernel = small_kernel()
        latt = kernel.lattice()
        n = kernel.n
        for i in range(kernel.checked_rows + 1):
            row = kernel.row_probs(i)
            m2 = float(row @ latt ** 2)
            y = i / n
            assert m2 == pytest.approx(y ** 2 + y / n, abs=1e-10)

    def test_cutoff_too_small_reports_worst_row(self):
        with pytest.raises(CutoffTooSmallError) as err:
            build_sm_kernel(1, 5, 1e-12, checked_rows=5)
        assert err.value.row is not None
        assert err.value.defect > 1e-12

    def test_unchecked_construction_allowed(self):
        kernel = build_sm_kernel(1, 5, 1e-12)
        assert kernel.size == 6


class TestKernelIterate:
    def test_zero_steps_restricts(self):
        kernel = small_kernel()
        lf = kernel_iterate(kernel, CATALOG["f1"], 0)
        np.testing.assert_allclose(lf.values, np.exp(-kernel.lattice()), rtol=1e-15)
        assert np.all(lf.error_budget == 0.0)

    def test_one_step_constants(self):
        kernel = small_kernel()
        lf = kernel_iterate(kernel, CATALOG["e0"], 1)
        checked = kernel.checked_rows
        assert np.all(lf.values[: checked + 1] <= 1.0 + 5e-15)
        assert np.all(lf.values[: checked + 1] >= 1.0 - kernel.tail_eps - 5e-15)

    def test_martingale_two_steps_unit_index(self):
        # the identity grows past any cutoff, so the budget only prices the
        # lattice part of the lost mass; a deep cutoff makes both negligible
        n = 1
        K = lattice_cutoff(n, 3.0, 1e-12)
        kernel = build_sm_kernel(n, K, 1e-12, checked_rows=1)
        lf = kernel_iterate(kernel, CATALOG["e1"], 2)
        i = lf.index_of(1.0)
        assert abs(lf.values[i] - 1.0) <= lf.error_budget[i] + 1e-12

    def test_exponential_map_oracle(self):
        # the operator maps exp(-lam x) to exp(-g(lam) x) with
        # g(lam) = n (1 - exp(-lam/n)); composing the map k times gives an
        # exact reference for the iterate away from the cutoff
        n, k = 5, 7
        kernel = small_kernel(n=n, x_max=2.0)
        lf = kernel_iterate(kernel, CATALOG["f1"], k)
        lam = 1.0
        for _ in range(k):
            lam = n * (1.0 - math.exp(-lam / n))
        latt = kernel.lattice()
        upto = 2 * n + 1
        np.testing.assert_allclose(
            lf.values[:upto], np.exp(-lam * latt[:upto]), atol=1e-9
        )

    def test_positivity_preserved(self):
        kernel = small_kernel()
        for k in (1, 3, 10):
            lf = kernel_iterate(kernel, CATALOG["xexp"], k)
            assert np.all(lf.values >= -1e-15)

    def test_budget_grows_with_steps(self):
        kernel = small_kernel()
        budgets = [
            float(np.max(kernel_iterate(kernel, CATALOG["e0"], k).error_budget))
            for k in (0, 2, 8)
        ]
        assert budgets[0] == 0.0
        assert budgets[0] <= budgets[1] <= budgets[2]

    def test_index_of_validation(self):
        lf = kernel_iterate(small_kernel(), CATALOG["e0"], 0)
        assert lf.index_of(0.4) == 2
        with pytest.raises(ValueError):
            lf.index_of(0.41)

    def test_negative_steps_rejected(self):
        with pytest.raises(ValueError):
            kernel_iterate(small_kernel(), CATALOG["e0"], -1)


class TestBernsteinKernel:
    def test_absorbing_endpoints(self):
        kernel = bernstein_kernel(6)
        top = kernel.row_probs(6)
        bottom = kernel.row_probs(0)
        assert bottom[0] == 1.0 and np.all(bottom[1:] == 0.0)
        assert top[6] == 1.0 and np.all(top[:6] == 0.0)

    def test_rows_are_stochastic(self):
        kernel = bernstein_kernel(9)
        for i in range(10):
            assert float(kernel.row_probs(i).sum()) == pytest.approx(1.0, abs=1e-14)

    def test_binomial_row(self):
        kernel = bernstein_kernel(2)
        np.testing.assert_allclose(kernel.row_probs(1), [0.25, 0.5, 0.25], atol=1e-15)

    def test_zero_defect(self):
        assert np.all(bernstein_kernel(5).defect == 0.0)


class TestKeliskyRivlin:
    def test_reference_values(self):
        assert kelisky_rivlin_reference(CATALOG["e2"], 0.5) == 0.5
        f = TestFunction("c", lambda x: 2.5 * np.ones_like(np.asarray(x, dtype=float)))
        assert kelisky_rivlin_reference(f, 0.3) == 2.5
        assert kelisky_rivlin_reference(CATALOG["e1"], 0.77) == pytest.approx(0.77)

    def test_domain(self):
        with pytest.raises(ValueError):
            kelisky_rivlin_reference(CATALOG["e2"], 1.2)

    def test_iterates_contract_geometrically(self):
        n = 5
        kernel = bernstein_kernel(n)
        latt = kernel.lattice()
        ref = np.array([kelisky_rivlin_reference(CATALOG["e2"], float(x)) for x in latt])
        v = np.asarray(CATALOG["e2"](latt), dtype=float)
        devs = []
        for _ in range(60):
            v = kernel.matrix @ v
            devs.append(float(np.max(np.abs(v - ref))))
        assert all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
        # spectral gap 1 - 1/n = 0.8 drives the decay
        assert devs[-1] <= devs[0] * 0.81 ** 59


class TestChainSampling:
    def test_zero_is_absorbing(self):
        rng = np.random.default_rng(0)
        state = chain_sample_sm(4, 10, 0.0, rng)
        assert state.value == 0.0 and state.step == 10

    def test_states_live_on_lattice(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            state = chain_sample_sm(7, 3, 1.3, rng)
            assert abs(state.value * 7 - round(state.value * 7)) < 1e-12

    def test_reproducible_given_seed(self):
        a = chain_sample_sm(5, 4, 2.0, np.random.default_rng(99))
        b = chain_sample_sm(5, 4, 2.0, np.random.default_rng(99))
        assert a == b

    def test_mean_preservation(self):
        rng = np.random.default_rng(7)
        vals = chain_terminal_values(5, 3, 2.0, 200_000, rng)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - 2.0) <= 3.5 * se

    def test_one_step_distribution_is_poisson(self):
        rng = np.random.default_rng(11)
        draws = (chain_terminal_values(1, 1, 1.0, 200_000, rng) * 1).astype(int)
        kmax = 12
        observed = np.bincount(np.minimum(draws, kmax), minlength=kmax + 1)
        kk = np.arange(kmax + 1)
        pmf = np.exp(-1.0 + kk * 0.0 - gammaln(kk + 1.0))
        pmf[-1] = 1.0 - pmf[:-1].sum()
        expected = pmf * draws.size
        chi2 = float(((observed - expected) ** 2 / expected).sum())
        assert stats.chi2.sf(chi2, kmax) > 0.001

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            chain_sample_sm(5, 0, 1.0, rng)
        with pytest.raises(ValueError):
            chain_sample_sm(5, 1, -1.0, rng)


class TestChainExpectation:
    def test_constant_function(self):
        est = chain_expectation_mc(5, 3, 1.0, CATALOG["e0"], 10_000, seed=3, workers=4)
        assert est.mean == 1.0
        assert est.stderr == 0.0
        assert est.samples == 10_000

    def test_deterministic_given_seed_and_workers(self):
        a = chain_expectation_mc(5, 5, 1.0, CATALOG["f1"], 50_000, seed=21, workers=4)
        b = chain_expectation_mc(5, 5, 1.0, CATALOG["f1"], 50_000, seed=21, workers=4)
        assert a == b

    def test_agrees_with_kernel_iterate(self):
        n, k, x = 5, 5, 1.0
        kernel = small_kernel(n=n, x_max=2.0)
        lf = kernel_iterate(kernel, CATALOG["f1"], k)
        i = lf.index_of(x)
        est = chain_expectation_mc(n, k, x, CATALOG["f1"], 200_000, seed=17, workers=4)
        assert abs(est.mean - lf.values[i]) <= 3 * est.stderr + lf.error_budget[i]

    def test_stderr_scales_with_sample_size(self):
        small = chain_expectation_mc(5, 3, 1.0, CATALOG["f1"], 50_000, seed=9, workers=4)
        large = chain_expectation_mc(5, 3, 1.0, CATALOG["f1"], 200_000, seed=9, workers=4)
        ratio = 2.0 * large.stderr / small.stderr
        assert 0.8 <= ratio <= 1.2

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            chain_expectation_mc(5, 3, 1.0, CATALOG["e0"], 1, seed=0)
