"""Tests for the packing family, code search, KL formulas, and Fano assembly."""

import math

import numpy as np
import pytest

from _support import make_params
from fairlinreg import (
    GroupAffineRegressor,
    ParameterError,
    build_family,
    build_fdp,
    fano_value,
    gv_code,
    hard_instance_eps,
    kl_conditional,
    kl_conditional_sample,
    mc_excess_risk,
    packed_pair_kl,
    packed_pair_separation,
    two_point_bound,
    validate_params,
)
from fairlinreg.lower_bound import block_hamming


def random_sign_matrix(rng, M, width):
    return rng.choice((-1, 1), size=(M, width)).astype(np.int8)


class TestPackedFamily:
    def test_norms_exact(self):
        rng = np.random.default_rng(0)
        family = build_family(6, 3, [1.0, 0.5, 2.0], [0.3, 0.9, 0.01])
        for _ in range(20):
            beta = family.beta_of(random_sign_matrix(rng, 3, 5))
            assert np.allclose(np.linalg.norm(beta, axis=1), family.B_s, atol=1e-12)

    def test_eps_one_boundary(self):
        family = build_family(4, 1, [1.0], [1.0])
        beta = family.beta_of(np.ones((1, 3), dtype=np.int8))
        assert beta[0, 0] == 0.0
        assert np.allclose(np.abs(beta[0, 1:]), 1.0 / math.sqrt(3))

    def test_single_flip_distance(self):
        d, B, eps = 5, 1.3, 0.4
        family = build_family(d, 2, [B, B], [eps, eps])
        v = np.ones((2, d - 1), dtype=np.int8)
        w = v.copy()
        w[0, 2] = -1
        diff = family.beta_of(v) - family.beta_of(w)
        assert np.sum(diff ** 2) == pytest.approx(4 * B ** 2 * eps ** 2 / (d - 1))

    def test_realized_params_are_valid(self):
        family = build_family(5, 2, [1.0, 0.3], [0.2, 0.8])
        params = family.params_of(
            np.ones((2, 4), dtype=np.int8), [0.5, 0.5], 1.0, 1.0
        )
        assert validate_params(params) == []
        assert np.all(params.mu == 0.0)

    def test_eps_domain_errors(self):
        with pytest.raises(ParameterError):
            build_family(4, 2, [1.0, 1.0], [0.5, 1.5])
        with pytest.raises(ParameterError):
            build_family(1, 2, [1.0, 1.0], [0.5, 0.5])


class TestGvCode:
    def test_min_dist_zero_dedups_only(self):
        code = gv_code(block_length=2, blocks=1, min_dist=0, budget=500, seed=0)
        assert code.size == 4  # all of {-1,1}^2 eventually drawn

    def test_single_block_reaches_gv_size(self):
        code = gv_code(block_length=8, blocks=1, min_dist=1, budget=10_000, seed=1)
        assert code.size >= 2
        assert code.min_block_distance >= 1

    def test_max_distance_exhaustive_small_case(self):
        code = gv_code(block_length=4, blocks=1, min_dist=4, budget=10_000, seed=2)
        assert code.size <= 2  # only antipodal pairs at full distance
        for i in range(code.size):
            for j in range(i + 1, code.size):
                assert block_hamming(code.codewords[i], code.codewords[j]).min() == 4

    def test_per_block_distance_guaranteed(self):
        code = gv_code(block_length=8, blocks=4, min_dist=1, budget=2_000, seed=3)
        assert code.size >= 2
        for i in range(code.size):
            for j in range(i + 1, code.size):
                assert block_hamming(code.codewords[i], code.codewords[j]).min() >= 1
        assert code.min_block_distance >= 1


class TestKl:
    def test_identical_params_zero(self):
        params = make_params([[1.0, 0.2], [0.3, 0.8]], B=2.0)
        assert kl_conditional(params, params, [10, 10]) == 0.0

    def test_packed_closed_form_random_pairs(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            d = int(rng.integers(3, 8))
            M = int(rng.integers(1, 4))
            B_s = rng.uniform(0.3, 2.0, size=M)
            eps_s = rng.uniform(0.05, 0.9, size=M)
            family = build_family(d, M, B_s, eps_s)
            v = random_sign_matrix(rng, M, d - 1)
            w = random_sign_matrix(rng, M, d - 1)
            p = np.full(M, 1.0 / M)
            n_counts = rng.integers(1, 500, size=M)
            theta = family.params_of(v, p, 1.3, 0.7)
            theta_prime = family.params_of(w, p, 1.3, 0.7)
            general = kl_conditional(theta, theta_prime, n_counts)
            closed = packed_pair_kl(family, v, w, n_counts, 1.3, 0.7)
            assert abs(general - closed) < 1e-10 * max(1.0, closed)

    def test_sample_based_kl_matches(self):
        rng = np.random.default_rng(5)
        family = build_family(5, 2, [1.0, 0.8], [0.4, 0.3])
        v = random_sign_matrix(rng, 2, 4)
        w = random_sign_matrix(rng, 2, 4)
        p = np.array([0.5, 0.5])
        theta = family.params_of(v, p, 1.0, 1.0)
        theta_prime = family.params_of(w, p, 1.0, 1.0)
        n_counts = [40, 60]
        exact = kl_conditional(theta, theta_prime, n_counts)
        est, se = kl_conditional_sample(theta, theta_prime, n_counts, 500_000, seed=6)
        assert abs(est - exact) <= 4 * se

    def test_sample_kl_with_nonzero_means(self):
        # exercises the mean-shift and cross terms of the general formula
        theta = make_params(
            [[1.0, 0.2], [0.5, 0.5]], mu=[[0.3, -0.1], [0.2, 0.4]], B=2.0
        )
        theta_prime = make_params(
            [[0.8, 0.3], [0.6, 0.2]], mu=[[0.1, 0.1], [0.0, 0.3]], B=2.0
        )
        n_counts = [30, 70]
        exact = kl_conditional(theta, theta_prime, n_counts)
        est, se = kl_conditional_sample(theta, theta_prime, n_counts, 500_000, seed=7)
        assert abs(est - exact) <= 4 * se


class TestTwoPointBound:
    def test_zero_at_equal_params(self):
        params = make_params([[1.0, 0.1], [0.4, 0.7]], B=2.0)
        bound = two_point_bound(params, params)
        assert bound.value == 0.0 and bound.simplified == 0.0

    def test_zero_mean_reduction(self):
        rng = np.random.default_rng(8)
        theta = make_params(rng.standard_normal((2, 3)), B=10.0)
        theta_prime = make_params(rng.standard_normal((2, 3)), B=10.0)
        bound = two_point_bound(theta, theta_prime)
        u = build_fdp(theta).fdp.w
        u_prime = build_fdp(theta_prime).fdp.w
        expect = float(
            theta.p @ (0.25 * np.einsum("ij,ij->i", u - u_prime, u - u_prime))
        )
        assert bound.value == pytest.approx(expect, rel=1e-12)
        assert bound.simplified == pytest.approx(expect, rel=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(9)
        theta = make_params(
            rng.standard_normal((2, 3)), mu=0.3 * rng.standard_normal((2, 3)), B=10.0
        )
        theta_prime = make_params(
            rng.standard_normal((2, 3)), mu=0.3 * rng.standard_normal((2, 3)), B=10.0
        )
        a = two_point_bound(theta, theta_prime)
        b = two_point_bound(theta_prime, theta)
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_large_mean_shift_rejected(self):
        theta = make_params([[1.0, 0.0]], mu=[[0.0, 0.0]])
        theta_prime = make_params([[1.0, 0.0]], mu=[[3.0, 0.0]], U=4.0)
        with pytest.raises(ParameterError):
            two_point_bound(theta, theta_prime)

    def test_dominated_by_candidate_risks(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            d = 3
            theta = make_params(
                rng.uniform(0.5, 1.5, size=(2, d)) * rng.choice([-1, 1], size=(2, d)),
                mu=0.2 * rng.standard_normal((2, d)),
                B=10.0,
            )
            theta_prime = make_params(
                rng.uniform(0.5, 1.5, size=(2, d)) * rng.choice([-1, 1], size=(2, d)),
                mu=0.2 * rng.standard_normal((2, d)),
                B=10.0,
            )
            bound = two_point_bound(theta, theta_prime).value
            o1, o2 = build_fdp(theta), build_fdp(theta_prime)
            avg = GroupAffineRegressor(
                w=0.5 * (o1.fdp.w + o2.fdp.w), b=0.5 * (o1.fdp.b + o2.fdp.b)
            )
            for cand in (o1.fdp, o2.fdp, avg):
                r1, se1 = mc_excess_risk(cand, theta, o1, 100_000, seed=11)
                r2, se2 = mc_excess_risk(cand, theta_prime, o2, 100_000, seed=12)
                assert bound <= max(r1, r2) + 4 * max(se1, se2)


class TestFanoValue:
    def test_zero_information(self):
        assert fano_value(0.8, 4, 0.0) == pytest.approx(0.8 * 0.5)

    def test_target_regime(self):
        K = 16
        avg_kl = math.log(K / 4.0) / 2.0
        assert fano_value(1.0, K, avg_kl) == pytest.approx(0.5)

    def test_vacuous_information_clipped(self):
        assert fano_value(1.0, 8, math.log(8)) == 0.0

    def test_small_code_rejected(self):
        with pytest.raises(ParameterError):
            fano_value(1.0, 1, 0.0)


class TestHardInstanceEps:
    def test_formula_homogeneity(self):
        e1 = hard_instance_eps(9, 4, 1.0, 1.0, 1.0, [100, 100, 100, 100])
        e2 = hard_instance_eps(9, 4, 1.0, 1.0, 1.0, [200, 200, 200, 200])
        assert np.allclose(e1 ** 2, 2 * e2 ** 2)

    def test_hypothesis_boundary_excluded(self):
        with pytest.raises(ParameterError):
            hard_instance_eps(17, 1, 1.0, 1.0, 1.0, [100])

    def test_hand_evaluation(self):
        eps = hard_instance_eps(9, 4, 1.0, 1.0, 1.0, [100] * 4)
        assert np.allclose(eps ** 2, 0.00125)

    def test_clamping_warns(self):
        with pytest.warns(UserWarning):
            eps = hard_instance_eps(9, 4, 10.0, 1.0, 0.1, [1, 1, 1, 1])
        assert np.all(eps <= 1.0)


class TestSeparation:
    def test_packed_separation_is_quarter_oracle_distance(self):
        # the closed-form separation equals a quarter of the exact L2 distance
        # between the two members' fair regressors (the two-point bound value)
        from fairlinreg import gaussian_l2_distance

        rng = np.random.default_rng(13)
        family = build_family(6, 3, [1.0, 0.7, 1.2], [0.3, 0.5, 0.2])
        p = np.full(3, 1.0 / 3.0)
        v = random_sign_matrix(rng, 3, 5)
        w = random_sign_matrix(rng, 3, 5)
        theta = family.params_of(v, p, 1.1, 1.0)
        theta_prime = family.params_of(w, p, 1.1, 1.0)
        sep = packed_pair_separation(family, v, w, p, 1.1)
        exact = gaussian_l2_distance(
            build_fdp(theta).fdp, build_fdp(theta_prime).fdp, theta
        )
        assert sep == pytest.approx(exact / 4.0, rel=1e-10)
