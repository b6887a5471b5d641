"""Minimax lower-bound machinery.

Hard-instance packing over sign patterns, randomized-greedy binary codes
with a per-block Hamming-distance guarantee, exact KL divergence between
conditional data laws, a two-point risk lower bound, and Fano-bound
assembly.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .model import ModelParams, _frozen_array


@dataclass(frozen=True)
class PackedFamily:
    """Hard-instance family indexed by sign matrices v in {-1,+1}^{M x (d-1)}.

    Every member has mu = 0 and per-group coefficient norm exactly B_s: the
    first coordinate carries sqrt(1 - eps_s^2) of the direction and the sign
    block spreads eps_s over the remaining d-1 coordinates.
    """

    d: int
    M: int
    B_s: np.ndarray    # (M,)
    eps_s: np.ndarray  # (M,)

    def __post_init__(self):
        object.__setattr__(self, "B_s", _frozen_array(self.B_s))
        object.__setattr__(self, "eps_s", _frozen_array(self.eps_s))

    def beta_of(self, v: np.ndarray) -> np.ndarray:
        """Materialize the (M, d) coefficient matrix for a sign pattern v."""
        v = np.asarray(v)
        if v.shape != (self.M, self.d - 1):
            raise DimensionError(
                f"v has shape {v.shape}, expected ({self.M}, {self.d - 1})"
            )
        beta = np.empty((self.M, self.d))
        beta[:, 0] = self.B_s * np.sqrt(1.0 - self.eps_s ** 2)
        beta[:, 1:] = (
            self.B_s[:, None] * v * (self.eps_s / math.sqrt(self.d - 1))[:, None]
        )
        return beta

    def params_of(
        self, v: np.ndarray, p: np.ndarray, sigma_x: float, sigma_xi: float
    ) -> ModelParams:
        """The realized model for pattern v, with the tightest feasible B."""
        p = np.asarray(p, dtype=float)
        beta = self.beta_of(v)
        # B must cover both the max norm and the norm-diversity factor.
        bar = float(p @ self.B_s)
        diversity = bar ** 2 * float(np.mean(self.B_s ** -2.0))
        B = max(float(self.B_s.max()), math.sqrt(diversity))
        return ModelParams(
            d=self.d,
            M=self.M,
            beta=beta,
            mu=np.zeros((self.M, self.d)),
            p=p,
            sigma_x=sigma_x,
            sigma_xi=sigma_xi,
            B=B,
            U=1.0,
        )

    def all_codewords(self):
        """Lazily enumerate the full sign-pattern cube {-1,+1}^{M x (d-1)}."""
        for bits in itertools.product((-1, 1), repeat=self.M * (self.d - 1)):
            yield np.array(bits, dtype=np.int8).reshape(self.M, self.d - 1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "M": self.M,
                "B_s": self.B_s.tolist(),
                "eps_s": self.eps_s.tolist(),
            },
            indent=2,
        )


def build_family(d: int, M: int, B_s, eps_s) -> PackedFamily:
    """Validate and assemble a packed hard-instance family."""
    if d < 2:
        raise ParameterError(f"need d >= 2, got d={d}")
    B_s = np.broadcast_to(np.asarray(B_s, dtype=float), (M,))
    eps_s = np.broadcast_to(np.asarray(eps_s, dtype=float), (M,))
    if np.any(B_s <= 0.0):
        raise ParameterError("B_s must be positive")
    if np.any(eps_s <= 0.0) or np.any(eps_s > 1.0):
        raise ParameterError(f"eps_s must lie in (0, 1], got {eps_s}")
    return PackedFamily(d=d, M=M, B_s=B_s, eps_s=eps_s)


def block_hamming(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-block Hamming distances between two (M, d-1) sign matrices."""
    return np.count_nonzero(np.asarray(v) != np.asarray(w), axis=1)


@dataclass(frozen=True)
class CodeSet:
    """A set of sign matrices with a guaranteed per-block minimum distance."""

    codewords: list
    min_block_distance: int

    @property
    def size(self) -> int:
        return len(self.codewords)

    def to_json(self) -> str:
        return json.dumps(
            {
                "codewords": [np.asarray(v).tolist() for v in self.codewords],
                "min_block_distance": self.min_block_distance,
            }
        )


def gv_code(
    block_length: int, blocks: int, min_dist: int, budget: int, seed: int
) -> CodeSet:
    """Randomized-greedy code search with a per-block distance criterion.

    Draw uniform sign matrices and accept each candidate whose Hamming
    distance to every accepted codeword is >= min_dist in every block.
    The achieved set size depends on the budget; it is reported, never
    asserted against an existential bound.
    """
    if block_length < 1:
        raise ParameterError(f"block length must be >= 1, got {block_length}")
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    achieved = block_length  # max possible per-block distance
    for _ in range(budget):
        cand = rng.choice((-1, 1), size=(blocks, block_length)).astype(np.int8)
        dists = [block_hamming(cand, w) for w in accepted]
        if min_dist >= 1:
            ok = all(int(dv.min()) >= min_dist for dv in dists)
        else:
            ok = all(int(dv.max()) > 0 for dv in dists)  # reject only duplicates
        if ok:
            if dists:
                achieved = min(achieved, min(int(dv.min()) for dv in dists))
            accepted.append(cand)
    if len(accepted) < 2:
        achieved = block_length
    return CodeSet(codewords=accepted, min_block_distance=achieved)


def _check_shared(theta: ModelParams, theta_prime: ModelParams) -> None:
    if theta.d != theta_prime.d or theta.M != theta_prime.M:
        raise DimensionError("the two parameter sets have different (d, M)")
    if (
        theta.sigma_x != theta_prime.sigma_x
        or theta.sigma_xi != theta_prime.sigma_xi
        or not np.array_equal(theta.p, theta_prime.p)
    ):
        raise ParameterError("sigma_x, sigma_xi and p must be shared")


def kl_conditional(
    theta: ModelParams, theta_prime: ModelParams, n_counts
) -> float:
    """KL divergence between the conditional data laws given group counts.

    Per observation in group s the divergence is
    ||dmu||^2/(2 sigma_x^2) + sigma_x^2 ||dbeta||^2 / (2 sigma_xi^2)
    + <mu_s, dbeta>^2 / (2 sigma_xi^2), summed with weights n_s.
    """
    _check_shared(theta, theta_prime)
    n_counts = np.asarray(n_counts, dtype=float)
    if n_counts.shape != (theta.M,):
        raise DimensionError(f"n_counts must have length {theta.M}")
    if theta.sigma_xi <= 0.0:
        raise ParameterError("kl_conditional requires sigma_xi > 0")
    dmu = theta.mu - theta_prime.mu
    dbeta = theta.beta - theta_prime.beta
    per = (
        np.einsum("ij,ij->i", dmu, dmu) / (2.0 * theta.sigma_x ** 2)
        + theta.sigma_x ** 2
        * np.einsum("ij,ij->i", dbeta, dbeta)
        / (2.0 * theta.sigma_xi ** 2)
        + np.einsum("ij,ij->i", theta.mu, dbeta) ** 2 / (2.0 * theta.sigma_xi ** 2)
    )
    return float(n_counts @ per)


def kl_conditional_sample(
    theta: ModelParams,
    theta_prime: ModelParams,
    n_counts,
    n_mc: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo KL via exact Gaussian log-density ratios.

    Each rep draws one observation per group from theta and weighs its
    log-likelihood ratio by n_s; returns (mean, standard error) over reps.
    """
    _check_shared(theta, theta_prime)
    n_counts = np.asarray(n_counts, dtype=float)
    rng = np.random.default_rng(seed)
    total = np.zeros(n_mc)
    for s in range(theta.M):
        x = theta.mu[s] + theta.sigma_x * rng.standard_normal((n_mc, theta.d))
        y = x @ theta.beta[s] + theta.sigma_xi * rng.standard_normal(n_mc)
        # log N(x; mu, sx^2 I) - log N(x; mu', sx^2 I): quadratic terms only.
        llr_x = (
            np.einsum("ij,ij->i", x - theta_prime.mu[s], x - theta_prime.mu[s])
            - np.einsum("ij,ij->i", x - theta.mu[s], x - theta.mu[s])
        ) / (2.0 * theta.sigma_x ** 2)
        llr_y = (
            (y - x @ theta_prime.beta[s]) ** 2 - (y - x @ theta.beta[s]) ** 2
        ) / (2.0 * theta.sigma_xi ** 2)
        total += n_counts[s] * (llr_x + llr_y)
    est = float(total.mean())
    se = float(total.std(ddof=1) / math.sqrt(n_mc))
    return est, se


def packed_pair_kl(
    family: PackedFamily,
    v: np.ndarray,
    v_prime: np.ndarray,
    n_counts,
    sigma_x: float,
    sigma_xi: float,
) -> float:
    """Closed-form KL for two packed members (mu = 0 specialization)."""
    n_counts = np.asarray(n_counts, dtype=float)
    d_h = block_hamming(v, v_prime)
    per = (
        2.0
        * sigma_x ** 2
        * family.B_s ** 2
        * n_counts
        * family.eps_s ** 2
        * d_h
        / (sigma_xi ** 2 * (family.d - 1))
    )
    return float(per.sum())


def packed_pair_separation(
    family: PackedFamily, v: np.ndarray, v_prime: np.ndarray, p, sigma_x: float
) -> float:
    """Two-point risk separation of two packed members, in closed form.

    Equals one quarter of the exact L2 distance between the members' fair
    regressors — the value of the two-point lower bound at mu = 0.
    """
    p = np.asarray(p, dtype=float)
    bar = float(p @ family.B_s)
    d_h = block_hamming(v, v_prime)
    per = p * bar ** 2 * sigma_x ** 2 * family.eps_s ** 2 * d_h / (family.d - 1)
    return float(per.sum())


def _fair_slopes(theta: ModelParams) -> tuple[np.ndarray, float]:
    norms = np.linalg.norm(theta.beta, axis=1)
    if np.any(norms == 0.0):
        raise ParameterError("two-point bound needs nonzero coefficient norms")
    bar = float(theta.p @ norms)
    return bar * theta.beta / norms[:, None], bar


@dataclass(frozen=True)
class TwoPointBound:
    """Two-point minimax lower bound on the worse of two excess risks.

    value includes the squared intercept-mismatch term; simplified keeps
    only the slope-difference term.
    """

    value: float
    simplified: float


def two_point_bound(theta: ModelParams, theta_prime: ModelParams) -> TwoPointBound:
    """Lower-bound inf_f max(E(f; theta), E(f; theta')) in closed form.

    Requires the mean shifts to be small: ||mu_s - mu'_s||^2 / (2 sigma_x^2)
    must be < 1 for every group.
    """
    _check_shared(theta, theta_prime)
    u, _ = _fair_slopes(theta)
    u_prime, _ = _fair_slopes(theta_prime)
    sx2 = theta.sigma_x ** 2
    d = theta.d

    dmu = theta.mu - theta_prime.mu
    mu_bar = 0.5 * (theta.mu + theta_prime.mu)
    dmu_sq = np.einsum("ij,ij->i", dmu, dmu)
    d_s = dmu_sq / (2.0 * sx2)
    if np.any(d_s >= 1.0):
        raise ParameterError(
            f"mean shifts too large for the two-point bound: max d_s = {d_s.max():.6g} >= 1"
        )
    q_s = dmu_sq / (4.0 * sx2)

    v_s = u - u_prime
    dbeta = theta.beta - theta_prime.beta
    sbeta = theta.beta + theta_prime.beta
    const_shift = float(
        theta.p
        @ (
            np.einsum("ij,ij->i", dbeta, mu_bar)
            + 0.5 * np.einsum("ij,ij->i", sbeta, dmu)
        )
    )
    c_s = -0.5 * np.einsum("ij,ij->i", u + u_prime, dmu) + const_shift

    damp = np.exp(-d_s) / 4.0
    slope_term = sx2 * np.einsum("ij,ij->i", v_s, v_s) * (1.0 + q_s) ** -(1.0 + d / 2.0)
    intercept_term = c_s ** 2 * (1.0 + q_s) ** -(d / 2.0)
    value = float(theta.p @ (damp * (slope_term + intercept_term)))
    simplified = float(theta.p @ (damp * slope_term))
    return TwoPointBound(value=value, simplified=simplified)


def fano_value(epsilon: float, K: int, avg_kl: float) -> float:
    """Fano lower bound epsilon * (1 - (avg_kl + ln 2)/ln K), clipped at 0.

    avg_kl should upper-bound the mixture-averaged KL; the max pairwise KL
    over the code is a valid choice.
    """
    if K < 2:
        raise ParameterError(f"Fano bound needs K >= 2 hypotheses, got {K}")
    return max(epsilon * (1.0 - (avg_kl + math.log(2.0)) / math.log(K)), 0.0)


def hard_instance_eps(
    d: int, M: int, sigma_xi: float, sigma_x: float, B_s, n_counts
) -> np.ndarray:
    """The per-group packing radii eps_s for the hard instance family.

    eps_s^2 = ((d-1)/16 - 1/M) * sigma_xi^2 / (2 sigma_x^2 B_s^2 n_s),
    clamped to (0, 1] with a warning when small n pushes it above 1.
    """
    if M * (d - 1) <= 16:
        raise ParameterError(f"need M(d-1) > 16, got M={M}, d={d}")
    B_s = np.broadcast_to(np.asarray(B_s, dtype=float), (M,))
    n_counts = np.broadcast_to(np.asarray(n_counts, dtype=float), (M,))
    eps_sq = (
        ((d - 1) / 16.0 - 1.0 / M)
        * sigma_xi ** 2
        / (2.0 * sigma_x ** 2 * B_s ** 2 * n_counts)
    )
    if np.any(eps_sq <= 0.0):
        raise ParameterError("packing radius is nonpositive; check the geometry")
    eps = np.sqrt(eps_sq)
    if np.any(eps > 1.0):
        warnings.warn(
            "packing radius clamped to 1 for some groups (sample sizes too small)",
            stacklevel=2,
        )
        eps = np.minimum(eps, 1.0)
    return eps
