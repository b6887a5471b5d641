"""Shared test helpers."""

import numpy as np

from fairlinreg import ModelParams


def make_params(beta, mu=None, p=None, sigma_x=1.0, sigma_xi=1.0, B=None, U=1.0):
    """Build a ModelParams from a beta matrix with sensible defaults."""
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    M, d = beta.shape
    if mu is None:
        mu = np.zeros((M, d))
    if p is None:
        p = np.full(M, 1.0 / M)
    if B is None:
        B = float(np.linalg.norm(beta, axis=1).max())
    return ModelParams(
        d=d, M=M, beta=beta, mu=mu, p=p,
        sigma_x=sigma_x, sigma_xi=sigma_xi, B=B, U=U,
    )
