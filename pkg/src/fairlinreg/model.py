"""Data-generating model: parameter tuple, constraint validation, sampling.

The model draws a group label S with probabilities p, features
X | S=s ~ N(mu_s, sigma_x^2 I), and an outcome Y = <beta_s, X> + noise with
noise ~ N(0, sigma_xi^2).  Covariance is fixed to sigma_x^2 * I (variance
convention) throughout.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError

# Absolute slack on the constraint-set inequalities; absorbs float round-off.
CONSTRAINT_TOL = 1e-9
PROB_TOL = 1e-12


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ModelParams:
    """Full distribution parameter tuple (beta, mu, p, sigma_x, sigma_xi, B, U).

    beta and mu are (M, d) arrays; p is a length-M probability vector.
    B bounds the coefficient norms and their diversity; U bounds ||mu_s||.
    Instances are immutable and safe to share across threads.
    """

    d: int
    M: int
    beta: np.ndarray
    mu: np.ndarray
    p: np.ndarray
    sigma_x: float
    sigma_xi: float
    B: float
    U: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _frozen_array(self.beta))
        object.__setattr__(self, "mu", _frozen_array(self.mu))
        object.__setattr__(self, "p", _frozen_array(self.p))
        if self.d < 1 or self.M < 1:
            raise DimensionError(f"need d >= 1 and M >= 1, got d={self.d}, M={self.M}")
        for name, arr in (("beta", self.beta), ("mu", self.mu)):
            if arr.shape != (self.M, self.d):
                raise DimensionError(
                    f"{name} has shape {arr.shape}, expected ({self.M}, {self.d})"
                )
        if self.p.shape != (self.M,):
            raise DimensionError(f"p has shape {self.p.shape}, expected ({self.M},)")

    @property
    def beta_norms(self) -> np.ndarray:
        return np.linalg.norm(self.beta, axis=1)

    def diversity_factor(self) -> float:
        """Left side of the second norm-diversity inequality.

        (sum_s p_s ||beta_s||)^2 * (1/M) * sum_s ||beta_s||^-2; defined only
        when all norms are positive.
        """
        norms = self.beta_norms
        if np.any(norms == 0.0):
            raise ParameterError("diversity factor undefined for zero-norm beta_s")
        return float((self.p @ norms) ** 2 * np.mean(norms ** -2.0))

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "M": self.M,
                "beta": self.beta.tolist(),
                "mu": self.mu.tolist(),
                "p": self.p.tolist(),
                "sigma_x": self.sigma_x,
                "sigma_xi": self.sigma_xi,
                "B": self.B,
                "U": self.U,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        obj = json.loads(text)
        try:
            return cls(
                d=int(obj["d"]),
                M=int(obj["M"]),
                beta=obj["beta"],
                mu=obj["mu"],
                p=obj["p"],
                sigma_x=float(obj["sigma_x"]),
                sigma_xi=float(obj["sigma_xi"]),
                B=float(obj["B"]),
                U=float(obj["U"]),
            )
        except KeyError as exc:
            raise ParameterError(f"missing field in params JSON: {exc}") from exc


def validate_params(params: ModelParams) -> list[str]:
    """Return a report of violated constraints (empty iff the params are valid).

    Each entry names the constraint and the measured value.  Pure reporting:
    never raises for a mathematical violation.
    """
    report: list[str] = []
    p = params.p
    psum = float(p.sum())
    if abs(psum - 1.0) > PROB_TOL:
        report.append(f"group probabilities must sum to 1: sum(p) = {psum!r}")
    if np.any(p <= 0.0):
        report.append(f"every group probability must be positive: min(p) = {p.min()!r}")
    if params.sigma_x <= 0.0:
        report.append(f"sigma_x must be positive: {params.sigma_x!r}")
    if params.sigma_xi < 0.0:
        report.append(f"sigma_xi must be nonnegative: {params.sigma_xi!r}")
    if params.B <= 0.0:
        report.append(f"B must be positive: {params.B!r}")
    if params.U <= 0.0:
        report.append(f"U must be positive: {params.U!r}")

    norms = params.beta_norms
    max_norm = float(norms.max())
    if max_norm > params.B + CONSTRAINT_TOL:
        report.append(
            f"max-norm violated: max_s ||beta_s|| = {max_norm!r} > B = {params.B!r}"
        )
    if np.all(norms > 0.0):
        factor = params.diversity_factor()
        if factor > params.B ** 2 + CONSTRAINT_TOL:
            report.append(
                f"norm-diversity violated: factor = {factor!r} > B^2 = {params.B ** 2!r}"
            )
    mu_norms = np.linalg.norm(params.mu, axis=1)
    max_mu = float(mu_norms.max())
    if max_mu > params.U + CONSTRAINT_TOL:
        report.append(
            f"mean-norm violated: max_s ||mu_s|| = {max_mu!r} > U = {params.U!r}"
        )
    return report


@dataclass(frozen=True)
class Dataset:
    """n observations (x_i, s_i, y_i) with group labels stored 0-based.

    The CSV interchange format uses 1-based group labels in column ``s``.
    """

    x: np.ndarray  # (n, d)
    s: np.ndarray  # (n,) int, in [0, M)
    y: np.ndarray  # (n,)
    M: int

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x))
        object.__setattr__(self, "s", _frozen_array(self.s, dtype=np.int64))
        object.__setattr__(self, "y", _frozen_array(self.y))
        if self.x.ndim != 2 or self.s.shape != (self.x.shape[0],) or self.y.shape != (
            self.x.shape[0],
        ):
            raise DimensionError("inconsistent dataset array shapes")
        if self.n and (self.s.min() < 0 or self.s.max() >= self.M):
            raise DimensionError("group labels out of range")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def group_counts(self) -> np.ndarray:
        return np.bincount(self.s, minlength=self.M)

    def group_indices(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.s == s)

    def to_csv(self, path: str | Path) -> None:
        header = [f"x_{j + 1}" for j in range(self.d)] + ["s", "y"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(self.n):
                row = [f"{v:.17g}" for v in self.x[i]]
                row.append(str(int(self.s[i]) + 1))
                row.append(f"{self.y[i]:.17g}")
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path: str | Path, M: int) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            d = len(header) - 2
            xs, ss, ys = [], [], []
            for row in reader:
                xs.append([float(v) for v in row[:d]])
                ss.append(int(row[d]) - 1)
                ys.append(float(row[d + 1]))
        return cls(x=np.array(xs).reshape(len(ys), d), s=np.array(ss), y=np.array(ys), M=M)


def sample_dataset(
    params: ModelParams, n: int, seed: int | np.random.SeedSequence
) -> Dataset:
    """Draw n i.i.d. observations from the model; deterministic given seed."""
    report = validate_params(params)
    if report:
        raise ParameterError("invalid model parameters: " + "; ".join(report))
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    # Inverse-CDF categorical draw on the cumulative weights.
    cum = np.cumsum(params.p)
    cum[-1] = 1.0
    s = np.searchsorted(cum, rng.random(n), side="right").astype(np.int64)
    x = params.mu[s] + params.sigma_x * rng.standard_normal((n, params.d))
    y = np.einsum("ij,ij->i", params.beta[s], x)
    if params.sigma_xi > 0.0:
        y = y + params.sigma_xi * rng.standard_normal(n)
    return Dataset(x=x, s=s, y=y, M=params.M)


@dataclass(frozen=True)
class GroupAffineRegressor:
    """Per-group affine regressor f(x, s) = <w_s, x> + b_s."""

    w: np.ndarray  # (M, d)
    b: np.ndarray  # (M,)

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen_array(self.w))
        object.__setattr__(self, "b", _frozen_array(self.b))
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[0],):
            raise DimensionError("w must be (M, d) and b must be (M,)")

    @property
    def M(self) -> int:
        return self.w.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]

    def predict(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over rows of x with matching group labels."""
        x = np.asarray(x, dtype=float)
        s = np.asarray(s, dtype=np.int64)
        if x.shape[-1] != self.d:
            raise DimensionError(f"x has dimension {x.shape[-1]}, expected {self.d}")
        return np.einsum("ij,ij->i", self.w[s], np.atleast_2d(x)) + self.b[s]

    def to_json(self) -> str:
        return json.dumps({"w": self.w.tolist(), "b": self.b.tolist()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GroupAffineRegressor":
        obj = json.loads(text)
        return cls(w=obj["w"], b=obj["b"])


def evaluate(regressor: GroupAffineRegressor, x: Sequence[float], s: int) -> float:
    """Evaluate <w_s, x> + b_s at a single point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (regressor.d,):
        raise DimensionError(f"x has shape {x.shape}, expected ({regressor.d},)")
    if not 0 <= s < regressor.M:
        raise DimensionError(f"group index {s} out of range [0, {regressor.M})")
    return float(regressor.w[s] @ x + regressor.b[s])
