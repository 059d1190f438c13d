"""Probability-simplex numerics: surprise, Dirichlet/log-normal sampling, seeded RNG.

Everything stochastic in the package runs through an explicit
``numpy.random.Generator`` handle.  Handles are never shared between
parallel tasks; independent child generators are derived from a master
seed with :func:`child_seed_sequence`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import InfiniteDivergence

LN2 = float(np.log(2.0))


# ---------------------------------------------------------------------
# seeded, splittable randomness
# ---------------------------------------------------------------------

def child_seed_sequence(master_seed: int, *labels) -> np.random.SeedSequence:
    """Derive an independent seed stream from a master seed and string/int labels.

    The labels are hashed with SHA-256 so the derivation is stable across
    processes and platforms (unlike the builtin ``hash``).
    """
    digest = hashlib.sha256(repr(tuple(labels)).encode("utf-8")).digest()
    spawn_key = tuple(int.from_bytes(digest[i:i + 4], "big") for i in range(0, 16, 4))
    return np.random.SeedSequence(entropy=master_seed, spawn_key=spawn_key)


def make_rng(seed) -> np.random.Generator:
    """Build a Generator from an int seed or a SeedSequence."""
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------

@dataclass
class AlphaVector:
    """Parameters of the stationary Dirichlet over topic mixtures.

    ``converged`` is set False when the maximum-likelihood fit hit its
    iteration cap (the values are then the last iterate).
    """

    alpha: np.ndarray
    converged: bool = True

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        if self.alpha.ndim != 1 or self.alpha.size < 2:
            raise ValueError("alpha must be a 1-d vector with at least 2 components")
        if not np.all(self.alpha > 0):
            raise ValueError("alpha components must be strictly positive")

    @property
    def total(self) -> float:
        return float(self.alpha.sum())

    @property
    def n_topics(self) -> int:
        return self.alpha.size

    def digest(self) -> str:
        """Stable content hash, used in artifact provenance."""
        return hashlib.sha256(self.alpha.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class LevyParams:
    """Log-normal focus-weight parameters: mean and sd of log(lambda)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class LambdaRange:
    """Median and 15%/85% quantiles of the focus weight."""

    median: float
    q15: float
    q85: float

    def __post_init__(self):
        if not (self.q15 <= self.median <= self.q85):
            raise ValueError("quantiles out of order")


# ---------------------------------------------------------------------
# surprise
# ---------------------------------------------------------------------

def kl_divergence(p, q) -> float:
    """Surprise, in bits, of seeing distribution ``p`` after ``q``.

    Terms with ``p[i] == 0`` contribute zero.  Raises
    :class:`InfiniteDivergence` if ``p`` puts mass where ``q`` has none.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise InfiniteDivergence("p has mass where q is zero")
    pm = p[mask]
    return max(float(np.dot(pm, np.log(pm / q[mask]))) / LN2, 0.0)


def kl_divergence_rows(p_rows: np.ndarray, q_rows: np.ndarray) -> np.ndarray:
    """Row-wise surprise in bits for matched (M, N) arrays of distributions."""
    p_rows = np.asarray(p_rows, dtype=np.float64)
    q_rows = np.asarray(q_rows, dtype=np.float64)
    if np.any((p_rows > 0) & (q_rows <= 0)):
        raise InfiniteDivergence("p has mass where q is zero")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p_rows > 0, p_rows * np.log(p_rows / q_rows), 0.0)
    return np.maximum(terms.sum(axis=-1) / LN2, 0.0)


def _kl_bits_from_logs(p: np.ndarray, log_p: np.ndarray, log_q: np.ndarray) -> np.ndarray:
    # Internal: log components come straight from the sampler, so underflowed
    # probabilities keep finite logs and the divergence stays finite.
    return np.maximum(np.einsum("...i,...i->...", p, log_p - log_q) / LN2, 0.0)


# ---------------------------------------------------------------------
# Dirichlet sampling
# ---------------------------------------------------------------------

def _dirichlet_with_logs(shapes: np.ndarray, rng: np.random.Generator):
    """Sample Dirichlet rows for an (..., N) array of shape parameters.

    Returns ``(v, log_v)``.  Uses the boost identity
    ``G_a = G_{a+1} * U^(1/a)`` evaluated in log space, which stays exact
    and finite for arbitrarily small shapes (where a plain gamma draw
    would underflow to zero).
    """
    a = np.asarray(shapes, dtype=np.float64)
    g = rng.standard_gamma(a + 1.0)
    u = rng.random(a.shape)
    log_g = np.log(g) + np.log1p(-u) / a
    log_norm = _logsumexp_last(log_g)
    log_v = log_g - log_norm[..., None]
    return np.exp(log_v), log_v


def _logsumexp_last(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=-1)
    return m + np.log(np.sum(np.exp(x - m[..., None]), axis=-1))


def sample_dirichlet(alpha, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw one point (or ``size`` rows) from Dir(alpha)."""
    a = alpha.alpha if isinstance(alpha, AlphaVector) else np.asarray(alpha, dtype=np.float64)
    if not np.all(a > 0):
        raise ValueError("alpha components must be strictly positive")
    shape = a if size is None else np.broadcast_to(a, (size, a.size))
    v, _ = _dirichlet_with_logs(shape, rng)
    return v


# ---------------------------------------------------------------------
# log-normal focus weights
# ---------------------------------------------------------------------

def sample_lognormal(params: LevyParams, rng: np.random.Generator, size: int | None = None):
    """Draw focus weights lambda = exp(mu + sigma * z)."""
    z = rng.standard_normal() if size is None else rng.standard_normal(size)
    return np.exp(params.mu + params.sigma * z)


def lognormal_quantile(params: LevyParams, q: float) -> float:
    """Quantile of the focus-weight distribution, exp(mu + sigma * probit(q))."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    return float(np.exp(params.mu + params.sigma * ndtri(q)))


def lambda_range(params: LevyParams) -> LambdaRange:
    """Median and 15%/85% points of the focus-weight distribution."""
    return LambdaRange(
        median=lognormal_quantile(params, 0.5),
        q15=lognormal_quantile(params, 0.15),
        q85=lognormal_quantile(params, 0.85),
    )
