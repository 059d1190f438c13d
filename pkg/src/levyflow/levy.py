"""The correlated random-walk model on the topic simplex.

One step draws the next position from a Dirichlet tilted toward the current
one; the tilt strength (the focus weight lambda) is itself drawn per step
from a log-normal.  Jump sizes are measured as surprise in bits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DimensionNotThree
from .simplex import (
    AlphaVector,
    LevyParams,
    _dirichlet_with_logs,
    _kl_bits_from_logs,
    kl_divergence_rows,
    sample_lognormal,
)


@dataclass
class Trajectory:
    """Time-ordered simplex positions with their chunk-to-chunk surprises."""

    points: np.ndarray   # (K, N)
    jumps: np.ndarray    # (K-1,) bits

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.jumps = np.asarray(self.jumps, dtype=np.float64)
        if self.jumps.shape != (self.points.shape[0] - 1,):
            raise ValueError("need exactly one jump per consecutive pair of points")
        if not np.all(np.isfinite(self.jumps)) or np.any(self.jumps < 0):
            raise ValueError("jumps must be finite and nonnegative")

    @classmethod
    def from_points(cls, points) -> "Trajectory":
        points = np.asarray(points, dtype=np.float64)
        return cls(points=points, jumps=kl_divergence_rows(points[1:], points[:-1]))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def to_csv(self) -> str:
        """Rows of chunk index plus mixture components."""
        buf = io.StringIO()
        n = self.points.shape[1]
        buf.write("chunk," + ",".join(f"topic_{j}" for j in range(n)) + "\n")
        for i, row in enumerate(self.points):
            buf.write(str(i) + "," + ",".join(repr(x) for x in row) + "\n")
        return buf.getvalue()


@dataclass
class JumpSample:
    """Simulated jump sizes plus the settings that produced them."""

    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("jump values must be finite and nonnegative")


def step(
    v_prev: np.ndarray,
    alpha: AlphaVector,
    lam: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """One move: draw the next position from Dir(alpha + lambda * v_prev)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    v_prev = np.asarray(v_prev, dtype=np.float64)
    v, _ = _dirichlet_with_logs(alpha.alpha + lam * v_prev, rng)
    return v


def simulate_trajectory(
    alpha: AlphaVector,
    params: LevyParams,
    n_steps: int,
    rng: np.random.Generator,
) -> Trajectory:
    """Generate a trajectory of ``n_steps`` positions.

    The first position is a stationary draw; each later one applies
    :func:`step` with a fresh log-normal focus weight.
    """
    if n_steps < 2:
        raise ValueError("need at least 2 steps")
    n = alpha.n_topics
    points = np.empty((n_steps, n))
    logs = np.empty((n_steps, n))
    v, logv = _dirichlet_with_logs(alpha.alpha, rng)
    points[0], logs[0] = v, logv
    lams = sample_lognormal(params, rng, size=n_steps - 1)
    for i in range(n_steps - 1):
        v, logv = _dirichlet_with_logs(alpha.alpha + lams[i] * points[i], rng)
        points[i + 1], logs[i + 1] = v, logv
    jumps = _kl_bits_from_logs(points[1:], logs[1:], logs[:-1])
    return Trajectory(points=points, jumps=jumps)


def simulate_jump_distribution(
    alpha: AlphaVector,
    params_or_lambda,
    n_sims: int,
    rng: np.random.Generator,
) -> JumpSample:
    """Simulate the model-implied jump-size distribution.

    Each of the ``n_sims`` values is the surprise of one stationary-start
    move: v ~ Dir(alpha), then v' ~ Dir(alpha + lambda v).  The focus weight
    is fixed when ``params_or_lambda`` is a number, or drawn per pair from
    the log-normal when it is a :class:`LevyParams`.
    """
    if n_sims < 1000:
        raise ValueError("need at least 1000 simulations")
    n = alpha.n_topics
    if isinstance(params_or_lambda, LevyParams):
        lams = sample_lognormal(params_or_lambda, rng, size=n_sims)
        provenance = {"mu": params_or_lambda.mu, "sigma": params_or_lambda.sigma}
    elif isinstance(params_or_lambda, np.ndarray):
        lams = np.asarray(params_or_lambda, dtype=np.float64)
        if lams.shape != (n_sims,) or np.any(lams < 0):
            raise ValueError("per-pair lambdas must be a nonnegative (n_sims,) array")
        provenance = {"lambda": "per-pair"}
    else:
        lam = float(params_or_lambda)
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        lams = np.full(n_sims, lam)
        provenance = {"lambda": lam}
    provenance.update({"alpha_digest": alpha.digest(), "n_topics": n, "n_sims": n_sims})

    v, logv = _dirichlet_with_logs(np.broadcast_to(alpha.alpha, (n_sims, n)), rng)
    v2, logv2 = _dirichlet_with_logs(alpha.alpha[None, :] + lams[:, None] * v, rng)
    return JumpSample(values=_kl_bits_from_logs(v2, logv2, logv), provenance=provenance)


def simulate_jumps_from_positions(
    prev_points: np.ndarray,
    alpha: AlphaVector,
    lam,
    n_sims: int,
    rng: np.random.Generator,
    block: int = 64,
) -> np.ndarray:
    """Per-position jump samples: row i holds surprises of moves out of
    ``prev_points[i]``.  Returns (K, n_sims).

    ``lam`` is a fixed focus weight or a (K, n_sims) array of per-sample
    weights.  Positions must be strictly positive (they are observed
    mixtures, which smoothing guarantees).
    """
    prev = np.asarray(prev_points, dtype=np.float64)
    n_rows, n = prev.shape
    lam_rows = None if np.isscalar(lam) else np.asarray(lam, dtype=np.float64)
    log_prev = np.log(prev)
    out = np.empty((n_rows, n_sims))
    for s in range(0, n_rows, block):
        e = min(s + block, n_rows)
        if lam_rows is None:
            shapes = np.broadcast_to(
                alpha.alpha[None, None, :] + lam * prev[s:e, None, :], (e - s, n_sims, n)
            )
        else:
            shapes = (
                alpha.alpha[None, None, :]
                + lam_rows[s:e, :, None] * prev[s:e, None, :]
            )
        v2, logv2 = _dirichlet_with_logs(shapes, rng)
        out[s:e] = _kl_bits_from_logs(v2, logv2, log_prev[s:e, None, :])
    return out


# ---------------------------------------------------------------------
# simulation grid over the focus weight
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaGridSpec:
    """Log-spaced focus-weight grid used to amortize likelihood simulation.

    The grid nodes carve the log-lambda range into cells (half-width cells at
    the ends).  Simulation draws lambda log-uniformly within each cell rather
    than at the node, so the mixture keeps the within-cell spread of the
    focus weight; mixture weights are exact log-normal cell masses.
    """

    n_cells: int = 96
    lambda_min: float = 1e-4
    lambda_max: float = 1e4
    sims_per_cell: int = 20_000
    conditional_sims: int = 500

    def __post_init__(self):
        if self.n_cells < 2 or not 0 < self.lambda_min < self.lambda_max:
            raise ValueError("invalid focus-weight grid")

    @property
    def log_lambdas(self) -> np.ndarray:
        return np.linspace(np.log(self.lambda_min), np.log(self.lambda_max), self.n_cells)

    @property
    def cell_edges(self) -> np.ndarray:
        """(n_cells + 1,) cell boundaries in log-lambda."""
        nodes = self.log_lambdas
        return np.concatenate([[nodes[0]], (nodes[:-1] + nodes[1:]) / 2, [nodes[-1]]])


# ---------------------------------------------------------------------
# three-topic density fields
# ---------------------------------------------------------------------

@dataclass
class DensityGrid:
    """Step-kernel density sampled on a barycentric grid (three topics)."""

    points: np.ndarray    # (M, 3) grid-cell centers on the simplex
    density: np.ndarray   # (M,)
    weights: np.ndarray   # (M,) quadrature areas, summing to 1/2

    def integral(self) -> float:
        return float(np.dot(self.density, self.weights))

    def to_csv(self, header_lines: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in header_lines or []:
            buf.write(f"# {line}\n")
        buf.write("v1,v2,v3,density,weight\n")
        for p, d, w in zip(self.points, self.density, self.weights):
            buf.write(f"{p[0]!r},{p[1]!r},{p[2]!r},{d!r},{w!r}\n")
        return buf.getvalue()


def _dirichlet_log_pdf(points: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    norm = gammaln(alpha.sum()) - gammaln(alpha).sum()
    return norm + ((alpha - 1.0) * np.log(points)).sum(axis=1)


def density_grid(
    alpha: AlphaVector,
    lam: float,
    v_prev: np.ndarray,
    resolution: int = 128,
) -> DensityGrid:
    """Evaluate the step-kernel density Dir(alpha + lambda * v_prev) on the
    2-simplex, for three topics only.

    The grid divides the unit triangle (first two coordinates) into
    ``resolution^2`` square cells; cells cut by the diagonal enter as
    half-cells so the quadrature weights sum to the exact triangle area.
    """
    if alpha.n_topics != 3:
        raise DimensionNotThree(f"density grids need 3 topics, got {alpha.n_topics}")
    v_prev = np.asarray(v_prev, dtype=np.float64)
    if v_prev.shape != (3,):
        raise DimensionNotThree("v_prev must have 3 components")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")

    r = resolution
    ii, jj = np.meshgrid(np.arange(r), np.arange(r), indexing="ij")
    full = (ii + jj) <= r - 2
    diag = (ii + jj) == r - 1
    xs = np.concatenate([(ii[full] + 0.5) / r, (ii[diag] + 1.0 / 3.0) / r])
    ys = np.concatenate([(jj[full] + 0.5) / r, (jj[diag] + 1.0 / 3.0) / r])
    weights = np.concatenate([
        np.full(int(full.sum()), 1.0 / r**2),
        np.full(int(diag.sum()), 0.5 / r**2),
    ])
    points = np.column_stack([xs, ys, 1.0 - xs - ys])

    shape = alpha.alpha + lam * v_prev
    density = np.exp(_dirichlet_log_pdf(points, shape))
    return DensityGrid(points=points, density=density, weights=weights)
