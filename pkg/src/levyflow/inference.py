"""Simulated-likelihood fitting of the focus-weight distribution.

The jump-size law implied by the model has no closed form, so densities are
estimated from simulation.  A log-spaced grid of fixed focus weights is
simulated once; the likelihood at any (mu, sigma) is then a quadrature
mixture of the per-cell densities, which amortizes the simulation cost over
the whole posterior grid.  The posterior itself is a flat-prior grid,
normalized in log space, and point estimates are posterior means computed
by deterministic weighted sums.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.special import ndtr

from .errors import DegenerateSample, GridBoundaryWarning
from .levy import (
    JumpSample,
    LambdaGridSpec,
    Trajectory,
    simulate_jump_distribution,
    simulate_jumps_from_positions,
)
from .simplex import (
    AlphaVector,
    LambdaRange,
    LevyParams,
    child_seed_sequence,
    lambda_range,
    make_rng,
)

JUMP_CLAMP_BITS = 1e-12
DENSITY_FLOOR = 1e-12
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def _clamped_log_jumps(jumps) -> np.ndarray:
    values = np.asarray(jumps, dtype=np.float64)
    if values.size and (np.any(~np.isfinite(values)) or np.any(values < 0)):
        raise ValueError("jumps must be finite and nonnegative")
    return np.log(np.maximum(values, JUMP_CLAMP_BITS))


def _silverman_bandwidth(x: np.ndarray) -> float:
    std = float(np.std(x))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(std, (q75 - q25) / 1.34) or std
    return 0.9 * spread * x.size ** (-0.2)


# ---------------------------------------------------------------------
# density estimation on the log-jump axis
# ---------------------------------------------------------------------

@dataclass
class DensityEstimate:
    """Gaussian kernel density of log jump sizes, tabulated on a grid.

    The density is floored at ``floor`` everywhere, including outside the
    tabulated support, so log-likelihoods stay finite.
    """

    support: np.ndarray
    density: np.ndarray
    floor: float
    bandwidth: float

    def evaluate_log(self, x) -> np.ndarray:
        """Density at log-jump coordinates ``x``."""
        out = np.interp(x, self.support, self.density, left=self.floor, right=self.floor)
        return np.maximum(out, self.floor)

    def evaluate(self, jumps) -> np.ndarray:
        """Density at jump sizes in bits."""
        return self.evaluate_log(_clamped_log_jumps(jumps))


def estimate_density(
    sample: JumpSample | np.ndarray,
    grid_len: int = 1024,
    floor: float = DENSITY_FLOOR,
) -> DensityEstimate:
    """Kernel density of a simulated jump sample.

    Works on log(jump) with the Silverman rule-of-thumb bandwidth; the
    binned histogram is smoothed with a Gaussian filter and renormalized to
    unit integral before flooring.  Zero jumps are clamped to a small
    positive size first.
    """
    values = sample.values if isinstance(sample, JumpSample) else np.asarray(sample)
    if values.size < 1000:
        raise ValueError("need at least 1000 simulated jumps")
    x = _clamped_log_jumps(values)
    if np.ptp(x) == 0.0:
        raise DegenerateSample("all jump values identical")
    bw = _silverman_bandwidth(x)
    lo = float(x.min()) - 4.0 * bw
    hi = float(x.max()) + 4.0 * bw
    support = np.linspace(lo, hi, grid_len)
    step = support[1] - support[0]
    hist, _ = np.histogram(x, bins=grid_len, range=(lo - step / 2, hi + step / 2))
    density = gaussian_filter1d(hist.astype(np.float64), sigma=bw / step, mode="constant")
    density /= np.trapezoid(density, support)
    return DensityEstimate(
        support=support, density=np.maximum(density, floor), floor=floor, bandwidth=bw
    )


def log_likelihood(jumps, dens: DensityEstimate) -> float:
    """Sum of log densities of the observed jumps (log-jump convention).

    The Jacobian of the log transform is a constant over parameters and is
    left out, as is the flat-prior offset.
    """
    x = _clamped_log_jumps(jumps)
    if x.size == 0:
        return 0.0
    return float(np.log(dens.evaluate_log(x)).sum())


# ---------------------------------------------------------------------
# posterior grid over (mu, sigma)
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Flat-prior grid bounds.  The defaults enclose median focus weights
    from exp(-5) = 0.0067 up to exp(4) = 54.6."""

    mu_min: float = -5.0
    mu_max: float = 4.0
    mu_points: int = 61
    sigma_min: float = 0.05
    sigma_max: float = 3.0
    sigma_points: int = 60

    def __post_init__(self):
        if not (self.mu_min < self.mu_max and 0 < self.sigma_min < self.sigma_max):
            raise ValueError("grid bounds out of order")
        if self.mu_points < 2 or self.sigma_points < 2:
            raise ValueError("need at least 2 grid points per axis")

    @property
    def mu_axis(self) -> np.ndarray:
        return np.linspace(self.mu_min, self.mu_max, self.mu_points)

    @property
    def sigma_axis(self) -> np.ndarray:
        return np.linspace(self.sigma_min, self.sigma_max, self.sigma_points)


def _cell_mass_weights(edges: np.ndarray, mu_grid, sigma_grid) -> np.ndarray:
    """Exact log-normal mass per grid cell, normalized over the grid.

    Broadcasts over leading axes of mu_grid/sigma_grid.  Parameter points
    whose whole mass falls outside the grid snap to the nearest edge cell.
    """
    mu = np.asarray(mu_grid, dtype=np.float64)
    sigma = np.asarray(sigma_grid, dtype=np.float64)
    z = (edges - mu[..., None]) / sigma[..., None]
    weights = np.diff(ndtr(z), axis=-1)
    total = weights.sum(axis=-1, keepdims=True)
    starved = total[..., 0] <= 0.0
    if np.any(starved):
        centers = (edges[:-1] + edges[1:]) / 2
        nearest = np.argmin(np.abs(centers - mu[..., None]), axis=-1)
        onehot = np.eye(len(centers))[nearest]
        weights = np.where(starved[..., None], onehot, weights)
        total = weights.sum(axis=-1, keepdims=True)
    return weights / total


class LambdaGridMixture:
    """Stationary-start jump densities simulated once per focus-weight cell.

    Each cell's sample draws its focus weight log-uniformly within the cell,
    so the mixture retains within-cell spread; ``loglik_profile`` then mixes
    the per-cell densities with exact log-normal cell masses (renormalized,
    truncating mass outside the grid).
    """

    def __init__(self, alpha: AlphaVector, spec: LambdaGridSpec | None = None, seed: int = 0):
        self.alpha = alpha
        self.spec = spec or LambdaGridSpec()
        self.seed = seed
        self.log_lambdas = self.spec.log_lambdas
        self.cell_edges = self.spec.cell_edges
        self.densities: list[DensityEstimate] = []
        m = self.spec.sims_per_cell
        for j in range(self.spec.n_cells):
            rng = make_rng(child_seed_sequence(seed, "lambda-grid", j))
            lams = np.exp(rng.uniform(self.cell_edges[j], self.cell_edges[j + 1], size=m))
            sample = simulate_jump_distribution(alpha, lams, m, rng)
            self.densities.append(estimate_density(sample))

    def quadrature_weights(self, params: LevyParams) -> np.ndarray:
        """Normalized log-normal mass per grid cell at one (mu, sigma)."""
        return _cell_mass_weights(self.cell_edges, params.mu, params.sigma)

    def log_density_matrix(self, jumps) -> np.ndarray:
        """(n_cells, n_jumps) per-cell densities at the observed jumps."""
        x = _clamped_log_jumps(jumps)
        return np.stack([d.evaluate_log(x) for d in self.densities])

    def loglik_profile(
        self,
        jumps,
        mu_axis: np.ndarray,
        sigma_axis: np.ndarray,
        density_matrix: np.ndarray | None = None,
    ) -> np.ndarray:
        dm = self.log_density_matrix(jumps) if density_matrix is None else density_matrix
        return _profile_from_matrix(dm, self.cell_edges, mu_axis, sigma_axis)

    def loglik(self, jumps, params: LevyParams) -> float:
        profile = self.loglik_profile(jumps, np.array([params.mu]), np.array([params.sigma]))
        return float(profile[0, 0])


def _profile_from_matrix(density_matrix, cell_edges, mu_axis, sigma_axis):
    mu_grid, sigma_grid = np.meshgrid(mu_axis, sigma_axis, indexing="ij")
    weights = _cell_mass_weights(cell_edges, mu_grid, sigma_grid)
    mixed = weights.reshape(-1, density_matrix.shape[0]) @ density_matrix
    return np.log(mixed).sum(axis=1).reshape(mu_grid.shape)


def conditional_density_matrix(
    trajectory: Trajectory,
    alpha: AlphaVector,
    spec: LambdaGridSpec | None = None,
    seed: int = 0,
    floor: float = DENSITY_FLOOR,
) -> np.ndarray:
    """(n_cells, n_jumps) conditional jump densities.

    Entry (j, i) is the kernel-density estimate of the jump out of the
    observed position i at fixed focus weight lambda_j, evaluated at the
    observed jump i.  Since each density is only ever read at one point,
    the Gaussian kernel is evaluated directly instead of being tabulated.
    """
    spec = spec or LambdaGridSpec()
    x = _clamped_log_jumps(trajectory.jumps)
    prev = trajectory.points[:-1]
    n_cells = spec.n_cells
    out = np.empty((n_cells, x.size))
    m = spec.conditional_sims
    edges = spec.cell_edges
    for j in range(n_cells):
        rng = make_rng(child_seed_sequence(seed, "conditional-grid", j))
        lam_draws = np.exp(rng.uniform(edges[j], edges[j + 1], size=(prev.shape[0], m)))
        sims = simulate_jumps_from_positions(prev, alpha, lam_draws, m, rng)
        lx = np.log(np.maximum(sims, JUMP_CLAMP_BITS))
        std = lx.std(axis=1)
        q75, q25 = np.percentile(lx, [75, 25], axis=1)
        spread = np.minimum(std, (q75 - q25) / 1.34)
        spread = np.where(spread > 0, spread, std)
        h = np.maximum(0.9 * spread * m ** (-0.2), 1e-12)
        zed = (x[:, None] - lx) / h[:, None]
        out[j] = np.exp(-0.5 * zed * zed).mean(axis=1) / (h * _SQRT_2PI)
    return np.maximum(out, floor)


@dataclass
class PosteriorGrid:
    """Flat-prior posterior over (mu, sigma), normalized in log space."""

    mu_axis: np.ndarray
    sigma_axis: np.ndarray
    log_post: np.ndarray
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        flat = self.log_post - self.log_post.max()
        w = np.exp(flat)
        self.weights = w / w.sum()

    def argmax_cell(self) -> tuple[int, int]:
        return np.unravel_index(int(np.argmax(self.log_post)), self.log_post.shape)

    def boundary_hit(self) -> bool:
        i, j = self.argmax_cell()
        return (
            i in (0, self.mu_axis.size - 1) or j in (0, self.sigma_axis.size - 1)
        )

    def to_csv(self) -> str:
        lines = ["mu,sigma,log_post,weight"]
        for i, mu in enumerate(self.mu_axis):
            for j, sg in enumerate(self.sigma_axis):
                lines.append(f"{mu!r},{sg!r},{self.log_post[i, j]!r},{self.weights[i, j]!r}")
        return "\n".join(lines) + "\n"


def posterior_grid(
    data,
    alpha: AlphaVector,
    grid_spec: GridSpec | None = None,
    lambda_spec: LambdaGridSpec | None = None,
    seed: int = 0,
    likelihood: str = "auto",
    mixture: LambdaGridMixture | None = None,
) -> PosteriorGrid:
    """Evaluate the flat-prior posterior of (mu, sigma) on a grid.

    ``data`` is a :class:`Trajectory` or a bare array of observed jumps.
    With ``likelihood="conditional"`` (the default for trajectories) each
    jump's density is conditioned on its observed starting position; with
    ``"stationary"`` all jumps share the stationary-start mixture law,
    which a prebuilt ``mixture`` can serve without re-simulating.
    """
    grid_spec = grid_spec or GridSpec()
    lambda_spec = lambda_spec or LambdaGridSpec()
    if likelihood == "auto":
        likelihood = "conditional" if isinstance(data, Trajectory) else "stationary"
    if likelihood not in ("conditional", "stationary"):
        raise ValueError(f"unknown likelihood variant {likelihood!r}")

    mu_axis, sigma_axis = grid_spec.mu_axis, grid_spec.sigma_axis
    if likelihood == "conditional":
        if not isinstance(data, Trajectory):
            raise ValueError("conditional likelihood needs a Trajectory with positions")
        dm = conditional_density_matrix(data, alpha, lambda_spec, seed)
        log_post = _profile_from_matrix(dm, lambda_spec.cell_edges, mu_axis, sigma_axis)
    else:
        jumps = data.jumps if isinstance(data, Trajectory) else data
        mix = mixture or LambdaGridMixture(alpha, lambda_spec, seed)
        log_post = mix.loglik_profile(jumps, mu_axis, sigma_axis)

    grid = PosteriorGrid(mu_axis=mu_axis, sigma_axis=sigma_axis, log_post=log_post)
    if grid.boundary_hit():
        i, j = grid.argmax_cell()
        warnings.warn(
            f"posterior argmax on grid boundary at mu={mu_axis[i]:.3g}, "
            f"sigma={sigma_axis[j]:.3g}; estimates may be truncated",
            GridBoundaryWarning,
            stacklevel=2,
        )
    return grid


# ---------------------------------------------------------------------
# point estimates
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class FitDiagnostics:
    boundary_hit: bool
    effective_support: float


@dataclass(frozen=True)
class FitResult:
    """Posterior means and standard deviations of (mu, sigma)."""

    mu_hat: float
    sigma_hat: float
    sd_mu: float
    sd_sigma: float
    diagnostics: FitDiagnostics

    def params(self) -> LevyParams:
        return LevyParams(mu=self.mu_hat, sigma=self.sigma_hat)

    def lambda_stats(self) -> LambdaRange:
        return lambda_range(self.params())

    def to_dict(self, source: str | None = None, k: int | None = None) -> dict:
        rng = self.lambda_stats()
        out: dict = {}
        if source is not None:
            out["source"] = source
        if k is not None:
            out["k"] = k
        out.update(
            mu_hat=self.mu_hat,
            sigma_hat=self.sigma_hat,
            sd_mu=self.sd_mu,
            sd_sigma=self.sd_sigma,
            lambda_median=rng.median,
            lambda_q15=rng.q15,
            lambda_q85=rng.q85,
            diagnostics={
                "boundary_hit": self.diagnostics.boundary_hit,
                "effective_support": self.diagnostics.effective_support,
            },
        )
        return out


def fit(grid: PosteriorGrid) -> FitResult:
    """Posterior means and sds by weighted sums over the grid cells."""
    w_mu = grid.weights.sum(axis=1)
    w_sigma = grid.weights.sum(axis=0)
    mu_hat = float(np.dot(w_mu, grid.mu_axis))
    sigma_hat = float(np.dot(w_sigma, grid.sigma_axis))
    sd_mu = float(np.sqrt(np.dot(w_mu, (grid.mu_axis - mu_hat) ** 2)))
    sd_sigma = float(np.sqrt(np.dot(w_sigma, (grid.sigma_axis - sigma_hat) ** 2)))
    ess = float(1.0 / np.sum(grid.weights**2))
    return FitResult(
        mu_hat=mu_hat,
        sigma_hat=sigma_hat,
        sd_mu=sd_mu,
        sd_sigma=sd_sigma,
        diagnostics=FitDiagnostics(boundary_hit=grid.boundary_hit(), effective_support=ess),
    )
