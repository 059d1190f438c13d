"""Command-line pipeline: fit, flow, simulate, trees, report.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 a numerical
warning occurred and --strict was set.
"""

from __future__ import annotations

import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import artifacts
from .config import RunConfig, SourceSpec, load_config
from .corpus import TokenStream, clean_text, drop_top_words, linearize_tree, parse_thread
from .errors import ConfigError, DataError, NumericalWarning, TooShort
from .flow import (
    REFERENCE_CENTROIDS,
    FlowCurve,
    PipelineSettings,
    fit_at_scale,
    limit_region,
    mahalanobis_contains,
    shuffle_null,
)
from .inference import fit, posterior_grid
from .levy import density_grid, simulate_trajectory
from .simplex import AlphaVector, LevyParams, child_seed_sequence, make_rng
from .trees import average_depth, depth_distribution, nesting_fraction, ols_regression


def _config_option(f):
    return click.option(
        "--config", "config_path", type=click.Path(), default=None,
        help="YAML/JSON run configuration.",
    )(f)


def _common_options(f):
    for opt in (
        click.option("--seed", type=int, default=None, help="Master seed (overrides config)."),
        click.option("--output-dir", default=None, help="Artifact directory (overrides config)."),
        click.option("--jobs", type=int, default=None, help="Parallel (source, k) workers."),
        click.option("--strict", is_flag=True, help="Exit 4 on numerical warnings."),
    ):
        f = opt(f)
    return _config_option(f)


def _load_cfg(config_path, seed, output_dir, jobs) -> RunConfig:
    cfg = load_config(config_path) if config_path else RunConfig()
    if seed is not None:
        cfg.seed = seed
    if output_dir is not None:
        cfg.output_dir = output_dir
    if jobs is not None:
        cfg.jobs = jobs
    return cfg


def _execute(body, strict: bool) -> None:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            body()
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(3)
        finally:
            for w in caught:
                click.echo(f"warning: {w.message}", err=True)
    if strict and any(issubclass(w.category, NumericalWarning) for w in caught):
        click.echo("strict mode: numerical warnings escalated", err=True)
        sys.exit(4)


def _prepare_stream(src: SourceSpec, cfg: RunConfig) -> TokenStream:
    data = Path(src.path).read_bytes()
    if src.type == "text":
        stream = clean_text(data.decode("utf-8"), cfg.clean_options(), source_id=src.id)
    else:
        stream = linearize_tree(parse_thread(data), cfg.clean_options(), source_id=src.id)
    return drop_top_words(stream, cfg.n_top_words)


# ---------------------------------------------------------------------
# (source, k) task runner with caching and worker-safe warnings
# ---------------------------------------------------------------------

def _fit_task(args):
    stream, k, settings, master_seed, output_dir = args
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            lda_seed = int(
                child_seed_sequence(master_seed, stream.source_id, k, "lda").generate_state(1)[0]
            )
            key = artifacts.trajectory_cache_key(stream, k, settings, lda_seed)
            cached = artifacts.load_cached_trajectory(output_dir, key)
            scale_fit = fit_at_scale(stream, k, settings, master_seed, trajectory=cached)
            if cached is None:
                artifacts.store_cached_trajectory(output_dir, key, scale_fit.trajectory)
            status, payload = "ok", (scale_fit, key)
        except TooShort as exc:
            status, payload = "skip", str(exc)
    notes = [(w.category.__name__, str(w.message)) for w in caught]
    return status, payload, notes


_WARNING_CATEGORIES = {
    cls.__name__: cls for cls in NumericalWarning.__subclasses__()
} | {"NumericalWarning": NumericalWarning, "UserWarning": UserWarning}


def _replay_notes(notes) -> None:
    for name, message in notes:
        warnings.warn(message, _WARNING_CATEGORIES.get(name, UserWarning), stacklevel=2)


def _run_fit_tasks(cfg: RunConfig, streams: dict[str, TokenStream]) -> dict:
    master = cfg.require_seed()
    settings = cfg.pipeline_settings()
    task_args = [
        (streams[sid], k, settings, master, cfg.output_dir)
        for sid in sorted(streams)
        for k in cfg.k_list
    ]
    keys = [(a[0].source_id, a[1]) for a in task_args]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            raw = list(pool.map(_fit_task, task_args))
    else:
        raw = [_fit_task(a) for a in task_args]

    results: dict = {}
    for (sid, k), (status, payload, notes) in zip(keys, raw):
        _replay_notes(notes)
        if status == "skip":
            warnings.warn(f"source {sid!r}: skipping k={k} ({payload})", UserWarning, stacklevel=2)
        else:
            results[(sid, k)] = payload
    return results


def _write_scale_artifacts(cfg: RunConfig, sid: str, k: int, scale_fit, cache_key: str) -> None:
    base = Path(cfg.output_dir) / sid / f"k{k}"
    header = [
        f"source={sid}",
        f"k={k}",
        f"seed={cfg.require_seed()}",
        f"cache_key={cache_key}",
    ]
    csv_text = "".join(f"# {line}\n" for line in header) + scale_fit.trajectory.to_csv()
    artifacts.write_text(base / "trajectory.csv", csv_text)
    fit_doc = scale_fit.result.to_dict(source=sid, k=k)
    fit_doc["alpha_converged"] = scale_fit.alpha.converged
    fit_doc["provenance"] = cfg.provenance()
    artifacts.write_json(base / "fit.json", fit_doc)
    stats = scale_fit.result.lambda_stats()
    artifacts.write_json(
        base / "lambda_range.json",
        {
            "source": sid,
            "k": k,
            "lambda_median": stats.median,
            "lambda_q15": stats.q15,
            "lambda_q85": stats.q85,
        },
    )


# ---------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------

@click.group()
def main():
    """Analyze discussion dynamics as correlated random walks over topics."""


@main.command("fit")
@_common_options
def fit_cmd(config_path, seed, output_dir, jobs, strict):
    """Fit (mu, sigma) for every configured source and chunk size."""

    def body():
        cfg = _load_cfg(config_path, seed, output_dir, jobs)
        cfg.require_seed()
        cfg.validate_paths()
        if not cfg.sources:
            raise ConfigError("no sources configured")
        streams = {src.id: _prepare_stream(src, cfg) for src in cfg.sources}
        results = _run_fit_tasks(cfg, streams)
        for (sid, k) in sorted(results):
            scale_fit, key = results[(sid, k)]
            _write_scale_artifacts(cfg, sid, k, scale_fit, key)
        click.echo(f"wrote {len(results)} fit(s) under {cfg.output_dir}")

    _execute(body, strict)


@main.command("flow")
@_common_options
@click.option("--null", "with_null", is_flag=True, help="Also fit order-shuffled companions.")
def flow_cmd(config_path, seed, output_dir, jobs, strict, with_null):
    """Chart how fits move across chunk sizes, plus the endpoint region."""

    def body():
        cfg = _load_cfg(config_path, seed, output_dir, jobs)
        master = cfg.require_seed()
        cfg.validate_paths()
        if not cfg.sources:
            raise ConfigError("no sources configured")
        streams = {src.id: _prepare_stream(src, cfg) for src in cfg.sources}
        results = _run_fit_tasks(cfg, streams)

        curves: dict[str, FlowCurve] = {}
        for sid in sorted(streams):
            fits = [results[(sid, k)][0] for k in cfg.k_list if (sid, k) in results]
            curve = FlowCurve(source_id=sid, points=sorted(fits, key=lambda s: s.k))
            curves[sid] = curve
            for scale_fit in curve.points:
                _write_scale_artifacts(cfg, sid, scale_fit.k, scale_fit,
                                       results[(sid, scale_fit.k)][1])
            artifacts.write_text(Path(cfg.output_dir) / sid / "flow.csv", curve.to_csv())
            artifacts.write_json(Path(cfg.output_dir) / sid / "flow.json", curve.to_dict())

        if with_null:
            settings = cfg.pipeline_settings()
            for sid, curve in sorted(curves.items()):
                rows = ["k,mu_hat,sd_mu,sigma_hat,sd_sigma"]
                for scale_fit in curve.points:
                    null_seed = int(child_seed_sequence(
                        master, sid, scale_fit.k, "null").generate_state(1)[0])
                    shuffled = shuffle_null(scale_fit.trajectory, seed=null_seed)
                    grid = posterior_grid(
                        shuffled, scale_fit.alpha,
                        grid_spec=settings.grid_spec, lambda_spec=settings.lambda_spec,
                        seed=null_seed, likelihood=settings.likelihood,
                    )
                    res = fit(grid)
                    rows.append(f"{scale_fit.k},{res.mu_hat!r},{res.sd_mu!r},"
                                f"{res.sigma_hat!r},{res.sd_sigma!r}")
                artifacts.write_text(
                    Path(cfg.output_dir) / sid / "flow_null.csv", "\n".join(rows) + "\n"
                )

        overlay = {
            "reference_centroids": {k: list(v) for k, v in REFERENCE_CENTROIDS.items()},
            "curves": [curves[sid].to_dict() for sid in sorted(curves)],
        }
        endpoints = [
            (c.endpoint().result.mu_hat, c.endpoint().result.sigma_hat)
            for c in curves.values() if c.points
        ]
        if len(endpoints) >= 3:
            region = limit_region(endpoints)
            overlay["endpoint_region"] = region.to_dict()
            overlay["endpoint_region"]["contour_2sigma"] = (
                region.ellipse_polyline(2.0).tolist() if not region.degenerate else None
            )
        artifacts.write_json(Path(cfg.output_dir) / "flow_overlay.json", overlay)
        click.echo(f"wrote {len(curves)} flow curve(s) under {cfg.output_dir}")

    _execute(body, strict)


@main.command("simulate")
@_common_options
@click.option("--recovery", is_flag=True, help="Run the parameter-recovery study.")
def simulate_cmd(config_path, seed, output_dir, jobs, strict, recovery):
    """Generate a demo trajectory, step-kernel density fields, and
    optionally a parameter-recovery report."""

    def body():
        cfg = _load_cfg(config_path, seed, output_dir, jobs)
        master = cfg.require_seed()
        sim = cfg.simulate
        out = Path(cfg.output_dir) / "simulate"

        alpha_cfg = sim.get("alpha", 0.2)
        n_topics = int(sim.get("n_topics", 3))
        if isinstance(alpha_cfg, (list, tuple)):
            alpha = AlphaVector(np.asarray(alpha_cfg, dtype=np.float64))
        else:
            alpha = AlphaVector(np.full(n_topics, float(alpha_cfg)))
        params = LevyParams(float(sim.get("mu", 1.0)), float(sim.get("sigma", 1.0)))
        n_steps = int(sim.get("n_steps", 25))

        rng = make_rng(child_seed_sequence(master, "simulate-trajectory"))
        traj = simulate_trajectory(alpha, params, n_steps, rng)
        artifacts.write_text(out / "trajectory.csv", traj.to_csv())

        if alpha.n_topics == 3:
            prev = np.asarray(sim.get("prev_point", [0.38, 1e-5, 0.62]), dtype=np.float64)
            resolution = int(sim.get("resolution", 128))
            for lam in sim.get("lambdas", [0.0, 10.0]):
                grid = density_grid(alpha, float(lam), prev, resolution)
                header = [
                    f"alpha={alpha.alpha.tolist()}",
                    f"lambda={float(lam)!r}",
                    f"prev_point={prev.tolist()}",
                    f"resolution={resolution}",
                ]
                artifacts.write_text(
                    out / f"density_lambda_{lam}.csv", grid.to_csv(header_lines=header)
                )

        if recovery:
            report = {"cases": []}
            for (mu_star, sigma_star, tol) in [(2.0, 0.8, 0.2), (0.0, 1.5, 0.3)]:
                rec_alpha = AlphaVector(np.full(20, 0.1))
                rec_rng = make_rng(child_seed_sequence(master, "recovery", mu_star, sigma_star))
                rec_traj = simulate_trajectory(
                    rec_alpha, LevyParams(mu_star, sigma_star), 500, rec_rng
                )
                rec_seed = int(child_seed_sequence(
                    master, "recovery-post", mu_star, sigma_star).generate_state(1)[0])
                grid = posterior_grid(
                    rec_traj, rec_alpha,
                    grid_spec=cfg.grid_spec, lambda_spec=cfg.lambda_spec,
                    seed=rec_seed, likelihood="conditional",
                )
                res = fit(grid)
                report["cases"].append({
                    "mu_true": mu_star, "sigma_true": sigma_star, "tolerance": tol,
                    "mu_hat": res.mu_hat, "sigma_hat": res.sigma_hat,
                    "sd_mu": res.sd_mu, "sd_sigma": res.sd_sigma,
                    "pass": bool(abs(res.mu_hat - mu_star) <= tol
                                 and abs(res.sigma_hat - sigma_star) <= tol),
                })
            artifacts.write_json(out / "recovery.json", report)

        click.echo(f"wrote simulation artifacts under {out}")

    _execute(body, strict)


@main.command("trees")
@_config_option
@click.option("--output-dir", default=None)
@click.option("--strict", is_flag=True)
def trees_cmd(config_path, output_dir, strict):
    """Depth statistics for threaded sources, plus the depth-vs-focus
    regression when fits are available."""

    def body():
        cfg = _load_cfg(config_path, None, output_dir, None)
        cfg.validate_paths()
        thread_sources = [s for s in cfg.sources if s.type == "thread-json"]
        if not thread_sources:
            raise ConfigError("no thread-json sources configured")

        stats = {}
        for src in thread_sources:
            tree = parse_thread(Path(src.path).read_bytes())
            hist = depth_distribution(tree)
            base = Path(cfg.output_dir) / src.id
            artifacts.write_text(base / "depth_histogram.csv", hist.to_csv())
            doc = {
                "source": src.id,
                "n_comments": hist.n_comments,
                "average_depth": average_depth(hist),
                "nesting_fraction": nesting_fraction(hist, min_depth=2),
                "max_depth": max(hist.counts) if hist.counts else 0,
            }
            artifacts.write_json(base / "tree_stats.json", doc)
            stats[src.id] = doc

        k_max = max(cfg.k_list)
        xs, ys, used = [], [], []
        for src in thread_sources:
            fit_path = Path(cfg.output_dir) / src.id / f"k{k_max}" / "fit.json"
            if fit_path.is_file():
                import json as _json

                mu_hat = _json.loads(fit_path.read_text())["mu_hat"]
                xs.append(stats[src.id]["average_depth"])
                ys.append(mu_hat)
                used.append(src.id)
        regression_doc: dict = {"k": k_max, "sources": used}
        if len(xs) >= 3:
            try:
                reg = ols_regression(xs, ys)
                regression_doc.update(
                    slope=reg.slope, intercept=reg.intercept, r_squared=reg.r_squared,
                    points=[{"source": s, "average_depth": x, "mu_hat": y}
                            for s, x, y in zip(used, xs, ys)],
                )
            except DataError as exc:
                regression_doc["error"] = str(exc)
        else:
            regression_doc["note"] = (
                "need fits for at least 3 threaded sources at the largest chunk size; "
                "run `levyflow fit` first"
            )
        artifacts.write_json(Path(cfg.output_dir) / "trees_regression.json", regression_doc)
        click.echo(f"wrote tree statistics for {len(thread_sources)} source(s)")

    _execute(body, strict)


@main.command("report")
@_config_option
@click.option("--output-dir", default=None)
@click.option("--svg", "with_svg", is_flag=True, help="Also render an SVG overview.")
@click.option("--strict", is_flag=True)
def report_cmd(config_path, output_dir, with_svg, strict):
    """Aggregate flow curves into a single report with the endpoint region."""

    def body():
        cfg = _load_cfg(config_path, None, output_dir, None)
        out = Path(cfg.output_dir)
        import json as _json

        curve_docs = [
            _json.loads(p.read_text()) for p in sorted(out.glob("*/flow.json"))
        ]
        if not curve_docs:
            raise DataError(f"no flow.json artifacts under {out}; run `levyflow flow` first")

        report = {
            "reference_centroids": {k: list(v) for k, v in REFERENCE_CENTROIDS.items()},
            "curves": curve_docs,
        }
        region = None
        endpoints = [
            (c["points"][-1]["mu_hat"], c["points"][-1]["sigma_hat"])
            for c in curve_docs if c["points"]
        ]
        if len(endpoints) >= 3:
            region = limit_region(endpoints)
            report["endpoint_region"] = region.to_dict()
            if not region.degenerate:
                report["endpoint_region"]["contained_2sigma"] = {
                    c["source"]: mahalanobis_contains(
                        region,
                        (c["points"][-1]["mu_hat"], c["points"][-1]["sigma_hat"]),
                        2.0,
                    )
                    for c in curve_docs if c["points"]
                }
        artifacts.write_json(out / "report.json", report)
        if with_svg:
            from .render import render_flow_svg

            render_flow_svg(curve_docs, out / "report.svg", region=region)
        click.echo(f"wrote report for {len(curve_docs)} curve(s) under {out}")

    _execute(body, strict)


if __name__ == "__main__":
    main()
