"""Optional static SVG renderings of flow curves and limit regions."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "levyflow"

import matplotlib.pyplot as plt  # noqa: E402

from .flow import REFERENCE_CENTROIDS, GaussianRegion


def render_flow_svg(curves: list[dict], path, region: GaussianRegion | None = None) -> None:
    """Plot each source's (mu, sigma) path across chunk sizes.

    ``curves`` are flow-curve dicts as serialized by FlowCurve.to_dict().
    Reference centroids are overlaid for orientation; the endpoint region's
    2-sigma contour is drawn when given.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for curve in curves:
        pts = curve["points"]
        mus = [p["mu_hat"] for p in pts]
        sigmas = [p["sigma_hat"] for p in pts]
        ax.plot(mus, sigmas, marker="o", markersize=3, linewidth=1, label=curve["source"])
        if pts:
            ax.annotate(f"k={pts[0]['k']}", (mus[0], sigmas[0]), fontsize=7)
            ax.annotate(f"k={pts[-1]['k']}", (mus[-1], sigmas[-1]), fontsize=7)
    for name, (mu, sigma) in sorted(REFERENCE_CENTROIDS.items()):
        ax.plot([mu], [sigma], marker="*", markersize=10, linestyle="none",
                label=f"{name} reference")
    if region is not None and not region.degenerate:
        contour = region.ellipse_polyline(n_sigma=2.0)
        ax.plot(contour[:, 0], contour[:, 1], linestyle="--", color="black",
                linewidth=1, label="endpoint 2-sigma")
    ax.set_xlabel("mu (mean log focus weight)")
    ax.set_ylabel("sigma (sd of log focus weight)")
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    # Date metadata is suppressed so reruns stay byte-identical.
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
