"""Deterministic artifact writing and the trajectory cache.

All writers are rerun-stable: fixed key order, repr float formatting, no
timestamps, so identical configs and seeds reproduce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .corpus import TokenStream
from .flow import PipelineSettings
from .levy import Trajectory


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def trajectory_cache_key(
    stream: TokenStream, k: int, settings: PipelineSettings, lda_seed: int
) -> str:
    """Content hash of everything the trajectory depends on."""
    h = hashlib.sha256()
    h.update(f"k={k};n={settings.n_topics};it={settings.lda_iters};"
             f"a={settings.alpha0!r};b={settings.beta0!r};seed={lda_seed}".encode())
    for tok in stream.tokens:
        h.update(b"\x1f")
        h.update(tok.encode("utf-8"))
    return h.hexdigest()


def cache_path(output_dir, key: str) -> Path:
    return Path(output_dir) / "cache" / f"{key}.npy"


def load_cached_trajectory(output_dir, key: str) -> Trajectory | None:
    path = cache_path(output_dir, key)
    if not path.is_file():
        return None
    return Trajectory.from_points(np.load(path))


def store_cached_trajectory(output_dir, key: str, trajectory: Trajectory) -> None:
    path = cache_path(output_dir, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, trajectory.points)
