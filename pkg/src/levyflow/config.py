"""Run configuration: a structured YAML/JSON file plus CLI flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .corpus import DEFAULT_K_SWEEP, DEFAULT_N_TOP_WORDS, CleanOptions
from .errors import ConfigError
from .flow import PipelineSettings
from .inference import GridSpec
from .levy import LambdaGridSpec

SOURCE_TYPES = ("text", "thread-json")


@dataclass(frozen=True)
class SourceSpec:
    id: str
    path: str
    type: str = "text"

    def __post_init__(self):
        if self.type not in SOURCE_TYPES:
            raise ConfigError(f"source {self.id!r}: unknown type {self.type!r}")


@dataclass
class RunConfig:
    sources: list[SourceSpec] = field(default_factory=list)
    seed: int | None = None
    output_dir: str = "out"
    jobs: int = 1
    strip_accents: bool = True
    metadata_patterns: tuple[str, ...] = ()
    n_top_words: int = DEFAULT_N_TOP_WORDS
    k_list: tuple[int, ...] = DEFAULT_K_SWEEP
    n_topics: int = 25
    lda_iters: int = 1000
    alpha0: float = 0.1
    beta0: float = 0.01
    likelihood: str = "conditional"
    grid_spec: GridSpec = GridSpec()
    lambda_spec: LambdaGridSpec = LambdaGridSpec()
    simulate: dict = field(default_factory=dict)

    def clean_options(self) -> CleanOptions:
        return CleanOptions(
            strip_accents=self.strip_accents,
            metadata_patterns=tuple(self.metadata_patterns),
        )

    def pipeline_settings(self) -> PipelineSettings:
        return PipelineSettings(
            n_topics=self.n_topics,
            lda_iters=self.lda_iters,
            alpha0=self.alpha0,
            beta0=self.beta0,
            grid_spec=self.grid_spec,
            lambda_spec=self.lambda_spec,
            likelihood=self.likelihood,
        )

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required (set `seed:` in the config or pass --seed)")
        return int(self.seed)

    def validate_paths(self) -> None:
        for src in self.sources:
            if not Path(src.path).is_file():
                raise ConfigError(f"source {src.id!r}: file not found: {src.path}")

    def provenance(self) -> dict:
        """Flat, JSON-ready view of every setting that affects results."""
        return {
            "seed": self.seed,
            "clean": {
                "strip_accents": self.strip_accents,
                "metadata_patterns": list(self.metadata_patterns),
                "n_top_words": self.n_top_words,
            },
            "chunk": {"k_list": list(self.k_list)},
            "topics": {
                "n_topics": self.n_topics,
                "iters": self.lda_iters,
                "alpha0": self.alpha0,
                "beta0": self.beta0,
            },
            "inference": {
                "likelihood": self.likelihood,
                "mu_min": self.grid_spec.mu_min,
                "mu_max": self.grid_spec.mu_max,
                "mu_points": self.grid_spec.mu_points,
                "sigma_min": self.grid_spec.sigma_min,
                "sigma_max": self.grid_spec.sigma_max,
                "sigma_points": self.grid_spec.sigma_points,
            },
            "lambda_grid": {
                "n_cells": self.lambda_spec.n_cells,
                "lambda_min": self.lambda_spec.lambda_min,
                "lambda_max": self.lambda_spec.lambda_max,
                "sims_per_cell": self.lambda_spec.sims_per_cell,
                "conditional_sims": self.lambda_spec.conditional_sims,
            },
        }


def _expect_mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section {where!r} must be a mapping")
    return value


def load_config(path) -> RunConfig:
    """Parse a YAML (or JSON) config file into a validated RunConfig."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return config_from_dict(_expect_mapping(doc, "top level"))


def config_from_dict(doc: dict) -> RunConfig:
    clean = _expect_mapping(doc.get("clean"), "clean")
    chunk = _expect_mapping(doc.get("chunk"), "chunk")
    topics = _expect_mapping(doc.get("topics"), "topics")
    inference = _expect_mapping(doc.get("inference"), "inference")
    lambda_grid = _expect_mapping(doc.get("lambda_grid"), "lambda_grid")
    simulate = _expect_mapping(doc.get("simulate"), "simulate")

    sources = []
    for i, entry in enumerate(doc.get("sources") or []):
        entry = _expect_mapping(entry, f"sources[{i}]")
        try:
            sources.append(
                SourceSpec(
                    id=str(entry["id"]),
                    path=str(entry["path"]),
                    type=str(entry.get("type", "text")),
                )
            )
        except KeyError as exc:
            raise ConfigError(f"sources[{i}] is missing required key {exc}") from exc

    try:
        grid_spec = GridSpec(
            mu_min=float(inference.get("mu_min", -5.0)),
            mu_max=float(inference.get("mu_max", 4.0)),
            mu_points=int(inference.get("mu_points", 61)),
            sigma_min=float(inference.get("sigma_min", 0.05)),
            sigma_max=float(inference.get("sigma_max", 3.0)),
            sigma_points=int(inference.get("sigma_points", 60)),
        )
        lambda_spec = LambdaGridSpec(
            n_cells=int(lambda_grid.get("n_cells", 96)),
            lambda_min=float(lambda_grid.get("lambda_min", 1e-4)),
            lambda_max=float(lambda_grid.get("lambda_max", 1e4)),
            sims_per_cell=int(lambda_grid.get("sims_per_cell", 20_000)),
            conditional_sims=int(lambda_grid.get("conditional_sims", 500)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    likelihood = str(inference.get("likelihood", "conditional"))
    if likelihood not in ("conditional", "stationary"):
        raise ConfigError(f"inference.likelihood must be conditional or stationary, got {likelihood!r}")

    k_list = tuple(int(k) for k in chunk.get("k_list", DEFAULT_K_SWEEP))
    if any(k < 1 for k in k_list) or not k_list:
        raise ConfigError("chunk.k_list must be a nonempty list of positive integers")

    return RunConfig(
        sources=sources,
        seed=None if doc.get("seed") is None else int(doc["seed"]),
        output_dir=str(doc.get("output_dir", "out")),
        jobs=int(doc.get("jobs", 1)),
        strip_accents=bool(clean.get("strip_accents", True)),
        metadata_patterns=tuple(str(p) for p in clean.get("metadata_patterns") or ()),
        n_top_words=int(clean.get("n_top_words", DEFAULT_N_TOP_WORDS)),
        k_list=k_list,
        n_topics=int(topics.get("n_topics", 25)),
        lda_iters=int(topics.get("iters", 1000)),
        alpha0=float(topics.get("alpha0", 0.1)),
        beta0=float(topics.get("beta0", 0.01)),
        likelihood=likelihood,
        grid_spec=grid_spec,
        lambda_spec=lambda_spec,
        simulate=simulate,
    )
