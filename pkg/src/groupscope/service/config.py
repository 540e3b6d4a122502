"""Pipeline configuration: one JSON file validated up front.

Every knob that a module exposes as a precondition (window parity, NMF
rank bounds, t-SNE perplexity, ...) is checked at load time so a bad
configuration aborts before any annotation work starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"  # "mock" | "remote-llm"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "GROUPSCOPE_API_KEY"
    temperature: float = 0.7
    timeout_s: float = 60.0
    max_attempts: int = 3
    backoff_s: float = 0.5


@dataclass(frozen=True)
class TsneConfig:
    perplexity_groups: float = 5.0
    perplexity_students: float = 5.0
    iterations: int = 1000
    learning_rate: float = 100.0


@dataclass(frozen=True)
class NmfConfig:
    max_iter: int = 1000
    tol: float = 1e-6


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    workers: int = 4
    instructor_id: str = "0000"
    scheme_path: str | None = None
    cache_dir: str = "cache"
    snapshot_dir: str = "snapshots"
    smoothing_window: int = 3
    merge_weighted: bool = True
    role_samples: int = 10
    score_runs: int = 10
    sg_window: int = 5
    sg_polyorder: int = 2
    ena_window: int = 4
    backend: BackendConfig = field(default_factory=BackendConfig)
    tsne: TsneConfig = field(default_factory=TsneConfig)
    nmf: NmfConfig = field(default_factory=NmfConfig)
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self) -> None:
        if self.backend.kind not in ("mock", "remote-llm"):
            raise ConfigError(f"backend.kind must be mock or remote-llm, got {self.backend.kind!r}")
        if self.backend.kind == "remote-llm" and not self.backend.endpoint:
            raise ConfigError("remote-llm backend requires an endpoint")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ConfigError(
                f"smoothing_window must be odd and >= 1, got {self.smoothing_window}"
            )
        if self.sg_window < 1 or self.sg_window % 2 == 0:
            raise ConfigError(f"sg_window must be odd and >= 1, got {self.sg_window}")
        if not 0 <= self.sg_polyorder < self.sg_window:
            raise ConfigError(
                f"sg_polyorder must satisfy 0 <= order < window, got {self.sg_polyorder}"
            )
        if self.role_samples < 1 or self.score_runs < 1:
            raise ConfigError("role_samples and score_runs must be >= 1")
        if self.ena_window < 2:
            raise ConfigError(f"ena_window must be >= 2, got {self.ena_window}")
        if self.nmf.max_iter < 1 or self.nmf.tol < 0:
            raise ConfigError("nmf.max_iter must be >= 1 and nmf.tol >= 0")
        if self.tsne.iterations < 1 or self.tsne.learning_rate <= 0:
            raise ConfigError("tsne.iterations must be >= 1 and learning_rate > 0")
        if self.tsne.perplexity_groups <= 0 or self.tsne.perplexity_students <= 0:
            raise ConfigError("t-SNE perplexities must be positive")

    def resolve(self, path: str | Path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def cache_path(self) -> Path:
        return self.resolve(self.cache_dir)

    @property
    def snapshot_path(self) -> Path:
        return self.resolve(self.snapshot_dir)


def load_config(path: str | Path) -> PipelineConfig:
    """Load a PipelineConfig from JSON; relative paths resolve against the file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return config_from_doc(doc, base_dir=path.resolve().parent)


def config_from_doc(doc: dict, base_dir: Path | None = None) -> PipelineConfig:
    known = {
        "seed", "workers", "instructor_id", "scheme_path", "cache_dir",
        "snapshot_dir", "smoothing_window", "merge_weighted", "role_samples",
        "score_runs", "sg_window", "sg_polyorder", "ena_window",
    }
    unknown = set(doc) - known - {"backend", "tsne", "nmf", "schema_version"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {k: doc[k] for k in known if k in doc}
    try:
        return PipelineConfig(
            backend=BackendConfig(**doc.get("backend", {})),
            tsne=TsneConfig(**doc.get("tsne", {})),
            nmf=NmfConfig(**doc.get("nmf", {})),
            base_dir=base_dir if base_dir is not None else Path.cwd(),
            **kwargs,
        )
    except TypeError as exc:
        raise ConfigError(f"invalid config: {exc}") from None
