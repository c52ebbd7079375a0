"""Experiment configuration and run manifests."""

from __future__ import annotations

import hashlib
import platform
import time
from dataclasses import asdict, dataclass, field
from importlib import metadata

from .errors import ParameterError
from .io import dumps, sha256_file, write_json
from .tiling import DEFAULT_TILE_BUDGET, GammaSequence, gamma_pqh


@dataclass
class ExperimentConfig:
    command: str
    d: int = 3
    gamma: tuple[int, ...] | None = None
    pqh: tuple[int, int, int] | None = None
    power: int = 1
    samples: int = 16
    seed: int = 0
    radii: tuple[int, ...] = ()
    gap: int = 2
    tol: float = 1e-9
    threads: int = 1
    budget: int = DEFAULT_TILE_BUDGET
    mesh_level: int = 1
    out: str = "out"

    def __post_init__(self):
        if self.d < 2:
            raise ParameterError("d must be at least 2")
        if (self.gamma is None) == (self.pqh is None):
            raise ParameterError("give exactly one of gamma or (p, q, h)")
        if self.power < 0:
            raise ParameterError("power must be non-negative")
        if self.samples < 1:
            raise ParameterError("samples must be positive")
        if any(r < 0 for r in self.radii):
            raise ParameterError("radii must be non-negative")
        if self.gap < 1:
            raise ParameterError("gap must be at least 1")
        if not 0 < self.tol < 1:
            raise ParameterError("tolerance must lie in (0, 1)")
        if self.threads < 1:
            raise ParameterError("threads must be positive")
        if self.budget < 1:
            raise ParameterError("budget must be positive")
        self.sequence()

    def sequence(self) -> GammaSequence:
        if self.gamma is not None:
            return GammaSequence(tuple(self.gamma))
        return gamma_pqh(self.d, *self.pqh)

    def identity(self) -> dict:
        """Fields that determine outputs; paths and thread counts do not."""
        data = asdict(self)
        data.pop("out")
        data.pop("threads")
        return data

    def digest(self) -> str:
        return hashlib.sha256(dumps(self.identity()).encode()).hexdigest()


def _version(name: str) -> str:
    try:
        return metadata.version(name)
    except metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    versions: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    @classmethod
    def start(cls, cfg: ExperimentConfig) -> "RunManifest":
        versions = {
            "python": platform.python_version(),
            "numpy": _version("numpy"),
            "scipy": _version("scipy"),
            "artifact": _version("artifact"),
        }
        return cls(asdict(cfg), cfg.digest(), versions)

    def timed(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        self.timings[name] = round(time.perf_counter() - t0, 6)
        return out

    def record(self, name: str, path) -> None:
        self.outputs[name] = sha256_file(path)

    def write(self, path) -> None:
        write_json(asdict(self), path)
