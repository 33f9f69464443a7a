"""
Run configuration for the genealogy pipeline.

A run manifest is a flat ``key=value`` file read with ``dotenv_values``.
Values resolve in this order: command flag, the ``VACOAL_SEED``
environment variable (seed only), manifest entry, ``settings.VACOAL``.

Classes:
    RunConfig: Validated parameters of one pipeline run

Usage:
    config = RunConfig.resolve(options)          # options from a command
    search = config.search_config()
"""

import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from django.conf import settings
from dotenv import dotenv_values

from vacoal.exceptions import ConfigError
from vacoal.search import SearchConfig

logger = logging.getLogger(__name__)


def _parse_sweep(text: str) -> List[Tuple[int, int]]:
    """``"64:28;128:27"`` -> [(64, 28), (128, 27)]"""
    pairs = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        blocks, _, depth = item.partition(":")
        try:
            pairs.append((int(blocks), int(depth)))
        except ValueError as e:
            raise ConfigError(f"Invalid sweep entry {item!r}; expected B:m") from e
    return pairs


def parse_concept(text: str) -> List[str]:
    return [token.strip() for token in text.split(",") if token.strip()]


@dataclass
class RunConfig:
    length: int = 12800
    blocks: int = 128
    depth_exp: int = 27
    seed: int = 0
    fs: int = 2000
    max_depth: int = 57
    cr2_halt: float = 0.1
    mode: str = "dont_care"
    prune_order: Optional[str] = None
    rr: float = 1.0
    threads: int = 1
    collision_policy: str = "flag"
    dense_cell_limit: int = 2 ** 24
    edges: Optional[str] = None
    predicates: Optional[str] = None
    starts: Optional[str] = None
    snapshot: Optional[str] = None
    out_dir: str = "runs"
    era_window: int = 50
    era_start: Optional[int] = None
    era_end: Optional[int] = None
    pivot_start: Optional[int] = None
    pivot_end: Optional[int] = None
    hub: Optional[str] = None
    up_gens: int = 10
    down_gens: int = 10
    top_k: int = 20
    concepts: Dict[str, List[str]] = field(default_factory=dict)
    sweep: List[Tuple[int, int]] = field(default_factory=list)

    @classmethod
    def _converters(cls):
        kinds = {}
        for f in fields(cls):
            if f.name in ("concepts", "sweep"):
                continue
            default = f.default
            if f.name in ("era_start", "era_end", "pivot_start", "pivot_end"):
                kinds[f.name] = int
            elif isinstance(default, bool):
                kinds[f.name] = bool
            elif isinstance(default, int):
                kinds[f.name] = int
            elif isinstance(default, float):
                kinds[f.name] = float
            else:
                kinds[f.name] = str
        return kinds

    @classmethod
    def _coerce(cls, key: str, value):
        kind = cls._converters()[key]
        try:
            return kind(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value {value!r} for {key}") from e

    @staticmethod
    def read_manifest(path) -> Dict[str, str]:
        if not Path(path).is_file():
            raise ConfigError(f"Run manifest {path} does not exist")
        return {k.strip().lower(): v for k, v in dotenv_values(path).items() if v is not None}

    @classmethod
    def from_manifest(cls, entries: Dict[str, str], base: Optional["RunConfig"] = None) -> "RunConfig":
        config = base or cls()
        known = cls._converters()
        updates = {}
        concepts = dict(config.concepts)
        for key, value in entries.items():
            if key.startswith("concept."):
                concepts[key.split(".", 1)[1]] = parse_concept(value)
            elif key == "sweep":
                updates["sweep"] = _parse_sweep(value)
            elif key in known:
                updates[key] = cls._coerce(key, value)
            else:
                logger.warning(f"Ignoring unknown manifest key {key!r}")
        return replace(config, concepts=concepts, **updates)

    @classmethod
    def defaults(cls) -> "RunConfig":
        known = cls._converters()
        values = {k: v for k, v in getattr(settings, "VACOAL", {}).items() if k in known}
        return cls(**values)

    @classmethod
    def resolve(cls, options: dict) -> "RunConfig":
        """
        Merge settings, manifest, environment and flags.

        Args:
            options: Parsed command options; None means "not given"
        """
        config = cls.defaults()
        manifest = options.get("config")
        if manifest:
            config = cls.from_manifest(cls.read_manifest(manifest), config)
        env_seed = os.environ.get("VACOAL_SEED")
        if env_seed not in (None, ""):
            config = replace(config, seed=cls._coerce("seed", env_seed))
        known = cls._converters()
        flags = {k: v for k, v in options.items() if k in known and v is not None}
        config = replace(config, **flags)
        for item in options.get("concept") or []:
            name, _, members = item.partition("=")
            if not name or not members:
                raise ConfigError(f"Invalid concept {item!r}; expected name=token,token")
            config.concepts[name.strip()] = parse_concept(members)
        if options.get("sweep"):
            config.sweep = _parse_sweep(options["sweep"])
        config.validate()
        return config

    def validate(self) -> "RunConfig":
        """
        Raises:
            ConfigError: On any inconsistent parameter
        """
        if self.length <= 0 or self.length % 8:
            raise ConfigError(f"Vector length must be a positive multiple of 8, got {self.length}")
        if self.blocks <= 0 or self.length % self.blocks:
            raise ConfigError(f"Vector length {self.length} is not a multiple of block count {self.blocks}")
        if not 1 <= self.depth_exp <= 32:
            raise ConfigError(f"Depth exponent must lie in [1, 32], got {self.depth_exp}")
        if not 0.0 <= self.rr <= 1.0:
            raise ConfigError(f"Rescue rate must lie in [0, 1], got {self.rr}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.collision_policy not in ("flag", "bucket"):
            raise ConfigError(f"Unknown collision policy {self.collision_policy!r}")
        if self.era_window <= 0:
            raise ConfigError("era_window must be positive")
        for blocks, depth in self.sweep:
            if blocks <= 0 or not 1 <= depth <= 32:
                raise ConfigError(f"Invalid sweep configuration B={blocks}, m={depth}")
        self.search_config()
        return self

    def search_config(self, **overrides) -> SearchConfig:
        values = dict(
            fs=self.fs,
            max_depth=self.max_depth,
            cr2_halt=self.cr2_halt,
            mode=self.mode,
            prune_order=self.prune_order,
        )
        values.update(overrides)
        return SearchConfig(**values)

    @property
    def segment_bits(self) -> int:
        return self.length // self.blocks

    def output_path(self, name: str) -> Path:
        path = Path(self.out_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path / name

    def require(self, *names: str):
        missing = [n for n in names if getattr(self, n) in (None, "")]
        if missing:
            raise ConfigError(f"Missing required setting(s): {', '.join(missing)}")
