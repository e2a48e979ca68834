"""Experiment definitions and key=value config loading.

Configuration sources (in order of precedence):
1. Command-line flags
2. Config file passed with --config (flat key=value, dotenv syntax)
3. Preset (--preset)
4. ExperimentSpec defaults

REOICA_SEED (environment or a local .env file) overrides the master seed
from any of the above.
"""

import itertools
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, get_args

from dotenv import dotenv_values, load_dotenv

from reservoir_ica.data.mixing import REGIMES
from reservoir_ica.data.signals import CHAOTIC_SOURCES, SUPER_GAUSSIAN_SOURCES
from reservoir_ica.errors import ConfigurationError
from reservoir_ica.online.pipeline import METHODS, RunConfig

SEED_ENV_VAR = "REOICA_SEED"

SOURCE_SETS = {
    "chaotic": CHAOTIC_SOURCES,
    "super_gaussian": SUPER_GAUSSIAN_SOURCES,
}

# Short sweep names used in CSV columns -> RunConfig fields
SWEEP_ALIASES = {"N": "N", "eps": "epsilon", "arch": "architecture"}

RUN_FIELDS = {f.name: f for f in fields(RunConfig)}
RUN_ONLY_FIELDS = {"method", "regime", "T", "seed"}

SPEC_KEYS = {
    "regimes",
    "methods",
    "seeds",
    "T",
    "sweep",
    "out",
    "jobs",
    "master_seed",
    "sources",
    "reference",
    "eval_window",
    "max_lag",
    "curve_window",
    "curve_stride",
    "overlay_length",
}
INT_SPEC_KEYS = {
    "T",
    "jobs",
    "master_seed",
    "eval_window",
    "max_lag",
    "curve_window",
    "curve_stride",
    "overlay_length",
}


@dataclass
class ExperimentSpec:
    """A grid of runs: regimes x methods x seeds x sweep points."""

    regimes: list[str] = field(default_factory=lambda: ["static", "time_varying", "nonlinear"])
    methods: list[str] = field(default_factory=lambda: ["reoica_base", "vanilla", "fastica"])
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    T: int = 15_000
    sources: str = "chaotic"
    sweep: dict[str, list[Any]] = field(default_factory=dict)
    output_dir: Path = Path("results")
    master_seed: int = 0
    jobs: int = 1
    reference: str = "vanilla"

    # Scoring
    eval_window: int = 5000
    max_lag: int = 200
    curve_window: int = 2000
    curve_stride: int = 100
    overlay_length: int = 600

    # RunConfig fields applied to every run (e.g. gamma, snr_db)
    overrides: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if not self.regimes:
            raise ConfigurationError("At least one regime is required")
        if not self.methods:
            raise ConfigurationError("At least one method is required")
        if not self.seeds:
            raise ConfigurationError("At least one seed is required")

        unknown = [r for r in self.regimes if r not in REGIMES]
        if unknown:
            raise ConfigurationError(f"Unknown regimes {unknown}. Expected {REGIMES}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigurationError(f"Unknown methods {unknown}. Expected {METHODS}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError(f"Duplicate seeds in {self.seeds}")
        if min(self.seeds) < 0 or self.master_seed < 0:
            raise ConfigurationError(
                f"Seeds must be non-negative, got {self.seeds} with master seed {self.master_seed}"
            )
        if self.sources not in SOURCE_SETS:
            raise ConfigurationError(
                f"Unknown source set '{self.sources}'. Expected {sorted(SOURCE_SETS)}"
            )
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1, got {self.jobs}")
        if self.reference not in METHODS:
            raise ConfigurationError(f"Unknown reference method '{self.reference}'")
        for name in ("eval_window", "curve_window", "overlay_length"):
            if getattr(self, name) > self.T:
                raise ConfigurationError(f"{name}={getattr(self, name)} exceeds T={self.T}")
        if self.eval_window <= 2 * self.max_lag + 2:
            raise ConfigurationError(
                f"eval_window={self.eval_window} too short for max_lag={self.max_lag}"
            )

        for key, values in self.sweep.items():
            _sweep_field(key)
            if not values:
                raise ConfigurationError(f"Sweep key '{key}' has no values")
        for key in self.overrides:
            if key not in RUN_FIELDS or key in RUN_ONLY_FIELDS:
                raise ConfigurationError(f"'{key}' is not an overridable run parameter")

    @property
    def source_kinds(self) -> list[str]:
        return list(SOURCE_SETS[self.sources])

    def sweep_points(self) -> list[dict[str, Any]]:
        """Cartesian product of sweep values, keyed by RunConfig field name."""
        if not self.sweep:
            return [{}]
        names = [_sweep_field(key) for key in self.sweep]
        grid = itertools.product(*self.sweep.values())
        return [dict(zip(names, combo, strict=True)) for combo in grid]

    def run_config(self, regime: str, method: str, seed: int, point: dict[str, Any]) -> RunConfig:
        """RunConfig for one grid cell; sweep values override spec-wide overrides."""
        return RunConfig(
            method=method,
            regime=regime,
            T=self.T,
            seed=seed,
            **{**self.overrides, **point},
        )


def _sweep_field(key: str) -> str:
    name = SWEEP_ALIASES.get(key, key)
    if name not in RUN_FIELDS or name in RUN_ONLY_FIELDS:
        raise ConfigurationError(
            f"Unrecognized sweep key '{key}'. Use {sorted(SWEEP_ALIASES)} or a run parameter"
        )
    return name


def split_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _coerce(name: str, raw: str) -> Any:
    """Convert a text value to the type of RunConfig's default for `name`."""
    raw = raw.strip()
    default = RUN_FIELDS[name].default
    if raw.lower() == "none" and type(None) in get_args(RUN_FIELDS[name].type):
        return None
    try:
        if isinstance(default, bool):
            if raw.lower() not in {"true", "false", "1", "0", "yes", "no"}:
                raise ValueError(raw)
            return raw.lower() in {"true", "1", "yes"}
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, str):
            return raw
        try:
            return float(raw)
        except ValueError:
            return raw
    except ValueError as exc:
        raise ConfigurationError(f"Invalid value '{raw}' for {name}") from exc


def parse_seeds(raw: str) -> list[int]:
    """Parse '0,1,2' or a range '0-9' (inclusive). Seeds are non-negative."""
    seeds: list[int] = []
    try:
        for item in split_list(raw):
            if item.startswith("-"):
                raise ValueError(f"negative seed {item}")
            if "-" in item:
                start, end = (int(v) for v in item.split("-", 1))
                if end < start:
                    raise ValueError(f"empty range {item}")
                seeds.extend(range(start, end + 1))
            else:
                seeds.append(int(item))
    except ValueError as exc:
        raise ConfigurationError(f"Invalid seed list '{raw}': {exc}") from exc
    return seeds


def parse_sweep(raw: str) -> dict[str, list[Any]]:
    """
    Parse a sweep grid.

    Grammar: key=v1|v2|...;key=...  e.g. "N=100|250|500;eps=0.1|0.3|0.8".
    """
    sweep: dict[str, list[Any]] = {}
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigurationError(f"Sweep entry '{part}' is not key=values")
        key, values = (s.strip() for s in part.split("=", 1))
        name = _sweep_field(key)
        sweep[key] = [_coerce(name, v) for v in values.split("|") if v.strip()]
    return sweep


def spec_values_from_mapping(values: dict[str, str | None]) -> dict[str, Any]:
    """
    Turn raw key=value strings into ExperimentSpec keyword arguments.

    Keys outside SPEC_KEYS that name run parameters become overrides.

    Raises:
        ConfigurationError: On unknown keys or malformed values
    """
    kwargs: dict[str, Any] = {}
    overrides: dict[str, Any] = {}
    for key, raw in values.items():
        if raw is None:
            raise ConfigurationError(f"Config key '{key}' has no value")
        if key in SPEC_KEYS:
            try:
                if key in {"regimes", "methods"}:
                    kwargs[key] = split_list(raw)
                elif key == "seeds":
                    kwargs[key] = parse_seeds(raw)
                elif key in INT_SPEC_KEYS:
                    kwargs[key] = int(raw)
                elif key == "sweep":
                    kwargs[key] = parse_sweep(raw)
                elif key == "out":
                    kwargs["output_dir"] = Path(raw)
                else:
                    kwargs[key] = raw.strip()
            except ValueError as exc:
                raise ConfigurationError(f"Invalid value '{raw}' for {key}") from exc
        elif key in RUN_FIELDS and key not in RUN_ONLY_FIELDS:
            overrides[key] = _coerce(key, raw)
        else:
            raise ConfigurationError(f"Unknown config key '{key}'")
    if overrides:
        kwargs["overrides"] = overrides
    return kwargs


def load_config(path: str | Path) -> dict[str, Any]:
    """
    Read a key=value experiment config file.

    Returns:
        ExperimentSpec keyword arguments

    Raises:
        FileNotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    return spec_values_from_mapping(dict(dotenv_values(path)))


def master_seed_override(dotenv_path: str | Path | None = None) -> int | None:
    """Master seed from REOICA_SEED, loading a local .env first."""
    load_dotenv(dotenv_path)
    raw = os.getenv(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return None
    try:
        seed = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got '{raw}'") from exc
    if seed < 0:
        raise ConfigurationError(f"{SEED_ENV_VAR} must be non-negative, got {seed}")
    return seed


def build_spec(
    preset: ExperimentSpec | None = None,
    file_values: dict[str, Any] | None = None,
    cli_values: dict[str, Any] | None = None,
    apply_env: bool = True,
) -> ExperimentSpec:
    """Merge preset, config-file and flag values (later wins), then REOICA_SEED."""
    spec = preset or ExperimentSpec()
    merged: dict[str, Any] = {}
    for layer in (file_values or {}, cli_values or {}):
        for key, value in layer.items():
            if key == "overrides":
                merged["overrides"] = {**merged.get("overrides", spec.overrides), **value}
            else:
                merged[key] = value
    if apply_env:
        seed = master_seed_override()
        if seed is not None:
            merged["master_seed"] = seed
    return replace(spec, **merged)
