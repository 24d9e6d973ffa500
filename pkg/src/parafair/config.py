"""Experiment config files: a line-based ``key = value`` format with one
``[model]`` section per model to run.

Global keys choose the data source, split, evaluation and training
defaults; section keys override training hyperparameters per model.
Unknown keys are errors, never warnings, and file paths are checked at
validation time so a bad config fails before any training starts.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass
from pathlib import Path

from .data import TrainConfig, child_seed
from .exceptions import ConfigError
from .ingest import SourceFormat
from .models import MODEL_TAGS

DEFAULTS = {
    "test_fraction": 0.2,
    "seed": 42,
    "top_n": 10,
    "latent_dim": 10,
    "learning_rate": 0.01,
    "epochs": 30,
    "init_scale": 0.1,
    "grad_guard_eps": 1e-12,
    "clamp_predictions": True,
    "regularization": 0.0,
    "eval_user_cap": 0,
    "takens_delay": 1,
    "figures": True,
    "output": "parafair-out",
    "format": "movielens-1m",
    "synthetic_levels": (1.0, 2.0, 3.0, 4.0, 5.0),
}

_TRAIN_KEYS = (
    "latent_dim",
    "learning_rate",
    "epochs",
    "seed",
    "init_scale",
    "grad_guard_eps",
    "clamp_predictions",
    "regularization",
)

_GLOBAL_KEYS = (
    "dataset",
    "format",
    "separator",
    "user_column",
    "item_column",
    "rating_column",
    "header_lines",
    "synthetic_users",
    "synthetic_items",
    "synthetic_ratings",
    "synthetic_levels",
    "r_min",
    "r_max",
    "test_fraction",
    "top_n",
    "output",
    "eval_user_cap",
    "takens_delay",
    "figures",
) + _TRAIN_KEYS


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the generated rank-frequency dataset."""

    n_users: int
    n_items: int
    n_ratings: int
    levels: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple[str, ...]
    train_configs: dict[str, TrainConfig]
    seed: int
    test_fraction: float
    top_n: int
    output: Path
    dataset_path: Path | None = None
    source_format: SourceFormat | None = None
    synthetic: SyntheticSpec | None = None
    r_min_override: float | None = None
    r_max_override: float | None = None
    eval_user_cap: int = 0
    takens_delay: int = 1
    figures: bool = True


def _parse_bool(raw: str, lineno: int) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}", line=lineno)


def _parse_int(raw: str, lineno: int) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", line=lineno) from None


def _parse_float(raw: str, lineno: int) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", line=lineno) from None


def _parse_levels(raw: str, lineno: int) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(","))
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {raw!r}", line=lineno) from None


_CONVERTERS = {
    "dataset": lambda raw, ln: raw.strip(),
    "format": lambda raw, ln: raw.strip(),
    "separator": lambda raw, ln: raw,
    "user_column": _parse_int,
    "item_column": _parse_int,
    "rating_column": _parse_int,
    "header_lines": _parse_int,
    "synthetic_users": _parse_int,
    "synthetic_items": _parse_int,
    "synthetic_ratings": _parse_int,
    "synthetic_levels": _parse_levels,
    "r_min": _parse_float,
    "r_max": _parse_float,
    "test_fraction": _parse_float,
    "seed": _parse_int,
    "top_n": _parse_int,
    "output": lambda raw, ln: raw.strip(),
    "eval_user_cap": _parse_int,
    "takens_delay": _parse_int,
    "figures": _parse_bool,
    "latent_dim": _parse_int,
    "learning_rate": _parse_float,
    "epochs": _parse_int,
    "init_scale": _parse_float,
    "grad_guard_eps": _parse_float,
    "clamp_predictions": _parse_bool,
    "regularization": _parse_float,
}


def _suggest(key: str, valid: tuple[str, ...]) -> str:
    close = difflib.get_close_matches(key, valid, n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def validate_config(
    text: str,
    base_dir: str | Path | None = None,
    seed_override: int | None = None,
    output_override: str | Path | None = None,
) -> ExperimentConfig:
    """Parse and fully validate experiment config text.

    Relative dataset paths resolve against ``base_dir`` (the config file's
    directory when read from disk). ``seed_override`` replaces the global
    seed before per-model seeds are derived from it.
    """
    global_raw: dict[str, tuple[object, int]] = {}
    sections: list[tuple[str, dict[str, tuple[object, int]]]] = []
    current: dict[str, tuple[object, int]] | None = None
    scope_keys: tuple[str, ...] = _GLOBAL_KEYS

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            tag = stripped[1:-1].strip()
            if tag not in MODEL_TAGS:
                raise ConfigError(
                    f"unknown model {tag!r}{_suggest(tag, MODEL_TAGS)}", line=lineno
                )
            if any(existing == tag for existing, _ in sections):
                raise ConfigError(f"model {tag!r} configured twice", line=lineno)
            current = {}
            sections.append((tag, current))
            scope_keys = _TRAIN_KEYS
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"expected 'key = value' or '[model]', got {stripped!r}", line=lineno
            )
        key, _, raw_value = stripped.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in scope_keys:
            where = "model section" if current is not None else "global scope"
            raise ConfigError(
                f"unknown key {key!r} in {where}{_suggest(key, scope_keys)}", line=lineno
            )
        target = current if current is not None else global_raw
        if key in target:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        target[key] = (_CONVERTERS[key](raw_value, lineno), lineno)

    if not sections:
        raise ConfigError("no models configured (add at least one [model] section)")

    def top(key: str):
        if key in global_raw:
            return global_raw[key][0]
        return DEFAULTS.get(key)

    seed = int(seed_override) if seed_override is not None else int(top("seed"))

    dataset_path = None
    source_format = None
    synthetic = None
    synth_keys = [k for k in ("synthetic_users", "synthetic_items", "synthetic_ratings") if k in global_raw]
    if "dataset" in global_raw:
        if synth_keys:
            raise ConfigError(
                "configure either 'dataset' or 'synthetic_*', not both",
                line=global_raw[synth_keys[0]][1],
            )
        dataset_path = Path(str(top("dataset")))
        if base_dir is not None and not dataset_path.is_absolute():
            dataset_path = Path(base_dir) / dataset_path
        if not dataset_path.is_file():
            raise ConfigError(
                f"dataset file not found: {dataset_path}", line=global_raw["dataset"][1]
            )
        source_format = _build_format(global_raw, str(top("format")))
    elif synth_keys:
        missing = [k for k in ("synthetic_users", "synthetic_items", "synthetic_ratings") if k not in global_raw]
        if missing:
            raise ConfigError(f"synthetic dataset needs {missing[0]!r}")
        synthetic = SyntheticSpec(
            n_users=int(top("synthetic_users")),
            n_items=int(top("synthetic_items")),
            n_ratings=int(top("synthetic_ratings")),
            levels=tuple(top("synthetic_levels")),
        )
    else:
        raise ConfigError("no dataset configured (set 'dataset' or 'synthetic_*')")

    test_fraction = float(top("test_fraction"))
    if not (0.0 < test_fraction < 1.0):
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    top_n = int(top("top_n"))
    if top_n < 1:
        raise ConfigError(f"top_n must be >= 1, got {top_n}")
    eval_user_cap = int(top("eval_user_cap"))
    if eval_user_cap < 0:
        raise ConfigError(f"eval_user_cap must be >= 0, got {eval_user_cap}")
    takens_delay = int(top("takens_delay"))
    if takens_delay < 1:
        raise ConfigError(f"takens_delay must be >= 1, got {takens_delay}")

    models = tuple(tag for tag, _ in sections)
    train_configs: dict[str, TrainConfig] = {}
    for tag, section in sections:
        kwargs = {}
        for key in _TRAIN_KEYS:
            if key == "seed":
                continue
            if key in section:
                kwargs[key] = section[key][0]
            elif key in global_raw:
                kwargs[key] = global_raw[key][0]
            else:
                kwargs[key] = DEFAULTS[key]
        if "seed" in section:
            kwargs["seed"] = section["seed"][0]
        else:
            kwargs["seed"] = child_seed(seed, tag)
        try:
            cfg = TrainConfig(**kwargs)
        except ValueError as err:
            raise ConfigError(f"[{tag}]: {err}") from err
        if tag == "linfac" and cfg.latent_dim < 2:
            raise ConfigError(f"[linfac]: latent_dim must be >= 2, got {cfg.latent_dim}")
        train_configs[tag] = cfg

    output = Path(str(output_override)) if output_override is not None else Path(str(top("output")))
    return ExperimentConfig(
        models=models,
        train_configs=train_configs,
        seed=seed,
        test_fraction=test_fraction,
        top_n=top_n,
        output=output,
        dataset_path=dataset_path,
        source_format=source_format,
        synthetic=synthetic,
        r_min_override=top("r_min") if "r_min" in global_raw else None,
        r_max_override=top("r_max") if "r_max" in global_raw else None,
        eval_user_cap=eval_user_cap,
        takens_delay=takens_delay,
        figures=bool(top("figures")),
    )


def _build_format(global_raw, tag: str) -> SourceFormat:
    layout_keys = ("separator", "user_column", "item_column", "rating_column", "header_lines")
    if tag == "movielens-1m" or tag == "comoda-csv":
        for key in layout_keys:
            if key in global_raw:
                raise ConfigError(
                    f"{key!r} only applies to format = generic-csv",
                    line=global_raw[key][1],
                )
        return SourceFormat.movielens_1m() if tag == "movielens-1m" else SourceFormat.comoda_csv()
    if tag == "generic-csv":
        def geti(key, default):
            return int(global_raw[key][0]) if key in global_raw else default

        positions = (geti("user_column", 0), geti("item_column", 1), geti("rating_column", 2))
        separator = str(global_raw["separator"][0]) if "separator" in global_raw else ","
        try:
            return SourceFormat.generic_csv(
                separator=separator,
                field_positions=positions,
                header_lines=geti("header_lines", 0),
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err
    raise ConfigError(
        f"unknown format {tag!r}{_suggest(tag, ('movielens-1m', 'comoda-csv', 'generic-csv'))}",
        line=global_raw["format"][1] if "format" in global_raw else None,
    )


def read_config_file(
    path: str | Path,
    seed_override: int | None = None,
    output_override: str | Path | None = None,
) -> ExperimentConfig:
    """Read and validate a config file; relative paths resolve beside it."""
    path = Path(path)
    return validate_config(
        path.read_text(encoding="utf-8"),
        base_dir=path.parent,
        seed_override=seed_override,
        output_override=output_override,
    )


def config_echo_lines(config: ExperimentConfig) -> list[str]:
    """The resolved config as flat ``key = value`` lines for the summary file."""

    def fmt(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        return str(value)

    lines = [
        f"config.seed = {config.seed}",
        f"config.test_fraction = {fmt(config.test_fraction)}",
        f"config.top_n = {config.top_n}",
        f"config.output = {config.output}",
        f"config.eval_user_cap = {config.eval_user_cap}",
        f"config.takens_delay = {config.takens_delay}",
        f"config.figures = {fmt(config.figures)}",
        f"config.models = {','.join(config.models)}",
    ]
    if config.dataset_path is not None:
        lines.append(f"config.dataset = {config.dataset_path}")
        sf = config.source_format
        lines.append(f"config.format = {sf.tag}")
        if sf.tag == "generic-csv":
            lines.append(f"config.separator = {sf.separator}")
            lines.append(f"config.user_column = {sf.field_positions[0]}")
            lines.append(f"config.item_column = {sf.field_positions[1]}")
            lines.append(f"config.rating_column = {sf.field_positions[2]}")
            lines.append(f"config.header_lines = {sf.header_lines}")
    if config.synthetic is not None:
        lines.append(f"config.synthetic_users = {config.synthetic.n_users}")
        lines.append(f"config.synthetic_items = {config.synthetic.n_items}")
        lines.append(f"config.synthetic_ratings = {config.synthetic.n_ratings}")
        lines.append(f"config.synthetic_levels = {','.join(repr(v) for v in config.synthetic.levels)}")
    if config.r_min_override is not None:
        lines.append(f"config.r_min = {fmt(config.r_min_override)}")
    if config.r_max_override is not None:
        lines.append(f"config.r_max = {fmt(config.r_max_override)}")
    for tag in config.models:
        cfg = config.train_configs[tag]
        for key in _TRAIN_KEYS:
            lines.append(f"model.{tag}.{key} = {fmt(getattr(cfg, key))}")
    return lines
