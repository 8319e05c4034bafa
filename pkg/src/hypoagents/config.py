"""TOML run-configuration loading.

Sections: ``[run]``, ``[provider]`` with one ``[provider.<id>]`` table per profile,
``[context]``, ``[data]`` (plus ``[data.sample_classes]``) and ``[scholar]``. Relative
paths resolve against the config file's directory. Secrets stay in the environment
(``.env`` is honoured) and are never written to the run directory.
"""

from __future__ import annotations

import tomllib
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Type, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigurationError, InvalidConfigError, MissingConfigError
from .gateway.models import ProviderProfile
from .logging_utils import LogComponent, get_logger
from .orchestrator.models import RunConfig
from .scholar.models import ScholarSettings

logger = get_logger("config", LogComponent.CLI)

M = TypeVar("M", bound=BaseModel)


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(default=10, ge=1)
    scientist_count: int = Field(default=3, ge=1)
    snippet_limit: int = Field(default=5, ge=1, le=5)
    output_dir: str = "runs"
    user_instructions: str = ""
    seed: int = 0
    dedup_threshold: float = Field(default=0.9, ge=0, le=1)
    max_reprompts: int = Field(default=2, ge=0)
    cost_limit_usd: Optional[float] = Field(default=None, gt=0)


class ContextSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    paths: List[str] = Field(default_factory=list)


class DataSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str
    sample_classes: Dict[str, str] = Field(default_factory=dict)


def _validate(model: Type[M], data: Any, section: str, config_file: str) -> M:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        key = f"{section}.{location}" if location else section
        raise InvalidConfigError(key, error["msg"], config_file=config_file) from exc


def _resolve(base: Path, value: str) -> str:
    path = Path(value).expanduser()
    return str(path if path.is_absolute() else (base / path).resolve())


def _select_provider(
    providers: Mapping[str, Any],
    override: Optional[str],
    config_file: str,
) -> tuple[str, Dict[str, Any]]:
    profiles = {key: value for key, value in providers.items() if isinstance(value, dict)}
    if not profiles:
        raise MissingConfigError("provider.<id>", config_file=config_file)
    chosen = override or providers.get("default")
    if chosen is None:
        if len(profiles) != 1:
            raise MissingConfigError("provider.default", config_file=config_file)
        chosen = next(iter(profiles))
    if chosen not in profiles:
        raise InvalidConfigError(
            "provider",
            f"unknown provider '{chosen}' (configured: {', '.join(sorted(profiles))})",
            config_file=config_file,
        )
    return str(chosen), dict(profiles[chosen])


def build_run_config(
    raw: Mapping[str, Any],
    base_dir: Path,
    config_file: str = "<memory>",
    *,
    iterations: Optional[int] = None,
    provider_id: Optional[str] = None,
    output_dir: Optional[str] = None,
) -> RunConfig:
    """Validate parsed TOML, apply overrides and resolve every path."""
    known = {"run", "provider", "context", "data", "scholar"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise InvalidConfigError(unknown[0], "unknown section", config_file=config_file)

    run = _validate(RunSection, raw.get("run", {}), "run", config_file)
    context = _validate(ContextSection, raw.get("context", {}), "context", config_file)
    if "data" not in raw or "path" not in raw["data"]:
        raise MissingConfigError("data.path", config_file=config_file)
    data = _validate(DataSection, raw["data"], "data", config_file)

    chosen, profile_table = _select_provider(raw.get("provider", {}), provider_id, config_file)
    if profile_table.get("script"):
        profile_table["script"] = _resolve(base_dir, profile_table["script"])
    if profile_table.get("context_paths") is not None:
        profile_table["context_paths"] = [_resolve(base_dir, p) for p in profile_table["context_paths"]]
    profile = _validate(ProviderProfile, {"provider_id": chosen, **profile_table}, f"provider.{chosen}", config_file)

    scholar_table = dict(raw.get("scholar", {}))
    scholar_table["cache_dir"] = _resolve(base_dir, scholar_table.get("cache_dir", "cache"))
    scholar = _validate(ScholarSettings, scholar_table, "scholar", config_file)

    values: Dict[str, Any] = run.model_dump()
    if iterations is not None:
        values["iterations"] = iterations
    values["output_dir"] = (
        str(Path(output_dir).expanduser().resolve()) if output_dir else _resolve(base_dir, run.output_dir)
    )
    values.update(
        provider=profile,
        context_paths=[_resolve(base_dir, p) for p in context.paths],
        data_path=_resolve(base_dir, data.path),
        sample_classes=data.sample_classes,
        scholar=scholar,
    )
    return _validate(RunConfig, values, "run", config_file)


def load_config(
    path: Path | str,
    *,
    iterations: Optional[int] = None,
    provider_id: Optional[str] = None,
    output_dir: Optional[str] = None,
) -> RunConfig:
    """Read a TOML config file; CLI overrides are applied before validation."""
    load_dotenv()
    config_path = Path(path).expanduser()
    if not config_path.is_file():
        raise ConfigurationError(f"Configuration file not found: {config_path}", config_file=str(config_path))
    try:
        raw = tomllib.loads(config_path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigurationError(f"Configuration file unreadable: {exc}", config_file=str(config_path)) from exc

    config = build_run_config(
        raw,
        config_path.parent.resolve(),
        str(config_path),
        iterations=iterations,
        provider_id=provider_id,
        output_dir=output_dir,
    )
    logger.info(
        "Configuration loaded",
        operation="load_config",
        extra_fields={"config_file": str(config_path), "provider": config.provider_id,
                      "iterations": config.iterations},
    )
    return config
