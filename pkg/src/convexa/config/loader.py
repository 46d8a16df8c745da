import json
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from convexa.errors import ConfigError
from convexa.utils.common import find_project_root

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NumericsSettings:
    grid_cells: int = 1024
    zero_tol: float = 1e-9
    lift_steps: int = 64
    bisection_tol: float = 1e-10
    bad_step_tol: float = 1e-6
    refine_tol: float = 1e-9


@dataclass(frozen=True)
class FamilySettings:
    patch_grid_points: int = 32
    patch_margin: float = 2.0
    spread_search_max: int = 256


@dataclass(frozen=True)
class TopologySettings:
    sphere_alpha: int = 128
    sphere_theta: int = 256
    circle_samples: int = 1024
    refine: int = 16
    disk_grid: int = 33


@dataclass(frozen=True)
class SuiteSettings:
    seed: int = 20240501
    workers: int = 1
    checks: tuple[str, ...] = ()
    oracle_samples: int = 10000
    minor_sign: int = 1


@dataclass(frozen=True)
class Settings:
    numerics: NumericsSettings = field(default_factory=NumericsSettings)
    families: FamilySettings = field(default_factory=FamilySettings)
    topology: TopologySettings = field(default_factory=TopologySettings)
    suite: SuiteSettings = field(default_factory=SuiteSettings)

    def with_overrides(self, section: str, **values) -> "Settings":
        """Returns a copy with some keys of one section replaced."""
        return replace(self, **{section: replace(getattr(self, section), **values)})


_SECTIONS = {
    "numerics": NumericsSettings,
    "families": FamilySettings,
    "topology": TopologySettings,
    "suite": SuiteSettings,
}


def default_search_paths() -> list[Path]:
    project_root = find_project_root()
    return [
        project_root / ".convexa" / "config.json",
        project_root / ".config" / "convexa.json",
        Path.home() / ".convexa" / "config.json",
    ]


def settings_from_dict(data: dict) -> Settings:
    """
    Builds Settings from a parsed config document, rejecting unknown sections and keys.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")

    sections = {}
    for name, values in data.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown configuration section '{name}'")
        if not isinstance(values, dict):
            raise ConfigError(f"section '{name}' must be a JSON object")
        section_cls = _SECTIONS[name]
        known = {f.name: f for f in fields(section_cls)}
        kwargs = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown key '{name}.{key}'")
            if key == "checks":
                value = tuple(value)
            kwargs[key] = value
        sections[name] = section_cls(**kwargs)
    return Settings(**sections)


def load_config(path: Path | None = None) -> Settings:
    """
    Loads settings from the first configuration file found. Defaults apply when
    there is none; a malformed file exits with status 2.
    """
    search_paths = [Path(path)] if path is not None else default_search_paths()

    config_path = None
    for candidate in search_paths:
        if candidate.exists():
            config_path = candidate
            break

    if config_path is None:
        if path is not None:
            logger.error(f"Configuration file not found at {path}")
            sys.exit(2)
        logger.info("No configuration file found, using defaults. Searched in:")
        for candidate in search_paths:
            logger.info(f" - {candidate}")
        return Settings()

    logger.info(f"Loading configuration from: {config_path}")

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError:
        logger.error(f"Invalid JSON in {config_path}")
        sys.exit(2)

    try:
        return settings_from_dict(data)
    except (ConfigError, TypeError) as e:
        logger.error(f"Invalid configuration in {config_path}: {e}")
        sys.exit(2)
