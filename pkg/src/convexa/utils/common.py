import logging
import os
from pathlib import Path

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "CONVEXA_SEED"


def find_project_root(marker_file="pyproject.toml"):
    """
    Finds the project root by searching for a marker file in parent directories.
    """
    current_path = Path(__file__).resolve()
    for parent in current_path.parents:
        if (parent / marker_file).exists():
            return parent
    # Fallback to current working directory if marker not found.
    return Path.cwd()


def get_convexa_dir() -> Path:
    """
    Returns the path to the .convexa directory.
    Prioritizes project root, then home directory.
    Defaults to project root/.convexa if neither exists.
    """
    project_root = find_project_root()

    project_dir = project_root / ".convexa"
    if project_dir.exists():
        return project_dir

    home_dir = Path.home() / ".convexa"
    if home_dir.exists():
        return home_dir

    return project_dir


def resolve_seed(settings) -> int:
    """
    Returns the suite seed, letting the CONVEXA_SEED environment variable win
    over the configured value.
    """
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is not None:
        try:
            seed = int(raw)
            logger.info(f"Using seed {seed} from {SEED_ENV_VAR}")
            return seed
        except ValueError:
            logger.warning(f"Ignoring non-integer {SEED_ENV_VAR}={raw!r}")
    return settings.suite.seed
