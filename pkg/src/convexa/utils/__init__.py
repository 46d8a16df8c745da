from .common import find_project_root, get_convexa_dir, resolve_seed

__all__ = ["find_project_root", "get_convexa_dir", "resolve_seed"]
