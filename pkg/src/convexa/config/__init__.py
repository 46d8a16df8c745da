from .loader import (
    FamilySettings,
    NumericsSettings,
    Settings,
    SuiteSettings,
    TopologySettings,
    load_config,
    settings_from_dict,
)

__all__ = [
    "FamilySettings",
    "NumericsSettings",
    "Settings",
    "SuiteSettings",
    "TopologySettings",
    "load_config",
    "settings_from_dict",
]
