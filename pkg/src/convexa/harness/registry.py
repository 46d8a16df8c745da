from typing import Callable

from convexa.harness import checks

CheckFunction = Callable[..., checks.CheckResult]


class CheckRegistry:
    """Named reproduction checks in registration order."""

    def __init__(self):
        self._checks: dict[str, CheckFunction] = {}

    def register_check_function(self, name: str, fn: CheckFunction):
        if name in self._checks:
            raise ValueError(f"check '{name}' is already registered")
        self._checks[name] = fn

    def names(self) -> list[str]:
        return list(self._checks)

    def get(self, name: str) -> CheckFunction:
        try:
            return self._checks[name]
        except KeyError:
            raise KeyError(f"unknown check '{name}'; available: {', '.join(self._checks)}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._checks


def get_registered_checks() -> CheckRegistry:
    """
    Returns a CheckRegistry with every reproduction check registered.
    """
    registry = CheckRegistry()

    # algebra of cells
    registry.register_check_function("bruhat-oracle", checks.check_bruhat_oracle)
    registry.register_check_function("minor-predicate", checks.check_minor_predicate)

    # explicit families
    registry.register_check_function("total-curvature", checks.check_total_curvature)
    registry.register_check_function("gamma-family", checks.check_gamma_family)
    registry.register_check_function("no-common-tangent", checks.check_no_common_tangent)
    registry.register_check_function("ellipse-fit", checks.check_ellipse_fit)
    registry.register_check_function("multiconvex", checks.check_multiconvex)

    # surgeries
    registry.register_check_function("surgeries", checks.check_surgeries)

    # topological witnesses (slow)
    registry.register_check_function("degree-g0", checks.check_degree_g0)
    registry.register_check_function("mk-intersections", checks.check_mk_intersections)
    registry.register_check_function("h-hat", checks.check_h_hat)

    return registry
