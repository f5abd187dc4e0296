from functools import lru_cache

import numpy as np

from latticeqm.config import REGRADE_GRID_N
from latticeqm.errors import InvalidInputError
from latticeqm.regrade.regrade_solver import BinaryOpSampler

# name: (default coefficient, domain)
operation_domains = {
    "add": (None, (0.0, 1.0, 0.0, 1.0)),
    "cubic-mean": (3.0, (0.5, 1.5, 0.5, 1.5)),
    "uv-shift": (1.0, (0.1, 1.0, 0.1, 1.0)),
    "product": (1.0, (0.5, 2.0, 0.5, 2.0)),
    "broken-assoc": (1.0, (0.0, 2.0, 0.0, 2.0)),
}

product_candidate_defaults = {
    "uv": 1.0,
    "scaled-uv": 2.0,
    "sum": None,
    "shifted-uv": 0.1,
}

PRODUCT_CANDIDATE_DOMAIN = (-1.0, 1.0, -1.0, 1.0)


def _operation(name, c):
    """(S, dS/du, dS/dv) for a catalog operation with shape coefficient c"""
    if name == "add":
        return (lambda u, v: u + v), (lambda u, v: np.ones_like(u * v)), (lambda u, v: np.ones_like(u * v))
    if name == "cubic-mean":

        def power_mean(u, v):
            return (u**c + v**c) ** (1.0 / c)

        return (
            power_mean,
            lambda u, v: u ** (c - 1.0) * power_mean(u, v) ** (1.0 - c),
            lambda u, v: v ** (c - 1.0) * power_mean(u, v) ** (1.0 - c),
        )
    if name == "uv-shift":
        return (
            lambda u, v: u + v + c * u * v,
            lambda u, v: 1.0 + c * v + 0.0 * u,
            lambda u, v: 1.0 + c * u + 0.0 * v,
        )
    if name == "product":
        return (lambda u, v: c * u * v), (lambda u, v: c * v + 0.0 * u), (lambda u, v: c * u + 0.0 * v)
    return (lambda u, v: u + c * v**2), (lambda u, v: np.ones_like(u * v)), (lambda u, v: 2.0 * c * v + 0.0 * u)


@lru_cache(maxsize=None)
def catalog_operation(name: str, coefficient=None, grid_n=REGRADE_GRID_N, analytic_partials=True) -> BinaryOpSampler:
    """catalog_operation - look up a named binary operation for regrade recovery

    Args:
        name (str): one of add, cubic-mean (power mean, coefficient = exponent), uv-shift (u + v + c uv),
            product (c u v), broken-assoc (u + c v^2).
        coefficient (float): shape coefficient; None selects the catalog default.
        grid_n (int): points per axis of the tabulation grid.
        analytic_partials (bool): attach closed-form partial derivatives.

    Returns:
        BinaryOpSampler: operation on its catalog domain. This function caches by default.

    Example:
        `S = latticeqm.regrade.catalog_operation("cubic-mean")`
    """
    if name not in operation_domains:
        raise InvalidInputError(f"unknown operation '{name}', expected one of {sorted(operation_domains)}")
    default, domain = operation_domains[name]
    c = default if coefficient is None else float(coefficient)
    op, du, dv = _operation(name, c)
    label = name if c is None else f"{name}(c={c:g})"
    return BinaryOpSampler(op, domain, grid_n, (du, dv) if analytic_partials else None, name=label)


@lru_cache(maxsize=None)
def catalog_product_candidate(name: str, coefficient=None) -> BinaryOpSampler:
    """Candidate product rules P(u, v): uv (C uv), scaled-uv (C uv, C=2), sum (u + v), shifted-uv (uv + c)"""
    if name not in product_candidate_defaults:
        raise InvalidInputError(f"unknown candidate '{name}', expected one of {sorted(product_candidate_defaults)}")
    c = product_candidate_defaults[name] if coefficient is None else float(coefficient)
    if name in ("uv", "scaled-uv"):
        op = lambda u, v: c * u * v  # noqa: E731
    elif name == "sum":
        op = lambda u, v: u + v  # noqa: E731
    else:
        op = lambda u, v: u * v + c  # noqa: E731
    label = name if c is None else f"{name}(c={c:g})"
    return BinaryOpSampler(op, PRODUCT_CANDIDATE_DOMAIN, name=label)
