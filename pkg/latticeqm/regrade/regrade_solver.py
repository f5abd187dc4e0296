import logging
from typing import Callable, Optional

import attrs
import numpy as np
import polars as pl
from attrs import field, frozen
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from latticeqm.config import (
    PRODUCT_RULE_GRID_N,
    PRODUCT_RULE_TOLERANCE,
    REGRADE_ASSOCIATIVITY_GATE,
    REGRADE_FD_STEP,
    REGRADE_GRID_N,
    REGRADE_H_STEP,
    REGRADE_INTERIOR_FRACTION,
    REGRADE_MIN_DERIVATIVE,
    REGRADE_MIN_GRID_N,
    REGRADE_PAIR_N,
    REGRADE_TRIPLE_N,
)
from latticeqm.decorators import record_time_usage
from latticeqm.errors import (
    DomainCoverageError,
    InvalidInputError,
    NonAssociativeError,
    NonFiniteError,
    NonMonotoneRegradeError,
    VanishingDerivativeError,
)
from latticeqm.io_utils import frame_output

logger = logging.getLogger("lqm.regrade_solver")
logger.addHandler(logging.NullHandler())


def _domain(values):
    return tuple(float(x) for x in values)


@frozen(eq=False)
class BinaryOpSampler:
    """A vectorized binary operation S(u, v) on [u_lo, u_hi] x [v_lo, v_hi], optionally with analytic partials"""

    eval: Callable = field()
    domain: tuple = field(converter=_domain)
    grid_n: int = field(default=REGRADE_GRID_N, converter=int)
    partials: Optional[tuple] = field(default=None)
    name: str = field(default="S")

    @domain.validator
    def _check_domain(self, attribute, value):
        if len(value) != 4:
            raise InvalidInputError(f"domain must be (u_lo, u_hi, v_lo, v_hi), got {value}")
        u_lo, u_hi, v_lo, v_hi = value
        if not (u_lo < u_hi and v_lo < v_hi):
            raise InvalidInputError(f"domain bounds must be increasing, got {value}")

    @grid_n.validator
    def _check_grid_n(self, attribute, value):
        if value < REGRADE_MIN_GRID_N:
            raise InvalidInputError(f"grid_n must be at least {REGRADE_MIN_GRID_N}, got {value}")

    @property
    def u_range(self):
        return self.domain[0], self.domain[1]

    @property
    def v_range(self):
        return self.domain[2], self.domain[3]

    def u_grid(self, n=None):
        return np.linspace(*self.u_range, n or self.grid_n)

    def v_grid(self, n=None):
        return np.linspace(*self.v_range, n or self.grid_n)

    def __call__(self, u, v):
        return np.asarray(self.eval(u, v), dtype=float)

    def _step(self, axis_range, fraction):
        return fraction * (axis_range[1] - axis_range[0])

    def partial_u(self, u, v):
        if self.partials is not None:
            return np.asarray(self.partials[0](u, v), dtype=float)
        h = self._step(self.u_range, REGRADE_FD_STEP)
        return _five_point(lambda x: self(x, v), u, h)

    def partial_v(self, u, v):
        if self.partials is not None:
            return np.asarray(self.partials[1](u, v), dtype=float)
        h = self._step(self.v_range, REGRADE_FD_STEP)
        return _five_point(lambda y: self(u, y), v, h)


def _five_point(fn, x, h):
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def _within(x, lo, hi):
    return (x >= lo) & (x <= hi)


@frozen
class AssociativityScan:
    residual: float
    evaluated: int
    skipped: int


def associativity_scan(S: BinaryOpSampler, n=REGRADE_TRIPLE_N) -> AssociativityScan:
    """max |S(S(u,v),w) - S(u,S(v,w))| over an n^3 triple grid, skipping triples that leave the domain"""
    u_lo, u_hi = S.u_range
    v_lo, v_hi = S.v_range
    u, v, w = np.meshgrid(S.u_grid(n), S.v_grid(n), S.v_grid(n), indexing="ij")
    u, v, w = u.ravel(), v.ravel(), w.ravel()
    r = S(u, v)
    s = S(v, w)
    keep = _within(v, u_lo, u_hi) & _within(r, u_lo, u_hi) & _within(s, v_lo, v_hi)
    evaluated = int(np.count_nonzero(keep))
    skipped = int(keep.size - evaluated)
    if evaluated == 0:
        raise DomainCoverageError(f"{S.name}: every triple leaves the domain {S.domain}")
    lhs = S(r[keep], w[keep])
    rhs = S(u[keep], s[keep])
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        raise NonFiniteError(f"{S.name} is not finite on its domain")
    residual = float(np.max(np.abs(lhs - rhs)))
    logger.debug(f"associativity_scan({S.name}): residual {residual:.3e}, {evaluated} triples, {skipped} skipped")
    return AssociativityScan(residual, evaluated, skipped)


def associativity_residual(S: BinaryOpSampler, n=REGRADE_TRIPLE_N) -> float:
    return associativity_scan(S, n).residual


@frozen(eq=False)
class RegradeResult:
    """Tabulated regrade xi on the u-grid together with H, h and the diagnostics of its construction"""

    u: np.ndarray
    xi: np.ndarray
    H: np.ndarray
    h: np.ndarray
    xi_spline: CubicSpline
    c_constant: float
    c_measured: float
    associativity: float
    residual_stats: dict = field(factory=dict)

    def xi_at(self, x):
        return self.xi_spline(x)

    @property
    def xi_range(self):
        return float(self.u[0]), float(self.u[-1])


def _g_ratio(S: BinaryOpSampler, u0, v):
    u = np.full_like(v, u0)
    s1 = S.partial_u(u, v)
    if np.any(np.abs(s1) < REGRADE_MIN_DERIVATIVE):
        raise VanishingDerivativeError(f"{S.name}: dS/du vanishes at u0={u0}")
    return S.partial_v(u, v) / s1


@record_time_usage
def recover_regrade(S: BinaryOpSampler) -> RegradeResult:
    """Recover xi with xi(S(u,v)) = xi(u) + xi(v) + const from an associative operation S

    G(u,v) = S2/S1; h(v) = (dG/dv)/G at the base abscissa u0 = u_lo; H(u) = exp(-int_{u0}^u h);
    xi(u) = int_{u0}^u du'/H(u'). Integrals are cumulative Simpson on the uniform grid.

    Args:
        S (BinaryOpSampler): operation to regrade.

    Returns:
        RegradeResult: tabulated xi with c fixed to 1, the measured c and additivity residual statistics.

    Raises:
        NonAssociativeError: If the associativity residual exceeds REGRADE_ASSOCIATIVITY_GATE.
        VanishingDerivativeError: If dS/du vanishes at the base abscissa.
        NonMonotoneRegradeError: If the tabulated xi is not strictly increasing.
    """
    associativity = associativity_residual(S)
    if associativity > REGRADE_ASSOCIATIVITY_GATE:
        raise NonAssociativeError(
            f"{S.name} is not associative: residual {associativity:.3e} > {REGRADE_ASSOCIATIVITY_GATE:.0e}"
        )
    u = S.u_grid()
    u0 = u[0]
    step = REGRADE_H_STEP * (u[-1] - u[0])
    g = _g_ratio(S, u0, u)
    dg = _five_point(lambda y: _g_ratio(S, u0, y), u, step)
    h = dg / g
    log_H = -cumulative_simpson(h, x=u, initial=0.0)
    H = np.exp(log_H)
    xi = cumulative_simpson(1.0 / H, x=u, initial=0.0)
    if not np.all(np.diff(xi) > 0):
        raise NonMonotoneRegradeError(f"{S.name}: recovered xi is not strictly increasing")
    v0 = 0.5 * (u[0] + u[-1])
    H_at_v0 = float(np.exp(CubicSpline(u, log_H)(v0)))
    c_measured = float(_g_ratio(S, u0, np.array([v0]))[0] * H_at_v0 / H[0])
    logger.info(f"recover_regrade({S.name}): measured c = {c_measured:.12g}")
    result = RegradeResult(u, xi, H, h, CubicSpline(u, xi), 1.0, c_measured, associativity)
    try:
        scan = additivity_scan(result, S)
    except DomainCoverageError as e:
        logger.warning(f"recover_regrade({S.name}): no additivity pairs, {e}")
        return result
    return attrs.evolve(result, residual_stats={"max": scan.residual, "mean": scan.mean, "offset": scan.offset})


@frozen
class AdditivityScan:
    residual: float
    mean: float
    offset: float
    evaluated: int
    skipped: int


def additivity_scan(result: RegradeResult, S: BinaryOpSampler, n=REGRADE_PAIR_N) -> AdditivityScan:
    """max |xi(S(u,v)) - xi(u) - xi(v) - kappa| over an n^2 pair grid, kappa the best constant offset"""
    lo, hi = result.xi_range
    u, v = np.meshgrid(S.u_grid(n), S.v_grid(n), indexing="ij")
    u, v = u.ravel(), v.ravel()
    s = S(u, v)
    keep = _within(u, lo, hi) & _within(v, lo, hi) & _within(s, lo, hi)
    evaluated = int(np.count_nonzero(keep))
    if evaluated == 0:
        raise DomainCoverageError(f"{S.name}: no pair maps back into the tabulated range [{lo}, {hi}]")
    raw = result.xi_at(s[keep]) - result.xi_at(u[keep]) - result.xi_at(v[keep])
    offset = 0.5 * (float(np.max(raw)) + float(np.min(raw)))
    deviation = np.abs(raw - offset)
    return AdditivityScan(float(np.max(deviation)), float(np.mean(deviation)), offset, evaluated, keep.size - evaluated)


def additivity_residual(result: RegradeResult, S: BinaryOpSampler, n=REGRADE_PAIR_N) -> float:
    return additivity_scan(result, S, n).residual


def affine_fit_deviation(x, y, interior=REGRADE_INTERIOR_FRACTION) -> float:
    """Fit y = alpha x + beta on the central `interior` fraction; max deviation relative to the span of y there"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    drop = int(round(0.5 * (1.0 - interior) * x.size))
    keep = slice(drop, x.size - drop)
    xs, ys = x[keep], y[keep]
    alpha, beta = np.polyfit(xs, ys, 1)
    span = float(np.max(ys) - np.min(ys))
    if span == 0.0:
        raise InvalidInputError("affine_fit_deviation needs a non-constant target")
    return float(np.max(np.abs(ys - (alpha * xs + beta)))) / span


def xi_table(result: RegradeResult, return_as_pandas=False) -> pl.DataFrame:
    df = pl.DataFrame({"u": result.u, "xi": result.xi, "H": result.H, "h": result.h})
    return frame_output(df, return_as_pandas)


@frozen
class ProductRuleReport:
    left_distributivity: float
    right_distributivity: float
    associativity: float
    c_fit: float
    fit_residual: float
    passes: bool

    @property
    def residuals(self):
        return self.left_distributivity, self.right_distributivity, self.associativity


def product_rule_residual(P: BinaryOpSampler, n=PRODUCT_RULE_GRID_N) -> ProductRuleReport:
    """Residuals of P(u,v+w)=P(u,v)+P(u,w), P(u+v,w)=P(u,w)+P(v,w) and associativity, plus the fitted C of C u v

    A candidate passes when all three residuals are within PRODUCT_RULE_TOLERANCE.
    """
    u, v, w = np.meshgrid(P.u_grid(n), P.v_grid(n), P.v_grid(n), indexing="ij")
    left = float(np.max(np.abs(P(u, v + w) - P(u, v) - P(u, w))))
    right = float(np.max(np.abs(P(u + v, w) - P(u, w) - P(v, w))))
    assoc = float(np.max(np.abs(P(P(u, v), w) - P(u, P(v, w)))))
    a, b = np.meshgrid(P.u_grid(n), P.v_grid(n), indexing="ij")
    basis = a * b
    values = P(a, b)
    c_fit = float(np.sum(values * basis) / np.sum(basis * basis))
    fit_residual = float(np.max(np.abs(values - c_fit * basis)))
    passes = max(left, right, assoc) <= PRODUCT_RULE_TOLERANCE
    logger.debug(f"product_rule_residual({P.name}): {left:.3e}, {right:.3e}, {assoc:.3e}, C={c_fit:.6g}")
    return ProductRuleReport(left, right, assoc, c_fit, fit_residual, passes)


@frozen(eq=False)
class RegradeFamily:
    """Strictly monotone smooth eta; S = eta^-1(eta(u) + eta(v)) is associative with regrade eta"""

    name: str
    eta: Callable
    eta_inv: Callable
    eta_prime: Optional[Callable] = None

    def operation(self, u, v):
        return self.eta_inv(self.eta(u) + self.eta(v))


def regrade_family(family: RegradeFamily, domain, grid_n=REGRADE_GRID_N, analytic_partials=False):
    partials = None
    if analytic_partials:
        if family.eta_prime is None:
            raise InvalidInputError(f"family {family.name} has no derivative for analytic partials")

        def s1(u, v):
            return family.eta_prime(u) / family.eta_prime(family.operation(u, v))

        def s2(u, v):
            return family.eta_prime(v) / family.eta_prime(family.operation(u, v))

        partials = (s1, s2)
    return BinaryOpSampler(family.operation, domain, grid_n, partials, name=family.name)


def random_regrade_family(seed) -> RegradeFamily:
    """Random eta from the power, exponential, sinh and log1p families with a random shape parameter"""
    rng = np.random.default_rng(seed)
    kind = ("power", "exp", "sinh", "log")[int(rng.integers(4))]
    if kind == "power":
        p = float(rng.uniform(0.5, 3.0))
        return RegradeFamily(
            f"power(p={p:.4f})", lambda x: x**p, lambda y: y ** (1.0 / p), lambda x: p * x ** (p - 1.0)
        )
    a = float(rng.uniform(0.5, 3.0))
    if kind == "exp":
        return RegradeFamily(
            f"exp(a={a:.4f})", lambda x: np.expm1(a * x), lambda y: np.log1p(y) / a, lambda x: a * np.exp(a * x)
        )
    if kind == "sinh":
        return RegradeFamily(
            f"sinh(a={a:.4f})", lambda x: np.sinh(a * x), lambda y: np.arcsinh(y) / a, lambda x: a * np.cosh(a * x)
        )
    return RegradeFamily(
        f"log(a={a:.4f})", lambda x: np.log1p(a * x), lambda y: np.expm1(y) / a, lambda x: a / (1.0 + a * x)
    )
