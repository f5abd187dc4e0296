import logging

import numpy as np
import polars as pl
from attrs import field, frozen

from latticeqm.config import UNITARY_TOLERANCE
from latticeqm.errors import DimensionMismatchError, InvalidInputError, dimension_check, finite_check
from latticeqm.io_utils import frame_output
from latticeqm.lattice.lattice_core import Kernel, WaveFunction, hole_mask

logger = logging.getLogger("lqm.evolution")
logger.addHandler(logging.NullHandler())


def _matrix(values):
    arr = np.array(values, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@frozen(eq=False)
class Hamiltonian:
    """Time-independent generator H; `residual` holds max |H - H_ref| when a reference was supplied"""

    matrix: np.ndarray = field(converter=_matrix)
    hermitian_flag: bool = field(default=False)
    residual: float = field(default=None)

    @matrix.validator
    def _check_matrix(self, attribute, value):
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise DimensionMismatchError(f"Hamiltonian must be square, got shape {value.shape}")
        finite_check(value, "Hamiltonian")

    @hermitian_flag.validator
    def _check_hermitian(self, attribute, value):
        if value and self.hermiticity_error() > UNITARY_TOLERANCE:
            raise InvalidInputError(f"Hamiltonian flagged Hermitian has |H - H^+| = {self.hermiticity_error():.2e}")

    def hermiticity_error(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _check_dimensions(psi: WaveFunction, k: Kernel):
    dimension_check(psi.size, k.size, "wave function")


def _check_steps(steps):
    if steps < 0:
        raise InvalidInputError(f"steps must be non-negative, got {steps}")


def evolve(psi: WaveFunction, k: Kernel, steps: int) -> WaveFunction:
    """Psi(t + steps) = K^steps Psi(t)

    Args:
        psi (WaveFunction): state at time t.
        k (Kernel): single-step kernel of matching size.
        steps (int): non-negative number of steps.

    Returns:
        WaveFunction: state at time t + steps.
    """
    _check_dimensions(psi, k)
    _check_steps(steps)
    coeffs = np.linalg.matrix_power(k.step, steps) @ psi.coeffs
    return WaveFunction(coeffs, time=psi.time + steps)


def evolve_through_filters(psi: WaveFunction, k: Kernel, steps: int, filters=()) -> WaveFunction:
    """Evolve step by step, applying each filter's hole mask when its time is reached

    Only filters with psi.time < time <= psi.time + steps act on the state; the rest are skipped.
    """
    _check_dimensions(psi, k)
    _check_steps(steps)
    masks = {f.time: hole_mask(k.size, f.holes) for f in filters}
    skipped = sorted(t for t in masks if not psi.time < t <= psi.time + steps)
    if skipped:
        logger.debug(f"evolve_through_filters: filters at {skipped} outside ({psi.time}, {psi.time + steps}]")
    coeffs = np.array(psi.coeffs)
    for t in range(psi.time + 1, psi.time + steps + 1):
        coeffs = k.step @ coeffs
        if t in masks:
            coeffs = masks[t] * coeffs
    return WaveFunction(coeffs, time=psi.time + steps)


def generator_from_kernel(k: Kernel, dt: float, hbar: float = 1.0, reference: Hamiltonian = None) -> Hamiltonian:
    """Forward-difference generator H = i hbar (K - I) / dt

    For K = exp(-i H0 dt / hbar) the estimate differs from H0 by O(dt); pass H0 as `reference` to have
    the max-norm difference stored on the result.
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    matrix = 1j * hbar * (k.step - np.eye(k.size)) / dt
    residual = None
    if reference is not None:
        dimension_check(reference.matrix.shape, matrix.shape, "reference Hamiltonian")
        residual = float(np.max(np.abs(matrix - reference.matrix)))
        logger.info(f"generator_from_kernel: |H - H_ref|_max = {residual:.3e} at dt={dt}")
    ham = Hamiltonian(matrix, residual=residual)
    logger.debug(f"generator_from_kernel: hermiticity error {ham.hermiticity_error():.3e}")
    return ham


def schrodinger_residual(psi: WaveFunction, H: Hamiltonian, k: Kernel, dt: float, hbar: float = 1.0) -> float:
    """max | i hbar (K Psi - Psi) / dt - H Psi |, the discrete Schrodinger residual"""
    _check_dimensions(psi, k)
    dimension_check(H.matrix.shape[0], psi.size, "Hamiltonian")
    stepped = evolve(psi, k, 1).coeffs
    lhs = 1j * hbar * (stepped - psi.coeffs) / dt
    return float(np.max(np.abs(lhs - H.matrix @ psi.coeffs)))


def linearity_check(
    k: Kernel, psi1: WaveFunction, psi2: WaveFunction, alpha: complex, beta: complex, steps: int = 1
) -> float:
    """max | evolve(a Psi1 + b Psi2) - (a evolve(Psi1) + b evolve(Psi2)) |"""
    dimension_check(psi2.size, psi1.size, "second wave function")
    combined = WaveFunction(alpha * psi1.coeffs + beta * psi2.coeffs, time=psi1.time)
    lhs = evolve(combined, k, steps).coeffs
    rhs = alpha * evolve(psi1, k, steps).coeffs + beta * evolve(psi2, k, steps).coeffs
    return float(np.max(np.abs(lhs - rhs)))


def evolution_table(psi: WaveFunction, k: Kernel, steps: int, return_as_pandas=False) -> pl.DataFrame:
    """Time series of the wave function, one row per (step, site)

    Returns:
        pl.DataFrame: columns step, site, re, im, prob for steps 0..steps.
    """
    _check_dimensions(psi, k)
    _check_steps(steps)
    rows = {"step": [], "site": [], "re": [], "im": [], "prob": []}
    current = psi
    for step in range(steps + 1):
        if step:
            current = evolve(current, k, 1)
        for site, z in enumerate(current.coeffs):
            rows["step"].append(step)
            rows["site"].append(site)
            rows["re"].append(float(z.real))
            rows["im"].append(float(z.imag))
            rows["prob"].append(float(abs(z) ** 2))
    return frame_output(pl.DataFrame(rows), return_as_pandas)
