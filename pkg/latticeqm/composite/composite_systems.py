import logging
from functools import reduce
from pathlib import Path

import numpy as np
from attrs import field, frozen

from latticeqm.amplitudes.amplitude_engine import Amplitude, amplitude
from latticeqm.config import NORMALIZATION_TOLERANCE, PRODUCT_STATE_LIMIT
from latticeqm.errors import InvalidInputError, NotCombinableError, size_guard_check
from latticeqm.io_utils import key_check, read_json
from latticeqm.lattice.lattice_core import Kernel
from latticeqm.lattice.lattice_loaders import kernel_from_dict, load_kernel
from latticeqm.setups.setup_algebra import and_compose, or_compose, validate
from latticeqm.setups.setup_loaders import setup_from_dict

logger = logging.getLogger("lqm.composite_systems")
logger.addHandler(logging.NullHandler())


def _parts(values):
    return tuple((setup, kernel) for setup, kernel in values)


@frozen(eq=False)
class CompositeSetup:
    """Independent particles, one (Setup, Kernel) part each, on a shared time axis"""

    parts: tuple = field(converter=_parts)

    @parts.validator
    def _check_parts(self, attribute, value):
        if not value:
            raise InvalidInputError("a composite setup needs at least one part")
        for setup, kernel in value:
            validate(setup, kernel.size)


def _same_kernel(k1: Kernel, k2: Kernel):
    return k1 is k2 or (k1.size == k2.size and np.array_equal(k1.step, k2.step))


def composite_amplitude(c: CompositeSetup) -> Amplitude:
    """psi({a; b; ...}) = psi(a) psi(b) ..."""
    return reduce(lambda x, y: x * y, (amplitude(setup, kernel) for setup, kernel in c.parts))


def composite_or(c1: CompositeSetup, c2: CompositeSetup) -> CompositeSetup:
    """{a1; b} v {a2; b} = {a1 v a2; b}: composites equal in every part but one, which must be or-combinable"""
    if len(c1.parts) != len(c2.parts):
        raise NotCombinableError("composites have different numbers of parts")
    differing = []
    for i, ((s1, k1), (s2, k2)) in enumerate(zip(c1.parts, c2.parts)):
        if not _same_kernel(k1, k2):
            raise NotCombinableError(f"part {i} uses different kernels")
        if s1 != s2:
            differing.append(i)
    if len(differing) != 1:
        raise NotCombinableError(f"composites must differ in exactly one part, found {len(differing)}")
    i = differing[0]
    parts = list(c1.parts)
    parts[i] = (or_compose(c1.parts[i][0], c2.parts[i][0]), c1.parts[i][1])
    return CompositeSetup(parts)


def composite_and(earlier: CompositeSetup, later: CompositeSetup) -> CompositeSetup:
    """{a1; b1}{a2; b2} = {a1 a2; b1 b2}: partwise and-composition"""
    if len(earlier.parts) != len(later.parts):
        raise NotCombinableError("composites have different numbers of parts")
    parts = []
    for i, ((s1, k1), (s2, k2)) in enumerate(zip(earlier.parts, later.parts)):
        if not _same_kernel(k1, k2):
            raise NotCombinableError(f"part {i} uses different kernels")
        parts.append((and_compose(s1, s2), k1))
    return CompositeSetup(parts)


def product_state(psis) -> np.ndarray:
    """N-particle product wave function, coefficient at (x1, ..., xN) = prod Psi_alpha(x_alpha)

    Args:
        psis (list): normalized WaveFunctions, one per particle.

    Returns:
        np.ndarray: tensor of shape (L1, ..., LN).

    Raises:
        SizeGuardError: If the total dimension exceeds PRODUCT_STATE_LIMIT.
    """
    if not psis:
        raise InvalidInputError("product_state needs at least one wave function")
    for psi in psis:
        if not psi.normalized:
            raise InvalidInputError("product_state needs wave functions flagged normalized")
    size_guard_check(int(np.prod([psi.size for psi in psis], dtype=float)), PRODUCT_STATE_LIMIT, "product state")
    state = reduce(np.multiply.outer, [psi.coeffs for psi in psis])
    norm = float(np.vdot(state, state).real)
    if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
        logger.warning(f"product_state: norm {norm!r} drifted from 1")
    return state


def composite_from_dict(obj, base_dir=".") -> CompositeSetup:
    """Build a composite from {"parts": [{"setup": {...}, "kernel_ref": path} or {"setup", "kernel"}, ...]}"""
    parts = []
    kernels = {}
    for i, part in enumerate(key_check(obj, "parts", "composite setup")):
        setup = setup_from_dict(key_check(part, "setup", f"part {i}"))
        if "kernel" in part:
            kernel = kernel_from_dict(part["kernel"])
        else:
            ref = str(key_check(part, "kernel_ref", f"part {i}"))
            if ref not in kernels:
                kernels[ref] = load_kernel(Path(base_dir) / ref)
            kernel = kernels[ref]
        parts.append((setup, kernel))
    return CompositeSetup(parts)


def load_composite(path) -> CompositeSetup:
    path = Path(path)
    return composite_from_dict(read_json(path), base_dir=path.parent)

