import logging

import numpy as np

from latticeqm.errors import DimensionMismatchError, InvalidInputError, integer_check
from latticeqm.io_utils import array_to_complex_pairs, complex_pairs_to_array, key_check, read_json
from latticeqm.lattice.lattice_core import Kernel, WaveFunction

logger = logging.getLogger("lqm.lattice_loaders")
logger.addHandler(logging.NullHandler())


def kernel_from_dict(obj) -> Kernel:
    """Build a Kernel from its JSON form

    Args:
        obj (dict): {"L": int, "entries": [[re, im], ...] row-major L*L, "label": str}

    Returns:
        Kernel: validated kernel.

    Raises:
        DimensionMismatchError: If the entry count is not L*L.
        NonFiniteError: If any entry is NaN or infinite.
    """
    num_sites = key_check(obj, "L", "kernel")
    if isinstance(num_sites, bool) or not isinstance(num_sites, int) or num_sites < 1:
        raise InvalidInputError(f"kernel L must be a positive integer, got {num_sites!r}")
    entries = complex_pairs_to_array(key_check(obj, "entries", "kernel"), "kernel entries")
    if entries.shape[0] != num_sites * num_sites:
        raise DimensionMismatchError(f"kernel has {entries.shape[0]} entries, expected {num_sites * num_sites}")
    return Kernel(entries.reshape(num_sites, num_sites), label=str(obj.get("label", "kernel")))


def kernel_to_dict(kernel: Kernel):
    return {"L": kernel.size, "entries": array_to_complex_pairs(kernel.step), "label": kernel.label}


def load_kernel(path) -> Kernel:
    """Load a kernel JSON file

    Example:
        `k = latticeqm.lattice.load_kernel("kernel.json")`
    """
    kernel = kernel_from_dict(read_json(path))
    logger.debug(f"loaded kernel '{kernel.label}' with L={kernel.size} from {path}")
    return kernel


def wave_function_from_list(pairs, time=0, normalized=False) -> WaveFunction:
    return WaveFunction(complex_pairs_to_array(pairs, "wave function"), time=time, normalized=normalized)


def wave_function_to_list(psi: WaveFunction):
    return array_to_complex_pairs(psi.coeffs)


def load_wave_function(path, time=0) -> WaveFunction:
    """Load a wave function stored as a JSON list of [re, im] pairs, or {"coeffs": [...], "time": int}"""
    obj = read_json(path)
    if isinstance(obj, dict):
        coeffs = key_check(obj, "coeffs", "wave function")
        return wave_function_from_list(coeffs, time=integer_check(obj.get("time", time), "wave function time"))
    psi = wave_function_from_list(obj, time=time)
    logger.debug(f"loaded wave function with L={psi.size}, norm_sq={float(np.vdot(psi.coeffs, psi.coeffs).real)}")
    return psi
