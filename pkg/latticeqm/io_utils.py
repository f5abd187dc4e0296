import json
import logging
from pathlib import Path

import numpy as np
import polars as pl

from latticeqm.config import CSV_FORMAT, JSON_FORMAT
from latticeqm.errors import InvalidInputError, finite_check

logger = logging.getLogger("lqm.io_utils")
logger.addHandler(logging.NullHandler())


def read_json(path):
    """Read a JSON document from disk, raising InvalidInputError on a missing or malformed file"""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as json_file:
            return json.load(json_file)
    except FileNotFoundError as e:
        raise InvalidInputError(f"Input file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"Malformed JSON in {path}: {e}") from e


def key_check(obj, key, name="document"):
    if not isinstance(obj, dict):
        raise InvalidInputError(f"{name} must be a JSON object, got {type(obj).__name__}")
    if key not in obj.keys():
        raise InvalidInputError(f"{name} is missing required key '{key}'")
    return obj[key]


def complex_pairs_to_array(pairs, name="entries"):
    """Convert a list of [re, im] pairs into a complex numpy vector

    Args:
        pairs (list): sequence of two-element [re, im] lists.
        name (str): label used in error messages.

    Returns:
        np.ndarray: complex128 vector.
    """
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"{name} must be a list of [re, im] pairs") from e
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError(f"{name} must be a list of [re, im] pairs, got shape {arr.shape}")
    finite_check(arr, name)
    return arr[:, 0] + 1j * arr[:, 1]


def array_to_complex_pairs(values):
    values = np.asarray(values, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in values]


def frame_output(df: pl.DataFrame, return_as_pandas=False):
    return df.to_pandas(use_pyarrow_extension_array=True) if return_as_pandas else df


def frame_to_text(df: pl.DataFrame, fmt=CSV_FORMAT) -> str:
    if fmt == JSON_FORMAT:
        return json.dumps(df.to_dicts(), indent=2)
    return df.write_csv()


def write_text(path, text):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.debug(f"wrote {len(text)} characters to {path}")
    return path


def write_json(path, obj):
    return write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
