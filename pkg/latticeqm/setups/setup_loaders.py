import logging

from latticeqm.errors import InvalidInputError, integer_check
from latticeqm.io_utils import key_check, read_json
from latticeqm.lattice.lattice_core import Event
from latticeqm.setups.setup_algebra import FilterSpec, Setup

logger = logging.getLogger("lqm.setup_loaders")
logger.addHandler(logging.NullHandler())


def _event_from_dict(obj, name):
    site = integer_check(key_check(obj, "site", name), f"{name} site")
    time = integer_check(key_check(obj, "time", name), f"{name} time")
    return Event(site, time)


def setup_from_dict(obj) -> Setup:
    """Build a Setup from its JSON form

    Args:
        obj (dict): {"source": {"site", "time"}, "detector": {...}, "filters": [{"time", "holes"}, ...]}

    Returns:
        Setup: normalized setup (filters time-sorted, holes sorted and de-duplicated).
    """
    filters = []
    specs = obj.get("filters", []) if isinstance(obj, dict) else []
    if not isinstance(specs, list):
        raise InvalidInputError("setup filters must be a list")
    for i, f in enumerate(specs):
        holes = key_check(f, "holes", f"filter {i}")
        if not isinstance(holes, list):
            raise InvalidInputError(f"filter {i} holes must be a list")
        blocking = f.get("blocking", False)
        if not isinstance(blocking, bool):
            raise InvalidInputError(f"filter {i} blocking must be true or false, got {blocking!r}")
        filters.append(FilterSpec(key_check(f, "time", f"filter {i}"), holes, blocking=blocking))
    return Setup(
        _event_from_dict(key_check(obj, "source", "setup"), "source"),
        _event_from_dict(key_check(obj, "detector", "setup"), "detector"),
        tuple(filters),
    )


def setup_to_dict(setup: Setup):
    out = {
        "source": {"site": setup.source.site, "time": setup.source.time},
        "detector": {"site": setup.detector.site, "time": setup.detector.time},
        "filters": [],
    }
    for f in setup.filters:
        entry = {"time": f.time, "holes": list(f.holes)}
        if f.blocking:
            entry["blocking"] = True
        out["filters"].append(entry)
    return out


def load_setup(path) -> Setup:
    """Load a setup JSON file

    Example:
        `a = latticeqm.setups.load_setup("two_slit.json")`
    """
    setup = setup_from_dict(read_json(path))
    logger.debug(f"loaded setup with {len(setup.filters)} filters from {path}")
    return setup
