import functools
import logging
import time

logger = logging.getLogger("lqm.decorators")
logger.addHandler(logging.NullHandler())


def record_time_usage(func):
    """Decorator that logs the wall-clock time of the function it wraps

    Args:
        func: the function being wrapped

    Returns:
        func
    """

    @functools.wraps(func)
    def timeit_wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        end_time = time.perf_counter()
        total_time = end_time - start_time
        logger.debug(f"Function {func.__name__} took {total_time:.4f} seconds")
        return result

    return timeit_wrapper
