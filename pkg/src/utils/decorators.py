"""
Timing decorator for long-running training and evaluation steps.
"""

import logging
import time
from functools import wraps
from typing import Any, Callable, Optional


def log_execution_time(logger_name: Optional[str] = None, level: int = logging.DEBUG):
    """
    Decorator that logs function execution time.

    Args:
        logger_name: Name of logger to use (defaults to the wrapped function's module)
        level: Level used for the success message
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            exec_logger = logging.getLogger(logger_name or func.__module__)

            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                execution_time = time.perf_counter() - start_time
                exec_logger.error(
                    f"{func.__name__} failed after {execution_time:.2f}s: {e}"
                )
                raise

            execution_time = time.perf_counter() - start_time
            exec_logger.log(level, f"{func.__name__} completed in {execution_time:.2f}s")
            return result

        return wrapper

    return decorator
