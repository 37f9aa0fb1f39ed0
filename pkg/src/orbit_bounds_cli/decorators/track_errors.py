"""
Error tracking decorator for CLI command handlers.

Handlers take the parsed ``argparse.Namespace`` and return an exit code.
Domain errors become their exit codes with a one-line message on stderr;
anything else is reported to Rollbar (or logged when no token is set) and
re-raised.

Usage::

    @track_errors()
    def cmd_tau(args: argparse.Namespace) -> int:
        ...
"""

import functools
import logging
import sys
from collections.abc import Callable

from common.rollbar_config import report_error_to_rollbar

from orbit_bounds.errors import OrbitBoundsError

logger = logging.getLogger(__name__)


def track_errors(command_name: str | None = None, log_params: bool = True):
    """
    Decorator mapping domain errors to exit codes and reporting the rest.

    Args:
        command_name: Label for logs and Rollbar reports. Defaults to the
            decorated function's ``__name__``.
        log_params: Whether to attach the parsed arguments to Rollbar reports.

    Returns:
        Callable: The decorated handler.
    """

    def decorator(func: Callable[..., int]) -> Callable[..., int]:
        name = command_name or func.__name__

        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                return func(*args, **kwargs)
            except OrbitBoundsError as e:
                logger.warning("'%s' failed: %s: %s", name, type(e).__name__, e)
                print(f"error: {e}", file=sys.stderr)
                return e.exit_code
            except Exception as e:
                reported = report_error_to_rollbar(
                    e,
                    extra_data={
                        "command": name,
                        "error_type": type(e).__name__,
                        "params": _extract_params(args, kwargs, log_params),
                    },
                )
                if reported:
                    logger.info("Reported error in '%s' to Rollbar.", name)
                else:
                    logger.error("'%s' raised an unhandled error: %s", name, e)
                raise

        return wrapper

    return decorator


def _extract_params(args: tuple, kwargs: dict, log_params: bool) -> dict:
    """
    Parsed CLI arguments as short strings for Rollbar payloads.

    Namespaces are expanded to their attributes; values are truncated at 200
    characters.
    """
    if not log_params:
        return {"params_logging": "disabled"}

    values = dict(kwargs)
    for arg in args:
        if hasattr(arg, "__dict__"):
            values.update(vars(arg))
    params = {}
    for key, value in values.items():
        if callable(value):
            continue
        params[key] = str(value)[:200]
    return params
