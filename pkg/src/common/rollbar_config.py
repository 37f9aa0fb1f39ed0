import logging
import os
from typing import Any

import rollbar

logger = logging.getLogger(__name__)


def rollbar_token() -> str | None:
    return os.getenv("ROLLBAR_SERVER_TOKEN")


def initialize_rollbar() -> bool:
    """Initialize Rollbar globally, safe to call multiple times."""
    token = rollbar_token()
    if not token:
        logger.debug("Rollbar not initialized: ROLLBAR_SERVER_TOKEN not set")
        return False

    rollbar.init(
        access_token=token,
        code_version=os.getenv("CODE_VERSION", "0.1.0"),
        enabled=True,
        environment=os.getenv("ENVIRONMENT", "development"),
    )

    logger.info("Rollbar initialized")
    return True


def report_error_to_rollbar(
    exc: BaseException | None = None,
    level: str = "error",
    extra_data: dict[str, Any] | None = None,
) -> bool:
    """
    Report an exception to Rollbar when a token is configured.

    Args:
        exc: Exception to report. Defaults to the exception being handled.
        level: Rollbar level ("error", "warning", "info", "critical").
        extra_data: Additional metadata attached to the item.

    Returns:
        bool: Whether a report was sent.
    """
    if not rollbar_token():
        return False
    try:
        if exc is not None:
            rollbar.report_exc_info(
                (type(exc), exc, exc.__traceback__), extra_data=extra_data, level=level
            )
        else:
            rollbar.report_exc_info(extra_data=extra_data, level=level)
    except Exception as e:
        logger.warning("Rollbar reporting failed: %s", e)
        return False
    return True
