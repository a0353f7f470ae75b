"""
Structured logging for bridgelab
"""
import logging
import json
import sys
from datetime import datetime, timezone
from uuid import UUID

from .config import get_settings

EXTRA_FIELDS = [
    "run_id", "seed", "kind", "regularizer", "epoch", "batch", "layer",
    "train_loss", "val_error", "test_error", "count", "path",
]


class StructuredFormatter(logging.Formatter):
    """JSON formatter for structured logging"""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "service": getattr(record, "service", record.name),
            "message": record.getMessage(),
        }

        for key in EXTRA_FIELDS:
            if hasattr(record, key):
                value = getattr(record, key)
                if isinstance(value, UUID):
                    value = str(value)
                log_data[key] = value

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, default=str)


class _ServiceFilter(logging.Filter):
    """Stamp the service name on every record of a logger"""

    def __init__(self, service: str):
        super().__init__()
        self.service = service

    def filter(self, record: logging.LogRecord) -> bool:
        record.service = self.service
        return True


def get_logger(service: str) -> logging.Logger:
    """Get a logger for a service"""
    logger = logging.getLogger(f"bridgelab.{service}")

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(StructuredFormatter())
        logger.addHandler(handler)
        logger.addFilter(_ServiceFilter(service))
        logger.setLevel(get_settings().log_level.upper())
        logger.propagate = False

    return logger
