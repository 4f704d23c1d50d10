from contextlib import contextmanager
import logging

from django.core.management.base import CommandError
from pydantic import ValidationError

from autodiff.exceptions import CascadeError

logger = logging.getLogger(__name__)


@contextmanager
def command_errors():
    """Re-raise domain, validation and I/O failures as CommandError (non-zero exit)."""
    try:
        yield
    except ValidationError as exc:
        logger.warning(f"invalid configuration: {exc}")
        raise CommandError(f"invalid configuration: {exc}") from exc
    except CascadeError as exc:
        logger.warning(f"{type(exc).__name__}: {exc}")
        raise CommandError(str(exc)) from exc
    except OSError as exc:
        raise CommandError(f"{exc.strerror or exc}: {exc.filename}") from exc
