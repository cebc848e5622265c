from __future__ import annotations

import logging
import sys
from typing import List, Optional

import django
from django.conf import settings as django_settings
from django.core.exceptions import ImproperlyConfigured
from django.core.management import execute_from_command_line

from .exceptions import InvariantViolation

logger = logging.getLogger(__name__)

PROG = "gffperc"


def setup() -> None:
    """Configure Django with gffperc as its only app; django.setup() applies LOGGING."""
    if not django_settings.configured:
        # a malformed GFFPERC_* variable fails this import with ImproperlyConfigured
        from . import settings

        django_settings.configure(INSTALLED_APPS=["gffperc"], LOGGING=settings.LOGGING)
    django.setup()


def main(argv: Optional[List[str]] = None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        setup()
        execute_from_command_line([PROG, *args])
    except (ImproperlyConfigured, TypeError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except InvariantViolation as exc:
        logger.error("invariant violated: %s", exc)
        sys.stderr.write(f"invariant violated: {exc}\n")
        return 2
    except SystemExit as exc:
        # CommandError, unknown commands and --help leave through sys.exit
        if exc.code is None or isinstance(exc.code, int):
            return exc.code or 0
        sys.stderr.write(f"{exc.code}\n")
        return 1
    return 0
