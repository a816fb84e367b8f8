"""Console logging for the CLI: status markers on stderr."""

from __future__ import annotations

import logging
import sys

_MARKERS = {
    logging.DEBUG: "[-]",
    logging.INFO: "[*]",
    logging.WARNING: "[!]",
    logging.ERROR: "[!]",
    logging.CRITICAL: "[!]",
}


class MarkerFormatter(logging.Formatter):
    """Prefix messages with ``[*]`` (info), ``[!]`` (warning and above) or ``[-]`` (debug)."""

    def format(self, record: logging.LogRecord) -> str:
        marker = _MARKERS.get(record.levelno, "[*]")
        return f"{marker} {super().format(record)}"


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(MarkerFormatter("%(message)s"))
    root = logging.getLogger("shiftscan")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False
