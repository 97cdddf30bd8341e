"""Shared rich console (stderr) and logging setup. Stdout is reserved for results."""

import logging

from rich.console import Console
from rich.logging import RichHandler

console = Console(stderr=True)


def setup_logging(level="WARNING"):
    handler = RichHandler(console=console, show_path=False, rich_tracebacks=True)
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)
    return logging.getLogger("locsplit")
