"""Python bindings for the clockinterf C++ library."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, _run_json


def run(config: dict) -> dict:
    """Run one configured experiment (same keys as the CLI config file) and
    return its summary. Output files are written to ``config["out"]``."""
    return _json.loads(_run_json(_json.dumps(config)))
