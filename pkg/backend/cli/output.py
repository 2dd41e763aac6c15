"""
Result emission for the command-line front end.

JSON results are wrapped in a schema-stable envelope
{"command", "version", "config", "result"}; CSV results are the bare table.
Nothing time-dependent is written, so identical runs give identical bytes.
"""

import io
import json
import logging
import math
from typing import Any, Dict

import numpy as np
import pandas as pd

from src import __version__
from src.models.run_config import OutputFormat, RunConfig

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def _plain(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats to JSON-safe values."""
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def frame_records(frame: pd.DataFrame) -> list:
    return [{key: _plain(value) for key, value in row.items()} for row in frame.to_dict(orient='records')]


def envelope(command: str, run: RunConfig, frame: pd.DataFrame) -> Dict[str, Any]:
    return {
        'command': command,
        'version': __version__,
        'config': run.to_dict(),
        'result': frame_records(frame),
    }


def render(command: str, run: RunConfig, frame: pd.DataFrame) -> str:
    """Text written to stdout for one command result."""
    if run.output_format is OutputFormat.CSV:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
        return buffer.getvalue()
    return json.dumps(envelope(command, run, frame), indent=2, allow_nan=False) + '\n'


def render_error(error: Exception) -> str:
    return json.dumps({'error': error.__class__.__name__, 'message': str(error)}) + '\n'
