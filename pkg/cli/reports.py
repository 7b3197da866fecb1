"""
Report writers. Every JSON report carries the engine version and the
config hash of the run it was computed from.
"""

import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np
import pandas as pd

from utils import __version__
from utils.fileio import atomic_write_csv, atomic_write_json


def provenance(config_hash: Optional[str], study_id: Optional[str] = None, **fields: Any) -> Dict[str, Any]:
    payload = {"engine_version": __version__, "config_hash": config_hash}
    if study_id is not None:
        payload["study_id"] = study_id
    payload.update(fields)
    return payload


def to_jsonable(value: Any) -> Any:
    """Plain JSON values; non-finite floats become null."""
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (pd.Timestamp,)):
        return value.isoformat()
    return value


class ReportWriter:
    """Writes JSON and CSV reports into one directory and remembers what it wrote."""

    def __init__(self, directory: Union[str, Path], header: Dict[str, Any]):
        self.directory = Path(directory)
        self.header = dict(header)
        self.written: Dict[str, str] = {}

    def json(self, name: str, payload: Mapping[str, Any]) -> str:
        path = self.directory / f"{name}.json"
        body = dict(self.header)
        body.update(payload)
        atomic_write_json(path, to_jsonable(body))
        self.written[name] = str(path)
        return str(path)

    def csv(self, name: str, frame: pd.DataFrame) -> str:
        path = self.directory / f"{name}.csv"
        atomic_write_csv(path, frame)
        self.written[name] = str(path)
        return str(path)
