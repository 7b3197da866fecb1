"""
Path outcomes and the queryable outcome collection of a study.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from pathgrid.grid import StudySpec
from utils.errors import SchemaError
from utils.fileio import atomic_write_csv

OUTCOME_COLUMNS = ["b", "se_iid", "se_hac", "se", "t", "aic", "n", "rss", "yvar", "k", "status"]
NUMERIC_COLUMNS = [c for c in OUTCOME_COLUMNS if c != "status"]
OUTCOMES_FILE = "outcomes.csv"
SERIES_FILE = "series.csv"


@dataclass
class PathOutcome:
    """What one path produced

    ``b``/``se``/``t`` are the focal effect, its standard error under the
    path's estimator and the resulting t-statistic. ``series`` optionally
    carries a per-date table (column name -> values, including "date").
    """

    path_index: int
    status: str = "ok"
    b: float = np.nan
    se_iid: float = np.nan
    se_hac: float = np.nan
    se: float = np.nan
    t: float = np.nan
    aic: float = np.nan
    n: float = np.nan
    rss: float = np.nan
    yvar: float = np.nan
    k: float = np.nan
    extra: Dict[str, float] = field(default_factory=dict)
    series: Optional[Dict[str, List[Any]]] = None

    @classmethod
    def failed(cls, path_index: int, status: str) -> "PathOutcome":
        return cls(path_index=path_index, status=status)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def record(self) -> Dict[str, Any]:
        row = {"path_index": self.path_index}
        for column in OUTCOME_COLUMNS:
            row[column] = getattr(self, column)
        row.update(self.extra)
        return row

    def to_payload(self) -> Dict[str, Any]:
        payload = self.record()
        payload["extra"] = dict(self.extra)
        payload["series"] = self.series
        return payload

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "PathOutcome":
        values = {column: payload.get(column, np.nan) for column in OUTCOME_COLUMNS}
        values = {k: (np.nan if v is None else v) for k, v in values.items()}
        return cls(path_index=int(payload["path_index"]), extra=dict(payload.get("extra") or {}),
                   series=payload.get("series"), **values)


class OutcomeSet:
    """Outcomes of a study, one row per executed path, queryable by layer option."""

    def __init__(self, spec: StudySpec, frame: pd.DataFrame, series: Optional[pd.DataFrame] = None,
                 metadata: Optional[Dict[str, Any]] = None):
        self.spec = spec
        self.frame = frame.sort_values("path_index", kind="stable").reset_index(drop=True)
        self.series = series
        self.metadata = dict(metadata or {})

    @classmethod
    def from_outcomes(cls, spec: StudySpec, outcomes: Iterable[PathOutcome],
                      metadata: Optional[Dict[str, Any]] = None) -> "OutcomeSet":
        outcomes = sorted(outcomes, key=lambda o: o.path_index)
        rows = []
        series_frames = []
        for outcome in outcomes:
            row = {"path_index": outcome.path_index}
            row.update(dict(zip(spec.names, spec.decode(outcome.path_index))))
            row.update(outcome.record())
            rows.append(row)
            if outcome.series:
                piece = pd.DataFrame(outcome.series)
                piece.insert(0, "path_index", outcome.path_index)
                series_frames.append(piece)
        columns = ["path_index"] + list(spec.names) + OUTCOME_COLUMNS
        frame = pd.DataFrame(rows)
        if frame.empty:
            frame = pd.DataFrame(columns=columns)
        extras = [c for c in frame.columns if c not in columns]
        frame = frame[columns + sorted(extras)]
        series = pd.concat(series_frames, ignore_index=True) if series_frames else None
        return cls(spec, frame, series, metadata)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def layer_names(self) -> List[str]:
        return list(self.spec.names)

    def ok(self) -> "OutcomeSet":
        keep = self.frame["status"] == "ok"
        return self._subset(keep)

    def where(self, **choices: str) -> "OutcomeSet":
        keep = pd.Series(True, index=self.frame.index)
        for layer, option in choices.items():
            if layer not in self.frame.columns:
                raise SchemaError(f"Outcome table has no layer column '{layer}'")
            keep &= self.frame[layer] == option
        return self._subset(keep)

    def _subset(self, keep: pd.Series) -> "OutcomeSet":
        frame = self.frame[keep.to_numpy()]
        series = None
        if self.series is not None:
            series = self.series[self.series["path_index"].isin(frame["path_index"])]
        return OutcomeSet(self.spec, frame, series, self.metadata)

    def values(self, column: str) -> np.ndarray:
        if column not in self.frame.columns:
            raise SchemaError(f"Outcome table has no column '{column}'")
        return self.frame[column].to_numpy(dtype=float)

    def status_tally(self) -> Dict[str, int]:
        return {str(k): int(v) for k, v in self.frame["status"].value_counts().sort_index().items()}

    def to_csv(self, directory: Union[str, Path]) -> Dict[str, str]:
        directory = Path(directory)
        written = {"outcomes": str(directory / OUTCOMES_FILE)}
        atomic_write_csv(directory / OUTCOMES_FILE, self.frame)
        if self.series is not None and not self.series.empty:
            atomic_write_csv(directory / SERIES_FILE, self.series)
            written["series"] = str(directory / SERIES_FILE)
        return written

    @classmethod
    def read_csv(cls, path: Union[str, Path], spec: StudySpec) -> "OutcomeSet":
        """Load ``outcomes.csv`` (a directory or the file itself) and its series file if present."""
        path = Path(path)
        directory = path if path.is_dir() else path.parent
        outcome_file = directory / OUTCOMES_FILE if path.is_dir() else path
        if not outcome_file.exists():
            raise SchemaError(f"Outcome file not found: {outcome_file}")
        # Option ids stay text ("0" must not come back as 0.0)
        frame = pd.read_csv(outcome_file, keep_default_na=False, na_values=["", "nan", "NaN"],
                            dtype={name: str for name in spec.names})
        required = ["path_index"] + list(spec.names) + OUTCOME_COLUMNS
        missing = [c for c in required if c not in frame.columns]
        if missing:
            raise SchemaError(f"{outcome_file}: missing required column(s) {missing}")
        series = None
        if (directory / SERIES_FILE).exists():
            series = pd.read_csv(directory / SERIES_FILE)
        return cls(spec, frame, series)
