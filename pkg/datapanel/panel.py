"""
Time-indexed tables of named numeric series with explicit missingness.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from utils.errors import DomainError

FREQUENCIES = {"daily": None, "monthly": 1, "quarterly": 3, "annual": 12}


@dataclass(frozen=True)
class TransformReport:
    name: str
    cells_modified: int
    parameters: Dict[str, Any] = field(default_factory=dict)


class DataPanel:
    """Rectangular table indexed by strictly increasing dates

    Missing cells are NaN. The panel never exposes its frame for mutation:
    accessors return copies and transforms return new panels.
    """

    def __init__(self, frame: pd.DataFrame, frequency: str = "monthly"):
        if frequency not in FREQUENCIES:
            raise DomainError(f"Unknown frequency '{frequency}', expected one of {sorted(FREQUENCIES)}")
        index = pd.DatetimeIndex(frame.index)
        if len(index) > 1 and not (np.diff(index.asi8) > 0).all():
            raise DomainError("Panel dates must be strictly increasing")
        data = frame.copy()
        data.index = index
        data.index.name = "date"
        self._frame = data.astype(float)
        self.frequency = frequency

    @classmethod
    def from_columns(cls, dates: Sequence, columns: Dict[str, Iterable[float]], frequency: str = "monthly") -> "DataPanel":
        frame = pd.DataFrame({name: np.asarray(list(values), dtype=float) for name, values in columns.items()},
                             index=pd.DatetimeIndex(dates))
        return cls(frame, frequency)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self._frame.index.copy()

    @property
    def columns(self) -> List[str]:
        return list(self._frame.columns)

    @property
    def periods_per_month(self) -> Optional[int]:
        return FREQUENCIES[self.frequency]

    def __len__(self) -> int:
        return len(self._frame)

    def __contains__(self, column: str) -> bool:
        return column in self._frame.columns

    def require(self, columns: Iterable[str]) -> None:
        missing = [c for c in columns if c not in self._frame.columns]
        if missing:
            raise KeyError(f"Unknown column(s): {missing}")

    def column(self, name: str) -> np.ndarray:
        self.require([name])
        return self._frame[name].to_numpy(copy=True)

    def to_frame(self) -> pd.DataFrame:
        return self._frame.copy()

    def missing_mask(self, columns: Optional[Iterable[str]] = None) -> pd.DataFrame:
        frame = self._frame if columns is None else self._frame[list(columns)]
        return frame.isna()

    def select(self, columns: Iterable[str]) -> "DataPanel":
        columns = list(columns)
        self.require(columns)
        return DataPanel(self._frame[columns], self.frequency)

    def with_column(self, name: str, values: Iterable[float]) -> "DataPanel":
        frame = self._frame.copy()
        frame[name] = np.asarray(list(values), dtype=float)
        return DataPanel(frame, self.frequency)

    def take_rows(self, positions: Sequence[int]) -> "DataPanel":
        return DataPanel(self._frame.iloc[list(positions)], self.frequency)

    def window(self, start: int, end: int) -> "DataPanel":
        """Rows in the half-open positional window [start, end)."""
        return DataPanel(self._frame.iloc[start:end], self.frequency)

    def trim_leading_missing(self, column: str) -> "DataPanel":
        """Drop rows before the first present value of ``column``."""
        values = self.column(column)
        present = np.flatnonzero(~np.isnan(values))
        if present.size == 0:
            return DataPanel(self._frame.iloc[0:0], self.frequency)
        return DataPanel(self._frame.iloc[present[0]:], self.frequency)

    def __repr__(self) -> str:
        return f"DataPanel(rows={len(self)}, columns={self.columns}, frequency='{self.frequency}')"
