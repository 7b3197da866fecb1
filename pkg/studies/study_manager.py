from typing import Any, Dict, List, Mapping, Optional, Type

from datapanel.ingest import (
    read_characteristics_panel,
    read_factor_returns,
    read_goyal_welch,
    read_portfolio_returns,
    read_stock_returns,
)
from debug.logger import setup_logger, log_action
from pathgrid.study_config import StudyConfig
from studies.anomalies_study import AnomaliesStudy
from studies.base_study import BaseStudy
from studies.fmb_study import FmbStudy
from studies.premium_study import PremiumStudy
from utils.errors import IngestionError, SpecValidationError

# Data key a bare --data path is bound to
DEFAULT_DATA_KEYS = {"premium": "macro", "anomalies": "characteristics", "fmb": None}


def parse_data_arguments(values: Optional[List[str]], kind: str) -> Dict[str, str]:
    """Turn ``key=path`` (or a single bare path) arguments into a mapping."""
    mapping: Dict[str, str] = {}
    for value in values or []:
        key, sep, path = value.partition("=")
        if not sep:
            default = DEFAULT_DATA_KEYS.get(kind)
            if default is None:
                raise SpecValidationError(f"A {kind} study needs key=path data arguments, got '{value}'")
            key, path = default, value
        key, path = key.strip(), path.strip()
        if not key or not path:
            raise SpecValidationError(f"Malformed data argument '{value}'")
        if key in mapping:
            raise SpecValidationError(f"Data key '{key}' given twice")
        mapping[key] = path
    return mapping


class StudyManager:
    """Registry of study executors and their data loaders."""

    STUDIES: Dict[str, Type[BaseStudy]] = {
        "premium": PremiumStudy,
        "anomalies": AnomaliesStudy,
        "fmb": FmbStudy,
    }

    def __init__(self, debug_mode: bool = False):
        """Initialize the study manager

        Args:
            debug_mode: Whether executors log at DEBUG level
        """
        self.debug_mode = debug_mode
        self.logger = setup_logger("study_manager", debug_mode)

    def study_class(self, kind: str) -> Type[BaseStudy]:
        try:
            return self.STUDIES[kind]
        except KeyError:
            raise SpecValidationError(f"Unknown study kind '{kind}', expected one of {sorted(self.STUDIES)}") from None

    def load_data(self, config: StudyConfig, data_paths: Mapping[str, str]) -> Dict[str, Any]:
        """Read every data input of a study

        Args:
            config: Validated study config (its kind picks the readers)
            data_paths: Data key -> file path

        Returns:
            Data key -> loaded panel or table
        """
        if not data_paths:
            raise IngestionError(f"Study '{config.study_id}' was given no data files")
        settings = config.settings
        data: Dict[str, Any] = {}
        for key, path in sorted(data_paths.items()):
            log_action(self.logger, f"Loading {key}", str(path))
            if config.kind == "premium":
                if key == "macro":
                    data[key] = read_goyal_welch(path, date_column=settings.get("date_column", "yyyymm"))
                elif key.startswith("macro_"):
                    data[key] = read_goyal_welch(path, date_column=settings.get("date_column", "yyyymm"),
                                                 frequency=key[len("macro_"):])
                else:
                    raise IngestionError(f"Premium study does not use data key '{key}'")
            elif config.kind == "anomalies":
                if key != "characteristics":
                    raise IngestionError(f"Anomalies study does not use data key '{key}'")
                data[key] = read_characteristics_panel(path, settings.get("characteristics"))
            else:
                data[key] = self._load_fmb_table(key, path, settings)
            self.logger.debug(f"{key}: {getattr(data[key], 'shape', len(data[key]))}")
        return data

    def _load_fmb_table(self, key: str, path: str, settings: Mapping[str, Any]):
        percent = bool(settings.get("percent_returns", True))
        if key in ("factors", "factors_daily"):
            return read_factor_returns(path, percent=percent)
        if key.split("_")[0] == "stocks":
            return read_stock_returns(path, percent=bool(settings.get("stocks_percent", False)))
        return read_portfolio_returns(path, percent=percent)

    def create(self, config: StudyConfig, data: Dict[str, Any]) -> BaseStudy:
        study = self.study_class(config.kind)(config, data, debug_mode=self.debug_mode)
        log_action(self.logger, f"Created {config.kind} study {config.study_id}",
                   f"{study.spec.n_paths} nominal paths")
        return study
