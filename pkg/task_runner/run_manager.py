import os
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

from debug.logger import setup_logger, log_action
from pathgrid.grid import StudySpec
from pathgrid.study_config import StudyConfig, load_study_config, spec_from_dict, spec_to_dict
from studies.outcomes import OutcomeSet, PathOutcome
from studies.study_manager import StudyManager
from task_runner.path_cache import PathCache
from utils import __version__
from utils.errors import IngestionError, SchemaError
from utils.fileio import atomic_write_json, sha256_file, sha256_json

MANIFEST_FILE = "manifest.json"
DEFAULT_CACHE_DIR = os.path.join(os.path.expanduser("~"), ".cache", "forkpaths")

logger = setup_logger("task_runner")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def config_hash(config: StudyConfig) -> str:
    """Digest of the validated config, insensitive to JSON formatting."""
    return sha256_json(config.model_dump(mode="json"))


def data_hash(data_paths: Mapping[str, str]) -> str:
    """Digest over (key, file digest) pairs in key order."""
    digests = {}
    for key, path in sorted(data_paths.items()):
        if not os.path.exists(path):
            raise IngestionError(f"Data file not found: {path}")
        digests[key] = sha256_file(path)
    return sha256_json(digests)


@dataclass
class RunManifest:
    """Provenance and status summary of one study run."""

    study_id: str
    kind: str
    config_hash: str
    data_hash: str
    engine_version: str
    seed: int
    status_tally: Dict[str, int] = field(default_factory=dict)
    n_nominal: int = 0
    n_feasible: int = 0
    n_executed: int = 0
    n_cached: int = 0
    started_at: str = ""
    finished_at: str = ""
    data_files: Dict[str, str] = field(default_factory=dict)
    default_path: Optional[Dict[str, str]] = None
    layout: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "RunManifest":
        known = {name: payload[name] for name in cls.__dataclass_fields__ if name in payload}
        missing = [name for name in ("study_id", "kind", "config_hash", "data_hash", "engine_version", "seed")
                   if name not in known]
        if missing:
            raise SchemaError(f"Manifest misses field(s) {missing}")
        return cls(**known)

    def write(self, directory: Union[str, Path]) -> str:
        path = Path(directory) / MANIFEST_FILE
        atomic_write_json(path, self.to_dict())
        return str(path)

    @classmethod
    def read(cls, directory: Union[str, Path]) -> "RunManifest":
        path = Path(directory)
        if path.is_dir():
            path = path / MANIFEST_FILE
        if not path.exists():
            raise SchemaError(f"Manifest not found: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e

    @property
    def spec(self) -> StudySpec:
        if not self.layout:
            raise SchemaError("Manifest carries no study layout")
        return spec_from_dict(self.layout)

    @property
    def n_failed(self) -> int:
        return sum(count for status, count in self.status_tally.items() if status != "ok")


def load_outcomes(directory: Union[str, Path]) -> Tuple[OutcomeSet, RunManifest]:
    """Outcome files of a finished run together with its manifest."""
    manifest = RunManifest.read(directory)
    outcomes = OutcomeSet.read_csv(directory, manifest.spec)
    outcomes.metadata.update(study_id=manifest.study_id, kind=manifest.kind, config_hash=manifest.config_hash,
                             default_path=manifest.default_path)
    return outcomes, manifest


class RunManager:
    """Runs one study config over its data with caching, resume and atomic outputs."""

    def __init__(self, config_path: Union[str, Path], data_paths: Mapping[str, str], out_dir: Union[str, Path],
                 cache_dir: Optional[Union[str, Path]] = None, seed: int = 0, n_jobs: int = 1,
                 debug_mode: bool = False):
        """Initialize the run manager

        Args:
            config_path: Study config JSON file
            data_paths: Data key -> file path
            out_dir: Directory receiving outcomes.csv, series.csv and manifest.json
            cache_dir: Root of the per-path cache (FORKPATHS_CACHE_DIR or ~/.cache/forkpaths)
            seed: Run seed recorded in the manifest and the cache key
            n_jobs: Worker processes
            debug_mode: Log at DEBUG level
        """
        self.config_path = Path(config_path)
        self.data_paths = dict(data_paths)
        self.out_dir = Path(out_dir)
        self.cache_dir = Path(cache_dir or os.environ.get("FORKPATHS_CACHE_DIR", DEFAULT_CACHE_DIR))
        self.seed = int(seed)
        self.n_jobs = int(n_jobs)
        self.debug_mode = debug_mode
        self.config = load_study_config(self.config_path)
        self.manager = StudyManager(debug_mode=debug_mode)

    def execute(self, resume: bool = False,
                progress_callback: Optional[Callable[[float], None]] = None) -> Tuple[OutcomeSet, RunManifest]:
        """Execute every feasible path and write the outcome files

        Args:
            resume: Reuse cached path outcomes instead of executing them again
            progress_callback: Optional callback receiving progress in percent

        Returns:
            (OutcomeSet, RunManifest)
        """
        started = _now()
        c_hash = config_hash(self.config)
        d_hash = data_hash(self.data_paths)
        log_action(logger, f"Starting study {self.config.study_id}",
                   f"config {c_hash[:12]}, data {d_hash[:12]}, jobs={self.n_jobs}, resume={resume}")

        data = self.manager.load_data(self.config, self.data_paths)
        study = self.manager.create(self.config, data)
        cache = PathCache(self.cache_dir, c_hash, d_hash, self.seed)
        assignments = study.feasible_assignments()

        outcomes: List[PathOutcome] = []
        pending = assignments
        if resume:
            pending = []
            for assignment in assignments:
                cached = cache.get(assignment.index)
                if cached is None:
                    pending.append(assignment)
                else:
                    outcomes.append(cached)
            log_action(logger, "Resuming from cache", f"{len(outcomes)} cached, {len(pending)} to execute")
        n_cached = len(outcomes)

        for batch in study.iter_results(pending, self.n_jobs, progress_callback):
            cache.put_many(batch)
            outcomes.extend(batch)

        result = OutcomeSet.from_outcomes(study.spec, outcomes, {"study_id": study.spec.study_id, "kind": study.kind})
        written = result.to_csv(self.out_dir)
        manifest = RunManifest(
            study_id=study.spec.study_id,
            kind=study.kind,
            config_hash=c_hash,
            data_hash=d_hash,
            engine_version=__version__,
            seed=self.seed,
            status_tally=result.status_tally(),
            n_nominal=study.spec.n_paths,
            n_feasible=len(assignments),
            n_executed=len(pending),
            n_cached=n_cached,
            started_at=started,
            finished_at=_now(),
            data_files={key: str(path) for key, path in sorted(self.data_paths.items())},
            default_path=getattr(study, "default_choices", None) or self.config.default_path,
            layout=spec_to_dict(study.spec),
        )
        written["manifest"] = manifest.write(self.out_dir)
        for name, path in written.items():
            log_action(logger, f"Wrote {name}", path)
        if manifest.n_failed:
            logger.warning(f"{manifest.n_failed} of {len(assignments)} paths did not finish ok: {manifest.status_tally}")
        return result, manifest
