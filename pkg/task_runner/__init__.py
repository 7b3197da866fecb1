"""Run orchestration: hashing, per-path cache, resume and run manifests."""

from task_runner.path_cache import PathCache
from task_runner.run_manager import RunManager, RunManifest, config_hash, data_hash, load_outcomes

__all__ = ["PathCache", "RunManager", "RunManifest", "config_hash", "data_hash", "load_outcomes"]
