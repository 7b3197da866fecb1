"""
Content-addressed per-path result cache.

Entries live at ``<root>/<config hash>/<data hash>/seed-<seed>/<index>.json``
and hold the outcome payload with its sha256 checksum. A missing,
unreadable or mismatching entry counts as absent.
"""

import json
from pathlib import Path
from typing import Iterable, Optional, Union

from debug.logger import setup_logger
from studies.outcomes import PathOutcome
from utils.fileio import atomic_write_json, sha256_json

logger = setup_logger("path_cache")


class PathCache:
    def __init__(self, root: Union[str, Path], config_hash: str, data_hash: str, seed: int = 0):
        self.directory = Path(root) / config_hash / data_hash / f"seed-{int(seed)}"

    def path_for(self, index: int) -> Path:
        return self.directory / f"{int(index)}.json"

    def get(self, index: int) -> Optional[PathOutcome]:
        """Cached outcome for a path, None when absent or corrupted."""
        path = self.path_for(index)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            payload = entry["payload"]
            if sha256_json(payload) != entry["checksum"]:
                raise ValueError("checksum mismatch")
            outcome = PathOutcome.from_payload(payload)
            if outcome.path_index != int(index):
                raise ValueError(f"entry holds path {outcome.path_index}")
            return outcome
        except (OSError, ValueError, KeyError, TypeError) as e:
            logger.warning(f"Corrupted cache entry {path}: {str(e)}")
            return None

    def put(self, outcome: PathOutcome) -> None:
        payload = outcome.to_payload()
        atomic_write_json(self.path_for(outcome.path_index), {"checksum": sha256_json(payload), "payload": payload})

    def put_many(self, outcomes: Iterable[PathOutcome]) -> int:
        count = 0
        for outcome in outcomes:
            self.put(outcome)
            count += 1
        return count
