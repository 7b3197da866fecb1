from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Iterator, List, Optional, Sequence

from joblib import Parallel, delayed

from debug.logger import setup_logger, log_action
from pathgrid.grid import PathAssignment, StudySpec, iter_paths
from pathgrid.study_config import StudyConfig
from studies.outcomes import OutcomeSet, PathOutcome
from utils.errors import PathFailure, SingularDesignError, SpecValidationError

BATCHES_PER_WORKER = 4


class BaseStudy(ABC):
    """Base class for study executors

    An executor turns one path assignment (or a group of assignments that
    share expensive intermediate results) into PathOutcomes. Subclasses set
    ``kind`` and ``DEFAULT_SETTINGS`` and implement ``run_group``.
    """

    kind: str = ""
    DEFAULT_SETTINGS: Dict[str, Any] = {}

    def __init__(self, config: StudyConfig, data: Dict[str, Any], debug_mode: bool = False):
        """Initialize the executor

        Args:
            config: Validated study config
            data: Loaded inputs keyed by data name
            debug_mode: Log at DEBUG level
        """
        if config.kind != self.kind:
            raise SpecValidationError(f"Config '{config.study_id}' is a {config.kind} study, not {self.kind}")
        self.config = config
        self.data = data
        self.debug_mode = debug_mode
        self.settings = {**self.DEFAULT_SETTINGS, **config.settings}
        self.logger = setup_logger(f"{self.kind}_study", debug_mode)
        self.spec = self.build_spec()
        self.prepare()

    def __getstate__(self):
        state = self.__dict__.copy()
        state["logger"] = None
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.logger = setup_logger(f"{self.kind}_study", self.debug_mode)

    def build_spec(self) -> StudySpec:
        return self.config.to_spec()

    def prepare(self) -> None:
        """Precompute whatever all paths share (aggregated panels, sorted cross sections)."""

    def group_key(self, assignment: PathAssignment) -> Hashable:
        """Paths with equal keys are executed together by ``run_group``."""
        return assignment.index

    @abstractmethod
    def run_group(self, assignments: List[PathAssignment]) -> List[PathOutcome]:
        """Outcomes for assignments sharing one group key, in the same order."""

    def option(self, assignment: PathAssignment, layer: str):
        """(option id, payload) chosen by the path at ``layer``; payload defaults to the id."""
        option = assignment.choice(layer)
        payload = self.spec.layer(layer).payload(option)
        return option, option if payload is None else payload

    def run_path(self, assignment: PathAssignment) -> PathOutcome:
        return self._safe_run_group([assignment])[0]

    def run_guarded(self, assignment: PathAssignment, fn: Callable[[PathAssignment], PathOutcome]) -> PathOutcome:
        """Run one path inside a group; path-level failures become a status."""
        try:
            return fn(assignment)
        except (PathFailure, SingularDesignError) as e:
            self.logger.warning(f"Path {assignment.index} failed ({e.status}): {str(e)}")
            return PathOutcome.failed(assignment.index, e.status)

    def _safe_run_group(self, assignments: List[PathAssignment]) -> List[PathOutcome]:
        try:
            outcomes = self.run_group(assignments)
        except (PathFailure, SingularDesignError) as e:
            self.logger.warning(f"Paths {[a.index for a in assignments]} failed ({e.status}): {str(e)}")
            return [PathOutcome.failed(a.index, e.status) for a in assignments]
        except Exception as e:
            self.logger.warning(f"Paths {[a.index for a in assignments]} raised {type(e).__name__}: {str(e)}")
            return [PathOutcome.failed(a.index, "error") for a in assignments]
        for outcome in outcomes:
            if not outcome.ok:
                self.logger.debug(f"Path {outcome.path_index} finished with status {outcome.status}")
        return outcomes

    def _run_batch(self, groups: List[List[PathAssignment]]) -> List[PathOutcome]:
        outcomes = []
        for group in groups:
            outcomes.extend(self._safe_run_group(group))
        return outcomes

    def groups(self, assignments: Sequence[PathAssignment]) -> List[List[PathAssignment]]:
        grouped: "OrderedDict[Hashable, List[PathAssignment]]" = OrderedDict()
        for assignment in assignments:
            grouped.setdefault(self.group_key(assignment), []).append(assignment)
        return list(grouped.values())

    def feasible_assignments(self) -> List[PathAssignment]:
        return [a for a in iter_paths(self.spec) if a.feasible]

    def iter_results(self, assignments: Optional[Sequence[PathAssignment]] = None, n_jobs: int = 1,
                     progress_callback: Optional[Callable[[float], None]] = None) -> Iterator[List[PathOutcome]]:
        """Execute paths batch by batch, yielding each batch's outcomes as it completes

        Batches are yielded in submission order whatever ``n_jobs`` is.
        """
        if assignments is None:
            assignments = self.feasible_assignments()
        groups = self.groups(assignments)
        if not groups:
            self.update_progress(100.0, progress_callback)
            return
        n_batches = max(1, min(len(groups), max(n_jobs, 1) * BATCHES_PER_WORKER))
        size = -(-len(groups) // n_batches)
        batches = [groups[i:i + size] for i in range(0, len(groups), size)]
        log_action(self.logger, f"Running {len(assignments)} paths", f"{len(groups)} groups, {len(batches)} batches, jobs={n_jobs}")

        if n_jobs == 1:
            results = (self._run_batch(batch) for batch in batches)
        else:
            results = Parallel(n_jobs=n_jobs, return_as="generator")(delayed(self._run_batch)(batch) for batch in batches)
        for done, outcomes in enumerate(results, start=1):
            self.update_progress(100.0 * done / len(batches), progress_callback)
            yield outcomes

    def run(self, assignments: Optional[Sequence[PathAssignment]] = None, n_jobs: int = 1,
            progress_callback: Optional[Callable[[float], None]] = None) -> OutcomeSet:
        outcomes: List[PathOutcome] = []
        for batch in self.iter_results(assignments, n_jobs, progress_callback):
            outcomes.extend(batch)
        result = OutcomeSet.from_outcomes(self.spec, outcomes, {"study_id": self.spec.study_id, "kind": self.kind})
        log_action(self.logger, f"Finished {self.spec.study_id}", str(result.status_tally()))
        return result

    def update_progress(self, progress: float, progress_callback: Optional[Callable[[float], None]] = None) -> None:
        """Report progress in percent

        Args:
            progress: Progress value (0-100)
            progress_callback: Optional callback receiving the progress value
        """
        if progress_callback:
            progress_callback(progress)
        self.logger.debug(f"Progress: {progress:.1f}%")
