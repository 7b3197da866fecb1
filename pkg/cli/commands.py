"""
Command implementations behind ``launch_cli.py``.

Each command takes plain arguments, writes its files atomically and
returns what it wrote, so the same entry points serve the CLI and tests.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from averaging.conditional import conditional_split_test, layer_impact_table
from averaging.weights import bayesian_average, frequentist_average, tstat_average, uniform_average
from cli.reports import ReportWriter, provenance
from debug.logger import setup_logger, log_action
from fmb.summary import annualized_premia, comparator_etc, weighted_premium_series
from mtesting.maxstat import brc_threshold, emt_from_outcomes, emt_threshold, path_label
from pathgrid.grid import LayerSpec, StudySpec, iter_paths
from pathgrid.study_config import load_study_config
from pathmetrics.etc import etc_score
from pathmetrics.intervals import hacking_interval_report
from pathmetrics.pcurve import p_values_from_t, pcurve_report
from simlab.config import load_simlab_config
from simlab.convergence import convergence_sweep
from studies.anomalies_study import (
    CHARACTERISTIC_LAYER,
    anomaly_summary,
    default_choices_from,
    default_return_matrix,
    signed_outcomes,
)
from studies.outcomes import OutcomeSet
from studies.study_manager import StudyManager
from task_runner.run_manager import RunManager, RunManifest, config_hash, load_outcomes
from utils.errors import DomainError, ExecutionError, SchemaError, SpecValidationError

ANALYSES = ("average", "conditional", "intervals", "etc", "mtest", "phack")
REPORTS_DIR = "reports"
# Layer whose options are analyzed separately unless --by says otherwise
DEFAULT_GROUP_LAYERS = {"premium": "predictor", "anomalies": CHARACTERISTIC_LAYER, "fmb": "factor"}

logger = setup_logger("cli")


@dataclass
class AnalyzeOptions:
    weights: Optional[str] = None
    sigma_convention: str = "linear"
    odds_reading: str = "repaired"
    level: float = 0.95
    column: str = "b"
    q: float = 0.9
    fit: str = "gaussian"
    nu: float = 3.0
    bstar: Optional[float] = None
    benchmark: str = "pointwise"
    block_length: int = 12
    replicates: int = 576
    method: str = "both"
    k_min: int = 1
    k_max: Optional[int] = None
    bins: int = 10
    alternative: str = "two-sided"
    layer: Optional[str] = None
    option_a: Optional[str] = None
    option_b: Optional[str] = None
    by: Optional[str] = None
    drop_unpaired: bool = True
    seed: int = 0
    n_jobs: int = 1


def cmd_enumerate(config_path: Union[str, Path], data_paths: Optional[Mapping[str, str]] = None,
                  out: Optional[Union[str, Path]] = None) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """Path table with feasibility flags plus nominal and feasible counts."""
    config = load_study_config(config_path)
    if data_paths:
        manager = StudyManager()
        spec = manager.create(config, manager.load_data(config, data_paths)).spec
    else:
        spec = config.to_spec()
        characteristics = config.settings.get("characteristics")
        if config.kind == "anomalies" and characteristics and CHARACTERISTIC_LAYER not in spec.names:
            spec = spec.with_leading_layer(LayerSpec(CHARACTERISTIC_LAYER, tuple(characteristics)))

    rows = []
    for assignment in iter_paths(spec):
        row = {"path_index": assignment.index}
        row.update(assignment.as_dict())
        row["feasible"] = assignment.feasible
        rows.append(row)
    table = pd.DataFrame(rows, columns=["path_index"] + list(spec.names) + ["feasible"])
    counts = {
        "study_id": spec.study_id,
        "layers": {layer.name: layer.size for layer in spec.layers},
        "n_nominal": spec.n_paths,
        "n_feasible": int(table["feasible"].sum()),
    }
    if out is not None:
        writer = ReportWriter(out, provenance(config_hash(config), spec.study_id))
        writer.csv("paths", table)
        writer.json("enumerate", counts)
    log_action(logger, f"Enumerated {spec.study_id}", f"{counts['n_nominal']} nominal, {counts['n_feasible']} feasible")
    return table, counts


def cmd_run(config_path: Union[str, Path], data_paths: Mapping[str, str], out: Union[str, Path], jobs: int = 1,
            seed: int = 0, resume: bool = False, strict: bool = False, cache_dir: Optional[str] = None,
            debug_mode: bool = False) -> RunManifest:
    """Execute a study; under ``strict`` any path that raised unexpectedly fails the run."""
    manager = RunManager(config_path, data_paths, out, cache_dir=cache_dir, seed=seed, n_jobs=jobs,
                         debug_mode=debug_mode)
    _, manifest = manager.execute(resume=resume)
    errored = manifest.status_tally.get("error", 0)
    if strict and errored:
        raise ExecutionError(f"{errored} path(s) ended with status 'error'")
    return manifest


def _groups(outcomes: OutcomeSet, kind: str, by: Optional[str]) -> Tuple[Optional[str], List[Tuple[str, OutcomeSet]]]:
    layer = DEFAULT_GROUP_LAYERS.get(kind) if by is None else (None if by == "none" else by)
    if layer is None or layer not in outcomes.spec.names:
        if by not in (None, "none"):
            raise SpecValidationError(f"Unknown grouping layer '{by}'")
        return None, [("all", outcomes)]
    return layer, [(option, outcomes.where(**{layer: option})) for option in outcomes.spec.layer(layer).options]


def _free_layers(spec: StudySpec, group_layer: Optional[str]) -> List[str]:
    return [name for name in spec.names if name != group_layer]


def _average(ok: OutcomeSet, scheme: str, options: AnalyzeOptions):
    alpha = 1.0 - options.level
    b = ok.values(options.column)
    se = ok.values("se")
    if scheme == "frequentist":
        return frequentist_average(b, se, ok.values("aic"), alpha, options.sigma_convention)
    if scheme == "bayesian":
        return bayesian_average(b, se, ok.values("n"), ok.values("k"), ok.values("rss"), ok.values("yvar"),
                                alpha, options.odds_reading)
    if scheme == "uniform":
        return uniform_average(b, se, alpha, options.sigma_convention)
    raise SpecValidationError(f"Unknown weighting scheme '{scheme}'")


def _analyze_average(outcomes: OutcomeSet, manifest: RunManifest, writer: ReportWriter, options: AnalyzeOptions) -> None:
    scheme = options.weights or ("uniform" if manifest.kind == "anomalies" else "frequentist")
    group_layer, groups = _groups(outcomes, manifest.kind, options.by)
    rows, details = [], []
    for label, subset in groups:
        ok = subset.ok()
        if len(ok) == 0:
            continue
        result = _average(ok, scheme, options)
        payload = result.to_dict()
        tstats = ok.values("t")
        payload["t_average"] = tstat_average(tstats, result.weights) if np.isfinite(tstats).all() else None
        payload["group"] = label
        details.append(payload)
        rows.append({"group": label, "scheme": scheme, "estimate": result.estimate, "sigma": result.sigma,
                     "lower": result.lower, "upper": result.upper, "n_paths": result.n_paths,
                     "effective_paths": result.effective_paths, "t_average": payload["t_average"]})
    writer.csv("average", pd.DataFrame(rows))
    writer.json("average", {"group_layer": group_layer, "column": options.column, "groups": details})

    if manifest.kind == "fmb" and outcomes.series is not None:
        annual, monthly = [], []
        for label, subset in groups:
            if len(subset.ok()) == 0:
                continue
            table = annualized_premia(subset, scheme, options.odds_reading)
            table.insert(0, "factor", label)
            annual.append(table)
            series = weighted_premium_series(subset, scheme, options.odds_reading).dropna()
            monthly.append(pd.DataFrame({"factor": label, "date": pd.to_datetime(series.index).strftime("%Y-%m-%d"),
                                         "premium": series.to_numpy()}))
        if annual:
            writer.csv("annual_premia", pd.concat(annual, ignore_index=True))
            writer.csv("monthly_premia", pd.concat(monthly, ignore_index=True))


def _analyze_conditional(outcomes: OutcomeSet, manifest: RunManifest, writer: ReportWriter,
                         options: AnalyzeOptions) -> None:
    weights = options.weights or "uniform"
    group_layer, groups = _groups(outcomes, manifest.kind, options.by)
    layers = [options.layer] if options.layer else _free_layers(outcomes.spec, group_layer)
    frames = []
    for label, subset in groups:
        for layer in layers:
            if options.option_a and options.option_b:
                report = conditional_split_test(subset, layer, options.option_a, options.option_b, weights,
                                                options.column, options.drop_unpaired)
                table = pd.DataFrame([report.to_dict()])
            else:
                table = layer_impact_table(subset, layer, weights, options.column, options.drop_unpaired)
            table.insert(0, "group", label)
            frames.append(table)
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    writer.csv("conditional", table)
    writer.json("conditional", {"group_layer": group_layer, "weights": weights, "column": options.column,
                                "tests": table.to_dict(orient="records")})


def _analyze_intervals(outcomes: OutcomeSet, manifest: RunManifest, writer: ReportWriter,
                       options: AnalyzeOptions) -> None:
    group_layer, groups = _groups(outcomes, manifest.kind, options.by)
    layers = _free_layers(outcomes.spec, group_layer)
    summaries, ranges, details = [], [], []
    for label, subset in groups:
        if len(subset.ok()) == 0:
            continue
        report = hacking_interval_report(subset, options.column, layers, options.k_min, options.k_max)
        summary = report.summary_frame()
        summary.insert(0, "group", label)
        summaries.append(summary)
        frame = report.ranges_frame()
        frame.insert(0, "group", label)
        ranges.append(frame)
        details.append(dict(report.to_dict(), group=label))
    if summaries:
        writer.csv("intervals_summary", pd.concat(summaries, ignore_index=True))
        writer.csv("intervals_ranges", pd.concat(ranges, ignore_index=True))
    writer.json("intervals", {"group_layer": group_layer, "column": options.column, "groups": details})
    if manifest.kind == "anomalies":
        writer.csv("anomaly_summary", anomaly_summary(outcomes, manifest.default_path, column="t"))


def _analyze_etc(outcomes: OutcomeSet, manifest: RunManifest, writer: ReportWriter, options: AnalyzeOptions) -> None:
    if manifest.kind == "fmb" and options.bstar is None:
        frames = []
        group_layer, groups = _groups(outcomes, manifest.kind, options.by)
        for label, subset in groups:
            if label not in ("MKT", "all") or len(subset.ok()) == 0:
                continue
            table = comparator_etc(subset, q=options.q, fit=options.fit, nu=options.nu, column=options.column)
            table.insert(0, "group", label)
            frames.append(table)
        if not frames:
            raise DomainError("No market-factor paths to compare published premia against")
        table = pd.concat(frames, ignore_index=True)
        writer.csv("etc", table)
        writer.json("etc", {"group_layer": group_layer, "comparisons": table.to_dict(orient="records")})
        return
    if options.bstar is None:
        raise SpecValidationError("etc needs --bstar")
    source = signed_outcomes(outcomes) if manifest.kind == "anomalies" else outcomes
    group_layer, groups = _groups(source, manifest.kind, options.by)
    rows = []
    for label, subset in groups:
        values = subset.ok().values(options.column)
        if values.size == 0:
            continue
        rows.append(dict(etc_score(values, options.bstar, options.q, options.fit, options.nu).to_dict(), group=label))
    writer.csv("etc", pd.DataFrame(rows))
    writer.json("etc", {"group_layer": group_layer, "column": options.column, "scores": rows})


def _analyze_mtest(outcomes: OutcomeSet, manifest: RunManifest, writer: ReportWriter, options: AnalyzeOptions) -> None:
    if CHARACTERISTIC_LAYER not in outcomes.spec.names:
        raise SchemaError(f"Multiple testing needs outcomes with a '{CHARACTERISTIC_LAYER}' layer")
    if options.method not in ("bootstrap", "paths", "both"):
        raise SpecValidationError(f"Unknown method '{options.method}'")
    signed = signed_outcomes(outcomes)
    results, maxima = {}, []
    if options.method in ("bootstrap", "both"):
        matrix = default_return_matrix(outcomes, manifest.default_path).dropna()
        brc = brc_threshold(matrix.to_numpy(), options.block_length, options.replicates, options.seed,
                            options.level, n_jobs=options.n_jobs)
        results["bootstrap"] = dict(brc.to_dict(), n_anomalies=matrix.shape[1], n_months=matrix.shape[0])
        maxima.append(brc.maxima_frame())
    if options.method in ("paths", "both"):
        moments = emt_from_outcomes(signed)
        default_label = None
        if options.benchmark == "pointwise":
            choices = default_choices_from(outcomes, manifest.default_path)
            default_label = path_label(choices, list(outcomes.spec.names))
        emt = emt_threshold(moments, options.benchmark, default_label, options.level)
        results["paths"] = dict(emt.to_dict(), n_anomalies=len(moments.anomaly_labels))
        maxima.append(emt.maxima_frame())
    writer.csv("mtest_maxima", pd.concat(maxima, ignore_index=True))
    writer.json("mtest", results)


def _analyze_phack(outcomes: OutcomeSet, manifest: RunManifest, writer: ReportWriter, options: AnalyzeOptions) -> None:
    group_layer, groups = _groups(outcomes, manifest.kind, options.by)
    rows, details = [], []
    for label, subset in groups:
        p = p_values_from_t(subset.ok().values("t"), options.alternative)
        if p.size == 0:
            continue
        report = pcurve_report(p, options.bins)
        rows.append({"group": label, "n_values": report.n_values, "kappa": report.kappa,
                     "kappa_complete": report.complete, "class": report.label,
                     "monotone_violations": len(report.monotone_violations),
                     "convexity_violations": len(report.convexity_violations)})
        details.append(dict(report.to_dict(), group=label))
    writer.csv("phack", pd.DataFrame(rows))
    writer.json("phack", {"group_layer": group_layer, "alternative": options.alternative, "groups": details})


ANALYZERS = {
    "average": _analyze_average,
    "conditional": _analyze_conditional,
    "intervals": _analyze_intervals,
    "etc": _analyze_etc,
    "mtest": _analyze_mtest,
    "phack": _analyze_phack,
}


def cmd_analyze(outcomes_dir: Union[str, Path], analysis: str, out: Optional[Union[str, Path]] = None,
                options: Optional[AnalyzeOptions] = None) -> Dict[str, str]:
    """Run one analysis over the outcome files of a finished run

    Args:
        outcomes_dir: Directory written by ``cmd_run``
        analysis: One of ANALYSES
        out: Report directory (defaults to <outcomes_dir>/reports)
        options: Analysis parameters

    Returns:
        Report name -> written file
    """
    if analysis not in ANALYZERS:
        raise SpecValidationError(f"Unknown analysis '{analysis}', expected one of {ANALYSES}")
    options = options or AnalyzeOptions()
    outcomes, manifest = load_outcomes(outcomes_dir)
    out = Path(out) if out is not None else Path(outcomes_dir) / REPORTS_DIR
    writer = ReportWriter(out, provenance(manifest.config_hash, manifest.study_id, analysis=analysis))
    ANALYZERS[analysis](outcomes, manifest, writer, options)
    for name, path in writer.written.items():
        log_action(logger, f"Wrote {name}", path)
    return writer.written


def cmd_simulate(config_path: Union[str, Path], out: Union[str, Path], seed: Optional[int] = None,
                 jobs: int = 1) -> Dict[str, str]:
    """Convergence sweeps of the simulation lab, one CSV per sweep kind."""
    config = load_simlab_config(config_path)
    seed = config.seed if seed is None else int(seed)
    grid = np.linspace(-3.0, 3.0, config.grid_points)
    writer = ReportWriter(out, provenance(config_hash(config), "simlab", seed=seed))
    frames: Dict[str, List[pd.DataFrame]] = {}
    for number, sweep in enumerate(config.sweeps):
        log_action(logger, f"Sweep {number}", f"{sweep.kind} over {sweep.values}, rho={sweep.rho}")
        frame = convergence_sweep(sweep.kind, sweep.values, sweep.rho, sweep.worlds or config.worlds, seed,
                                  fixed=sweep.fixed, n_jobs=jobs, grid=grid)
        frames.setdefault(sweep.kind, []).append(frame)
    for kind, parts in frames.items():
        writer.csv(f"convergence_{kind}", pd.concat(parts, ignore_index=True))
    writer.json("simulate", {"worlds": config.worlds, "grid_points": config.grid_points,
                             "sweeps": [s.model_dump() for s in config.sweeps]})
    return writer.written
