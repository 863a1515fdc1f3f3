"""End-to-end run: locality, splitting, blow-up, assignment, evaluation."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assignment import FinalPartition, Provenance, final_assign, partition_from_state
from .benchfuncs import BenchCase, get_case, synthesize_sites
from .blowup import ClassState, blow_up
from .config import PipelineConfig
from .evaluation import (
    ErrorReport,
    SafeZone,
    error_report,
    fit_classes,
    misclassified,
    piecewise_evaluate,
    safe_zone,
    unit_grid,
)
from .geometry import PointSet, build_point_set, neighbor_edge_list, separation_distance
from .kernel import Interpolant, fit_interpolant
from .locality import LocalityScores, good_point_mask, locality_indicator
from .splitting import (
    ComponentLabeling,
    filter_edges,
    select_major_components,
    spanning_forest,
)

log = logging.getLogger(__name__)


class PhaseError(RuntimeError):
    def __init__(self, phase: str, cause: Exception):
        self.phase = phase
        self.cause = cause
        super().__init__(f"{phase} phase failed: {cause}")


@dataclass(eq=False)
class PipelineResult:
    config: PipelineConfig
    points: PointSet
    values: np.ndarray
    q: float
    scores: LocalityScores
    components: ComponentLabeling
    demoted: np.ndarray
    threshold_factor: float
    grown: ClassState
    partition: FinalPartition
    interpolants: dict[int, Interpolant]
    global_fit: Interpolant
    report: ErrorReport
    case: BenchCase | None = None
    truth: np.ndarray | None = None
    trace: list = field(default_factory=list)
    grid: np.ndarray | None = None
    grid_values: dict = field(default_factory=dict)
    safe: SafeZone | None = None
    diagnostics: list = field(default_factory=list)

    def summary(self) -> dict:
        """JSON-ready report."""
        N = len(self.points)
        part = self.partition
        after2 = int(np.count_nonzero(self.grown.grown > 0))
        out = {
            "case": self.case.name if self.case else None,
            "N": N,
            "q": self.q,
            "config": self.config.to_dict(),
            "threshold_factor_used": self.threshold_factor,
            "sigma_median": self.scores.median,
            "n_good": self.scores.n_good,
            "J": part.J,
            "component_sizes": self.components.sizes,
            "n_demoted": int(len(self.demoted)),
            "class_sizes": [int(len(part.members(j))) for j in range(1, part.J + 1)],
            "counts": part.counts(),
            "classified_after_blowup": after2,
            "unsure_after_blowup": N - after2,
            "errors": self.report.to_dict(),
            "diagnostics": self.diagnostics,
        }
        if self.truth is not None:
            bad2 = misclassified(self.grown.grown, self.truth)
            bad3 = misclassified(part.labels, self.truth)
            out["correct_after_blowup"] = after2 - int(len(bad2))
            out["misclassified"] = [int(i) + 1 for i in bad3]
        return out


def _phase(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except PhaseError:
                raise
            except Exception as exc:
                raise PhaseError(name, exc) from exc
        return inner
    return wrap


@_phase("locality")
def _locality(cfg: PipelineConfig, ps, f):
    return locality_indicator(
        ps, f, cfg.n_neighbors, cfg.kernel_obj, method=cfg.indicator, workers=cfg.workers
    )


@_phase("splitting")
def _split(cfg: PipelineConfig, ps, scores: LocalityScores):
    n = min(cfg.n_neighbors, len(ps))
    edges = neighbor_edge_list(ps, n) if len(ps) >= 2 else []
    good = np.flatnonzero(scores.good_mask) + 1
    kept = filter_edges(edges, scores.good_mask)
    forest = spanning_forest(kept, good, n_points=len(ps))
    return select_major_components(forest, min(cfg.min_size, max(forest.sizes)))


@_phase("blowup")
def _blowup(cfg: PipelineConfig, ps, f, sigma, seeds, trace):
    state = ClassState.from_seeds(
        ps.coords, f, sigma, seeds.labels, cfg.kernel_obj, n=cfg.n_neighbors, m=cfg.m_candidates
    )
    return blow_up(state, mode=cfg.blowup_mode, trace=trace)


@_phase("assignment")
def _assign(cfg: PipelineConfig, state: ClassState):
    if cfg.skip_phase3:
        return partition_from_state(state)
    return final_assign(state)


def run_pipeline(
    cfg: PipelineConfig,
    ps: PointSet,
    f,
    case: BenchCase | None = None,
    evaluate_grid: bool = True,
) -> PipelineResult:
    """Classify the sites and build piecewise and global interpolants.

    With a benchmark ``case`` the errors are measured on the ``[0,1]^2`` grid
    against the true function; otherwise they are residuals at the data sites.
    """
    f = np.asarray(f, dtype=float)
    kernel = cfg.kernel_obj
    diagnostics: list[str] = []
    q = separation_distance(ps) if len(ps) > 1 else float("inf")

    sigma = _locality(cfg, ps, f)
    factor = cfg.threshold_factor
    scores = good_point_mask(sigma, factor, cfg.n_neighbors)
    components, demoted = _split(cfg, ps, scores)
    if components.J == 1:
        msg = f"splitting found a single class at threshold factor {factor}"
        log.warning(msg)
        diagnostics.append(msg)
    if components.J == 1 and cfg.retry_factor is not None and cfg.retry_factor != factor:
        diagnostics.append(f"retrying at threshold factor {cfg.retry_factor}")
        retry_scores = good_point_mask(sigma, cfg.retry_factor, cfg.n_neighbors)
        retry = _split(cfg, ps, retry_scores)
        if retry[0].J > 1:
            factor, scores, (components, demoted) = cfg.retry_factor, retry_scores, retry
        else:
            diagnostics.append("retry also found a single class; running unsegmented")
    log.info("splitting: J=%d sizes=%s demoted=%d", components.J, components.sizes, len(demoted))

    trace: list = []
    state = _blowup(cfg, ps, f, sigma, components, trace)
    partition = _assign(cfg, state)
    _check_partition(components, state, partition, cfg.skip_phase3)

    truth = case.true_class(ps.coords) if case is not None else None
    try:
        fits = fit_classes(kernel, ps.coords, f, partition.labels)
        global_fit = fit_interpolant(kernel, ps.coords, f)
        if case is not None and evaluate_grid:
            grid = unit_grid(cfg.grid_step)
            safe_labels = partition.labels if cfg.safe_sets == "final" else state.grown
            safe = safe_zone(ps.coords, safe_labels, q, grid)
            u_seg, cls = piecewise_evaluate(ps.coords, partition.labels, fits, grid)
            u_glob = global_fit(grid)
            f_grid = case(grid)
            report = error_report(u_seg, u_glob, f_grid, safe)
            grid_values = {"u": u_seg, "class": cls, "global": u_glob, "f": f_grid}
        else:
            grid, safe, grid_values = None, None, {}
            sites = partition.labels > 0
            u_seg, _ = piecewise_evaluate(ps.coords, partition.labels, fits, ps.coords[sites])
            e_seg = float(np.abs(u_seg - f[sites]).max())
            e_glob = float(np.abs(global_fit(ps.coords) - f).max())
            report = ErrorReport(None, e_seg, None, e_glob, 0.0)
    except Exception as exc:
        raise PhaseError("evaluation", exc) from exc
    if truth is not None:
        report.n_misclassified = int(len(misclassified(partition.labels, truth)))
    report.counts = partition.counts()

    return PipelineResult(
        config=cfg,
        points=ps,
        values=f,
        q=q,
        scores=scores,
        components=components,
        demoted=demoted,
        threshold_factor=factor,
        grown=state,
        partition=partition,
        interpolants=fits,
        global_fit=global_fit,
        report=report,
        case=case,
        truth=truth,
        trace=trace,
        grid=grid,
        grid_values=grid_values,
        safe=safe,
        diagnostics=diagnostics,
    )


def _check_partition(components, state: ClassState, part: FinalPartition, skipped: bool):
    seeds = components.labels
    if not np.array_equal(state.seed, seeds):
        raise AssertionError("seed sets changed")
    sel = seeds > 0
    if not np.array_equal(state.grown[sel], seeds[sel]):
        raise AssertionError("seed not contained in grown set")
    sel = state.grown > 0
    if not np.array_equal(part.labels[sel], state.grown[sel]):
        raise AssertionError("grown set not contained in final set")
    if not skipped and np.any(part.labels == 0):
        raise AssertionError("final sets do not cover all sites")


def run_case(cfg: PipelineConfig, name: str, **kwargs) -> PipelineResult:
    case = get_case(name)
    ps, _ = synthesize_sites(cfg.N, cfg.margin, cfg.target_q, cfg.seed, cfg.jitter)
    return run_pipeline(cfg, ps, case(ps.coords), case=case, **kwargs)


def run_data(cfg: PipelineConfig, coords, values) -> PipelineResult:
    ps = build_point_set(coords)
    return run_pipeline(cfg, ps, values)


# --- artifact writers -------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_sigma(res: PipelineResult, fh) -> None:
    s = res.scores
    order = np.lexsort((np.arange(len(s.sigma)), s.sigma))
    w = _writer(fh)
    w.writerow(["id", "sigma", "good"])
    for i in order:
        w.writerow([i + 1, _fmt(s.sigma[i]), int(s.good_mask[i])])


def write_seeds(res: PipelineResult, fh) -> None:
    w = _writer(fh)
    w.writerow(["id", "component"])
    for i in np.flatnonzero(res.components.labels > 0):
        w.writerow([i + 1, int(res.components.labels[i])])


def write_classes(res: PipelineResult, fh) -> None:
    w = _writer(fh)
    w.writerow(["id", "x", "y", "class", "provenance"])
    part = res.partition
    for i, (x, y) in enumerate(res.points.coords):
        w.writerow([i + 1, _fmt(x), _fmt(y), int(part.labels[i]), str(Provenance(part.provenance[i]))])


def write_trace(res: PipelineResult, fh) -> None:
    for rec in res.trace:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_grid(res: PipelineResult, fh) -> None:
    if res.grid is None:
        raise ValueError("grid errors need a benchmark case with a known function")
    g = res.grid_values
    w = _writer(fh)
    w.writerow(["x", "y", "class", "u", "f", "abs_err", "safe"])
    for k, (x, y) in enumerate(res.grid):
        u, fv = g["u"][k], g["f"][k]
        w.writerow([_fmt(x), _fmt(y), int(g["class"][k]), _fmt(u), _fmt(fv), _fmt(abs(u - fv)), int(res.safe.mask[k])])


def write_report(res: PipelineResult, fh) -> None:
    json.dump(res.summary(), fh, indent=2, sort_keys=True)
    fh.write("\n")


ARTIFACTS = {
    "sigma": ("sigma.csv", write_sigma),
    "seeds": ("seeds.csv", write_seeds),
    "blowup-trace": ("blowup_trace.jsonl", write_trace),
    "classes": ("classes.csv", write_classes),
    "grid": ("grid_errors.csv", write_grid),
    "report": ("report.json", write_report),
}


def dump_phase_artifacts(res: PipelineResult, phase: str, out_dir: str | Path) -> Path:
    try:
        name, writer = ARTIFACTS[phase]
    except KeyError:
        raise ValueError(f"unknown artifact {phase!r}; choose from {sorted(ARTIFACTS)}") from None
    path = Path(out_dir) / name
    with open(path, "w", newline="") as fh:
        writer(res, fh)
    return path


def write_all(res: PipelineResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    phases = [p for p in ARTIFACTS if p != "grid" or res.grid is not None]
    return [dump_phase_artifacts(res, p, out) for p in phases]
