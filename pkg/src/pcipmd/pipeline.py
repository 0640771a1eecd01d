"""Five-stage PCI assignment: mod-3 partition, per-class mod-10 partition,
CRT merge, per-cluster quotient coloring, range repair.

Every randomized sub-solve draws its seed from
``SeedSequence([master_seed, stage, part])`` so results do not depend on
how the per-partition work is scheduled.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coloring import assign_quotients, assign_quotients_partial, greedy_color, ColoringGraph, repair_range
from .crt import crt_merge
from .evaluate import EvalReport, evaluate_plan
from .graph import PCI_MAX, N_PCI, PciPlan
from .local_search import refine
from .simplex import SolverConfig, SolveTrace, partial_coupling, solve_relaxed, round_labels

logger = logging.getLogger(__name__)

METHODS = ("gp-pmd", "gp-pgp", "gp-ls", "ggc")
STAGE_MOD3, STAGE_MOD10 = 1, 2


@dataclass
class PipelineResult:
    plan: PciPlan
    report: EvalReport
    traces: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    repaired: int = 0

    @property
    def capped(self):
        return any(t.capped for t in self.traces.values())

    def to_dict(self):
        return {
            "pci": [int(p) for p in self.plan.pci],
            "metrics": self.report.to_dict(),
            "timings": dict(self.timings),
            "repaired": self.repaired,
            "capped": self.capped,
        }


def derive_seed(master, stage, part):
    return int(np.random.SeedSequence([int(master), int(stage), int(part)]).generate_state(1)[0])


def _sub_config(config, stage, part):
    return dataclasses.replace(config, seed=derive_seed(config.seed, stage, part))


def partition_cells(w, k, config, method="gp-pmd", fixed_labels=None, free=None):
    """Min-k-Partition of ``free`` cells of ``w`` followed by local search.

    Without ``free`` every cell is free. ``fixed_labels`` gives labels of the
    remaining cells (full-length; free entries ignored). Returns
    ``(labels_of_free, trace)``.
    """
    n = w.shape[0]
    if free is None:
        free = np.arange(n)
    free = np.asarray(free, dtype=np.int64)
    mask = np.zeros(n, dtype=bool)
    mask[free] = True
    fixed = np.flatnonzero(~mask)
    w_ss = w[np.ix_(free, free)]
    coupling = None
    if fixed.size:
        coupling = partial_coupling(w, free, fixed, np.asarray(fixed_labels)[fixed], k)
    if not np.any(w_ss) and (coupling is None or not np.any(coupling)):
        # constant objective: every labelling is optimal, take the canonical one
        return np.zeros(free.size, dtype=np.int64), SolveTrace(converged=True)
    if method in ("gp-pmd", "gp-pgp"):
        inner = "md" if method == "gp-pmd" else "pgp"
        x, trace = solve_relaxed(w_ss, k, config, coupling=coupling, method=inner)
        labels = round_labels(x)
    elif method == "gp-ls":
        labels = np.random.default_rng(config.seed).integers(k, size=free.size)
        trace = SolveTrace(converged=True)
    else:
        raise ValueError(f"unknown partition method {method!r}")
    offset = None if coupling is None else 2.0 * coupling.T
    labels = refine(w_ss, labels, k, offset=offset)
    return labels, trace


def _map(fn, items, max_workers):
    if max_workers is not None and max_workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _finish(graph, r30, q, stages, traces, timings, t_start):
    t = time.perf_counter()
    q_fixed, moved = repair_range(graph, r30, q)
    timings["repair"] = time.perf_counter() - t
    plan = PciPlan(30 * q_fixed + r30)
    stages.update(q_raw=q, q=q_fixed, r30=r30)
    timings["total"] = time.perf_counter() - t_start
    report = evaluate_plan(graph, plan, wall_time=timings["total"])
    return PipelineResult(plan, report, traces, timings, stages, moved)


def assign_pci(graph, config=SolverConfig(), method="gp-pmd", max_workers=None):
    """Full PCI assignment; ``method`` picks the Min-k-Partition strategy."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method == "ggc":
        return greedy_coloring_plan(graph)
    t_start = time.perf_counter()
    w = graph.weights
    n = graph.n
    traces, timings = {}, {}

    t = time.perf_counter()
    r3, traces["mod3"] = partition_cells(w, 3, _sub_config(config, STAGE_MOD3, 0), method)
    timings["mod3"] = time.perf_counter() - t

    t = time.perf_counter()
    r10 = np.zeros(n, dtype=np.int64)
    classes = [(r, np.flatnonzero(r3 == r)) for r in range(3)]
    classes = [(r, cells) for r, cells in classes if cells.size]

    def solve_class(item):
        r, cells = item
        sub = w[np.ix_(cells, cells)]
        return partition_cells(sub, 10, _sub_config(config, STAGE_MOD10, r), method)

    for (r, cells), (labels, trace) in zip(classes, _map(solve_class, classes, max_workers)):
        r10[cells] = labels
        traces[f"mod10[{r}]"] = trace
    timings["mod10"] = time.perf_counter() - t

    r30 = crt_merge(r3, r10)
    t = time.perf_counter()
    q = assign_quotients(graph, r30, max_workers=max_workers)
    timings["quotient"] = time.perf_counter() - t
    return _finish(graph, r30, q, {"r3": r3, "r10": r10}, traces, timings, t_start)


def assign_pci_partial(graph, changeable, config=SolverConfig(), method="gp-pmd", max_workers=None):
    """Re-plan only the changeable cells; all other PCIs are kept as-is."""
    if method not in ("gp-pmd", "gp-pgp", "gp-ls"):
        raise ValueError("partial updates support gp-pmd, gp-pgp and gp-ls")
    if changeable.n != graph.n:
        raise ValueError("changeable set and graph sizes differ")
    t_start = time.perf_counter()
    base = changeable.baseline
    free = changeable.changeable
    if free.size == 0:
        return PipelineResult(base, evaluate_plan(graph, base, wall_time=0.0))
    w = graph.weights
    traces, timings = {}, {}

    t = time.perf_counter()
    r3 = np.array(base.r3)
    r3[free], traces["mod3"] = partition_cells(
        w, 3, _sub_config(config, STAGE_MOD3, 0), method, fixed_labels=base.r3, free=free
    )
    timings["mod3"] = time.perf_counter() - t

    t = time.perf_counter()
    r10 = np.array(base.r10)
    mask = changeable.mask
    items = []
    for r in range(3):
        cells = np.flatnonzero(r3 == r)
        local_free = np.flatnonzero(mask[cells])
        if local_free.size:
            items.append((r, cells, local_free))

    def solve_class(item):
        r, cells, local_free = item
        sub = w[np.ix_(cells, cells)]
        return partition_cells(
            sub, 10, _sub_config(config, STAGE_MOD10, r), method,
            fixed_labels=base.r10[cells], free=local_free,
        )

    for (r, cells, local_free), (labels, trace) in zip(items, _map(solve_class, items, max_workers)):
        r10[cells[local_free]] = labels
        traces[f"mod10[{r}]"] = trace
    timings["mod10"] = time.perf_counter() - t

    r30 = np.array(base.r)
    r30[free] = crt_merge(r3[free], r10[free])
    t = time.perf_counter()
    q = assign_quotients_partial(graph, r30, changeable, max_workers=max_workers)
    timings["quotient"] = time.perf_counter() - t
    return _finish(graph, r30, q, {"r3": r3, "r10": r10}, traces, timings, t_start)


def greedy_coloring_plan(graph):
    """Coloring-only reference: greedy-color E1 | E2 and use the color as PCI.

    Removes collisions and confusions but ignores interference entirely.
    """
    t = time.perf_counter()
    colors = greedy_color(ColoringGraph(tuple(range(graph.n)), frozenset(graph.conflicts)))
    pci = np.array([colors[i] for i in range(graph.n)], dtype=np.int64)
    if pci.size and pci.max() > PCI_MAX:
        logger.warning("greedy coloring used %d colors; folding into [0, %d]", pci.max() + 1, PCI_MAX)
        pci %= N_PCI
    plan = PciPlan(pci)
    elapsed = time.perf_counter() - t
    return PipelineResult(plan, evaluate_plan(graph, plan, wall_time=elapsed), timings={"total": elapsed})
