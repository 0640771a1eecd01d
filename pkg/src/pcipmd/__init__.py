"""Relaxation-free Min-k-Partition by penalized mirror descent, and the
CRT-decomposed PCI assignment pipeline built on it."""

from .coloring import assign_quotients, assign_quotients_partial, greedy_color, repair_range
from .crt import crt_merge
from .estimators import MinKPartition, PciPlanner
from .evaluate import EvalReport, brute_force_min_k_partition, evaluate_plan, objective_of_labels
from .graph import (
    ChangeableSet,
    InstanceError,
    InterferenceGraph,
    PciPlan,
    decompose_pci,
    derive_second_order,
    load_instance,
    save_instance,
)
from .instances import RggConfig, SyntheticWConfig, compute_stats, generate_random_w, generate_rgg
from .local_search import pair_move_delta, refine
from .pipeline import PipelineResult, assign_pci, assign_pci_partial
from .simplex import (
    SolverCapWarning,
    SolverConfig,
    SolveTrace,
    exactness_threshold,
    solve_min_k_partition,
    solve_partial,
    solve_pgp_variant,
)

__version__ = "0.1.0"
