"""scikit-learn style front ends for the partition solver and the PCI planner."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_symmetric

from .evaluate import objective_of_labels
from .graph import ChangeableSet, InterferenceGraph
from .local_search import refine
from .pipeline import METHODS, assign_pci, assign_pci_partial
from .simplex import SolverConfig, round_labels, solve_relaxed


def _seed(random_state):
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1)[0])
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    raise ValueError("random_state must be an int or None")


class _SolverParams:
    def _config(self):
        return SolverConfig(
            rho0=self.rho0,
            gamma=self.gamma,
            eps1=self.eps1,
            eps2=self.eps2,
            max_inner=self.max_inner,
            max_outer=self.max_outer,
            seed=_seed(self.random_state),
        )


def check_affinity(X):
    """Validate a precomputed interference matrix: square, symmetric, >= 0.

    Returns a float copy with the diagonal zeroed.
    """
    X = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
    if X.shape[0] != X.shape[1]:
        raise ValueError(f"interference matrix must be square, got {X.shape}")
    X = check_symmetric(X, raise_exception=True)
    if np.any(X < 0):
        raise ValueError("interference matrix must be non-negative")
    X = X.copy()
    np.fill_diagonal(X, 0.0)
    return X


class MinKPartition(_SolverParams, ClusterMixin, BaseEstimator):
    """Min-k-Partition of a precomputed interference matrix.

    ``fit(W)`` takes a symmetric non-negative ``n x n`` matrix and labels
    each row with one of ``n_partitions`` classes so that the total weight
    inside classes is small.

    Parameters
    ----------
    n_partitions : int
    solver : {"pmd", "pgp", "random"}
        ``pmd`` runs penalized KL mirror descent, ``pgp`` penalized projected
        gradient, ``random`` draws a random labelling (useful with local
        search as a baseline).
    local_search : bool
        Finish with pairwise-swap refinement.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
    objective_ : float
        Ordered-pair intra-class weight of ``labels_``.
    relaxed_ : ndarray of shape (n_partitions, n) or None
        Final continuous iterate (None for ``solver="random"``).
    trace_ : SolveTrace or None
    converged_ : bool
    """

    def __init__(
        self,
        n_partitions=3,
        solver="pmd",
        local_search=True,
        rho0=1e-8,
        gamma=1.1,
        eps1=1e-5,
        eps2=1e-10,
        max_inner=100_000,
        max_outer=1000,
        random_state=0,
    ):
        self.n_partitions = n_partitions
        self.solver = solver
        self.local_search = local_search
        self.rho0 = rho0
        self.gamma = gamma
        self.eps1 = eps1
        self.eps2 = eps2
        self.max_inner = max_inner
        self.max_outer = max_outer
        self.random_state = random_state

    def fit(self, X, y=None):
        w = check_affinity(X)
        k = int(self.n_partitions)
        if k < 1:
            raise ValueError("n_partitions must be >= 1")
        config = self._config()
        if self.solver in ("pmd", "pgp"):
            method = "md" if self.solver == "pmd" else "pgp"
            x, trace = solve_relaxed(w, k, config, method=method)
            labels = round_labels(x)
            self.relaxed_ = x
            self.trace_ = trace
            self.converged_ = trace.converged
        elif self.solver == "random":
            labels = np.random.default_rng(config.seed).integers(k, size=w.shape[0])
            self.relaxed_ = None
            self.trace_ = None
            self.converged_ = True
        else:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.local_search:
            labels = refine(w, labels, k)
        self.labels_ = labels
        self.objective_ = objective_of_labels(w, labels)
        self.n_features_in_ = w.shape[1]
        return self

    def score(self, X, y=None):
        """Negative intra-class weight of the fitted labels on ``X``."""
        check_is_fitted(self, "labels_")
        return -objective_of_labels(check_affinity(X), self.labels_)


class PciPlanner(_SolverParams, BaseEstimator):
    """PCI assignment for an :class:`InterferenceGraph`.

    ``fit(graph)`` plans every cell; ``fit(graph, changeable=cs)`` only
    re-plans the changeable cells of ``cs`` and keeps the rest.

    Attributes
    ----------
    plan_ : PciPlan
    report_ : EvalReport
    result_ : PipelineResult
    """

    def __init__(
        self,
        method="gp-pmd",
        rho0=1e-8,
        gamma=1.1,
        eps1=1e-5,
        eps2=1e-10,
        max_inner=100_000,
        max_outer=1000,
        random_state=0,
        n_jobs=None,
    ):
        self.method = method
        self.rho0 = rho0
        self.gamma = gamma
        self.eps1 = eps1
        self.eps2 = eps2
        self.max_inner = max_inner
        self.max_outer = max_outer
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, graph, y=None, changeable=None):
        if not isinstance(graph, InterferenceGraph):
            graph = InterferenceGraph(weights=check_affinity(graph))
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        config = self._config()
        if changeable is None:
            result = assign_pci(graph, config, method=self.method, max_workers=self.n_jobs)
        else:
            if not isinstance(changeable, ChangeableSet):
                raise TypeError("changeable must be a ChangeableSet")
            result = assign_pci_partial(graph, changeable, config, method=self.method, max_workers=self.n_jobs)
        self.result_ = result
        self.plan_ = result.plan
        self.report_ = result.report
        return self

    def fit_predict(self, graph, y=None, changeable=None):
        """Fit and return the PCI vector."""
        return np.array(self.fit(graph, changeable=changeable).plan_.pci)
