"""Benders iteration driver: master solve, parallel subproblems, bounds,
convergence, and cut-pool updates.

Per iteration: solve the master MILP, read the lower bound and the candidate
first-stage point, solve all scenario subproblems in parallel, update the
upper bound, test convergence, then add cuts per the configured mode.  In
aggregated mode the cluster count is adapted from the lower-bound delta
before the new cuts are generated, and consolidation (when enabled) is
driven by cut-row duals taken from an LP re-solve of the master with the
binaries fixed at their optimal values.
"""

from __future__ import annotations

import enum
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import clustering
from .backend import LE, SolveStatus, solve_lp, solve_milp
from .cuts import (CutKind, CutMode, CutPool, adapt_cluster_count,
                   aggregate_and_add, make_full_aggregate_cut,
                   make_per_scenario_cuts, select_attributes,
                   track_and_consolidate)
from .data import ScenarioSet, SystemInstance
from .formulations import (FirstStageSolution, SubproblemResult, build_master,
                           default_theta_min, extract_first_stage,
                           solve_subproblem)


class EngineError(RuntimeError):
    pass


class RunStatus(enum.Enum):
    CONVERGED = "converged"
    NOT_CONVERGED = "not-converged"
    CANCELED = "canceled"


@dataclass
class BendersConfig:
    mode: CutMode = CutMode.MULTI
    eps: float = 1e-6                 # convergence threshold, $
    mip_gap: float = 1e-6
    theta_min: float | None = None    # derived from the instance when None
    max_iters: int = 500
    alpha: float = 0.01               # dead-band base fraction
    zeta: float = 0.75                # dead-band width fraction
    rho: int = 5                      # cluster increment
    kappa: int = 5                    # consolidation inactivity threshold
    initial_clusters: int = 1
    adaptive: bool = True             # dead-band control of the cluster count
    clustering_method: str = "hierarchical"   # or "kmeans"
    attribute: str = "duals"          # or "objective", "wind"
    consolidate: bool = False
    workers: int = 1
    tie_break: bool = False           # deterministic choice among alternate master optima

    def validate(self, n_scenarios: int) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if not (0 < self.zeta < 1):
            raise ValueError("zeta must be in (0, 1)")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if not (1 <= self.initial_clusters <= n_scenarios):
            raise ValueError("initial_clusters must be in [1, |Omega|]")
        if self.clustering_method not in ("hierarchical", "kmeans"):
            raise ValueError(f"unknown clustering method {self.clustering_method!r}")


@dataclass
class IterationRecord:
    iteration: int
    lower_bound: float
    upper_bound: float        # best so far
    ub_candidate: float
    clusters: int
    master_rows: int
    master_time: float
    max_sub_time: float

    def trace_line(self) -> str:
        gap = self.upper_bound - self.lower_bound
        return json.dumps({
            "iter": self.iteration, "lb": self.lower_bound, "ub": self.upper_bound,
            "gap": gap, "clusters": self.clusters, "master_rows": self.master_rows,
            "master_time_s": self.master_time, "max_sub_time_s": self.max_sub_time,
        })


@dataclass
class BendersState:
    iteration: int = 0
    lower_bound: float = -np.inf
    upper_bound: float = np.inf
    cluster_count: int = 1
    history: list = field(default_factory=list)
    incumbent: FirstStageSolution | None = None


@dataclass
class ConvergedSolution:
    status: RunStatus
    objective: float | None
    first_stage: FirstStageSolution | None
    state: BendersState
    pool: CutPool
    final_master_rows: int
    wall_time: float
    iterations: int


def compute_bounds(c_da: float, results: list, pi: dict,
                   master_objective: float) -> tuple[float, float]:
    """Upper-bound candidate C_DA + sum(pi * Q) and the master lower bound."""
    missing = set(pi) - {r.scenario_id for r in results}
    if missing:
        raise EngineError(f"missing subproblem results for scenarios: {sorted(missing)}")
    ub = c_da + sum(pi[r.scenario_id] * r.objective for r in results)
    return float(ub), float(master_objective)


def solve_subproblems(instance: SystemInstance, scenarios: ScenarioSet,
                      x_hat: FirstStageSolution, workers: int = 1
                      ) -> tuple[list[SubproblemResult], float]:
    """All scenario recourse LPs at x_hat; returns (results, max solve time)."""
    def one(omega):
        t0 = time.perf_counter()
        res = solve_subproblem(instance, scenarios, omega, x_hat)
        return res, time.perf_counter() - t0

    if workers <= 1:
        pairs = [one(s) for s in scenarios.scenario_ids]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(one, scenarios.scenario_ids))
    results = [p[0] for p in pairs]
    max_time = max(p[1] for p in pairs)
    return results, max_time


def _cluster(method: str, features: np.ndarray, k: int):
    k = min(k, len(features))
    if method == "hierarchical":
        return clustering.hierarchical(features, k)
    return clustering.kmeans(features, k)


def run(instance: SystemInstance, scenarios: ScenarioSet, config: BendersConfig,
        fixed_commitments: dict | None = None,
        trace: Callable[[str], None] | None = None,
        should_stop: Callable[[], bool] | None = None) -> ConvergedSolution:
    """Iterate the decomposition to convergence |ub - lb| <= eps."""
    config.validate(scenarios.n_scenarios)
    theta_min = (config.theta_min if config.theta_min is not None
                 else default_theta_min(instance))
    pi = dict(zip(scenarios.scenario_ids, scenarios.probabilities))
    pool = CutPool()
    state = BendersState(cluster_count=config.initial_clusters)
    attr_cache: dict = {}
    t_start = time.perf_counter()
    status = RunStatus.NOT_CONVERGED
    final_rows = 0

    for nu in range(1, config.max_iters + 1):
        if should_stop is not None and should_stop():
            status = RunStatus.CANCELED
            break
        state.iteration = nu

        master = build_master(instance, scenarios, config.mode, pool, theta_min,
                              fixed_commitments=fixed_commitments)
        mres = solve_milp(master, mip_gap=config.mip_gap)
        if mres.status is not SolveStatus.OPTIMAL:
            raise EngineError(
                f"master solve failed at iteration {nu}: {mres.status.value} "
                f"{mres.message}")
        final_rows = mres.row_count
        prev_lb = state.lower_bound
        # the master only gains rows, so its optimum cannot decrease; clamp
        # away sub-tolerance solver noise to keep the reported bound monotone
        state.lower_bound = max(prev_lb, mres.objective)
        if config.tie_break:
            x_hat = extract_first_stage(
                instance, _tie_break_master(master, mres, config.mip_gap))
        else:
            x_hat = extract_first_stage(instance, mres)

        # adapt the cluster count from the lower-bound delta before this
        # iteration's cuts are generated
        if (config.mode is CutMode.AGGREGATED and config.adaptive
                and nu >= 2 and np.isfinite(prev_lb)):
            ref_ub = state.upper_bound if np.isfinite(state.upper_bound) else state.lower_bound
            state.cluster_count = adapt_cluster_count(
                state.lower_bound - prev_lb, ref_ub, state.cluster_count,
                config.alpha, config.zeta, config.rho, scenarios.n_scenarios)

        results, max_sub_time = solve_subproblems(instance, scenarios, x_hat,
                                                  config.workers)
        ub_candidate, _ = compute_bounds(x_hat.c_da, results, pi, mres.objective)
        if ub_candidate < state.upper_bound:
            state.upper_bound = ub_candidate
            state.incumbent = x_hat

        record = IterationRecord(nu, state.lower_bound, state.upper_bound,
                                 ub_candidate, state.cluster_count,
                                 mres.row_count, mres.solve_time, max_sub_time)
        state.history.append(record)
        if trace is not None:
            trace(record.trace_line())

        if abs(state.upper_bound - state.lower_bound) <= config.eps:
            status = RunStatus.CONVERGED
            break

        # consolidation needs the cut-row duals of the master just solved
        if (config.mode is CutMode.AGGREGATED and config.consolidate
                and pool.row_contribution):
            mu = _master_row_duals(master, mres)
            track_and_consolidate(pool, mu, config.kappa)

        if config.mode is CutMode.MULTI:
            for cut in make_per_scenario_cuts(results, x_hat, nu):
                pool.add(cut)
        elif config.mode is CutMode.SINGLE:
            pool.add(make_full_aggregate_cut(results, pi, x_hat, nu))
        else:
            features = select_attributes(config.attribute, results, scenarios,
                                         instance, attr_cache)
            assignment = _cluster(config.clustering_method, features,
                                  state.cluster_count)
            aggregate_and_add(pool, results, x_hat, pi, assignment.labels, nu)

    objective = state.upper_bound if status is RunStatus.CONVERGED else None
    return ConvergedSolution(status, objective, state.incumbent, state, pool,
                             final_rows, time.perf_counter() - t_start,
                             state.iteration)


def _tie_break_master(master, mres, mip_gap: float):
    """Pick one master optimum deterministically when several are tied.

    The master's optimal first-stage point is generally not unique, and which
    vertex the solver returns depends on incidental matrix layout (e.g. one
    recourse variable vs one per scenario).  Pin the original objective at
    its optimal value and minimize a fixed generic weighting of the
    first-stage columns instead; the weights depend only on variable names,
    so equivalent masters in different cut modes select the same point.
    """
    m = master.copy()
    slack = 1e-9 * max(1.0, abs(mres.objective))
    m.add_constr("objective_pin", m.objective_coeffs(), LE,
                 mres.objective + slack)
    stage_one = sorted(n for n in m.var_names if not n.startswith("theta"))
    weights = np.random.default_rng(2083).uniform(1.0, 2.0, len(stage_one))
    for name in m.var_names:
        m.set_objective_coeff(name, 0.0)
    for name, w in zip(stage_one, weights):
        m.set_objective_coeff(name, w)
    res = solve_milp(m, mip_gap=mip_gap)
    if res.status is not SolveStatus.OPTIMAL:
        raise EngineError(f"tie-break re-solve failed: {res.status.value} {res.message}")
    return res


def _master_row_duals(master, mres) -> dict:
    """Duals of the master rows via an LP re-solve with binaries fixed."""
    binaries = {n: mres.primal[n] for n in master.var_names
                if master._vars[n].binary}
    relaxed = master.fixed_copy(binaries, relax=True)
    lres = solve_lp(relaxed)
    if lres.status is not SolveStatus.OPTIMAL:
        raise EngineError(f"master LP re-solve failed: {lres.status.value}")
    return lres.dual
