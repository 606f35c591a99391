"""Model builders: extensive form, Benders master (three cut modes), subproblems.

Naming and indexing conventions used throughout the package:

* generators/farms/lines/nodes keep instance order; periods run 1..T and map
  to array column t-1;
* constraints with a single variable and a constant right-hand side (reserve
  offer caps, wind capacity, flow capacity, spill/shed caps, the initial
  commitment pins) are imposed as variable bounds, not rows -- except the
  theta lower bounds of the master, which are explicit rows so that the
  master row metric decomposes as first-stage rows + theta rows + cut rows;
* the DC flow convention is f = B * (angle_from - angle_to) with the
  reference node angle fixed to 0, and nodal balance reads
  generation + wind - load = outgoing flow - incoming flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import EQ, GE, LE, ModelHandle, SolveResult, SolveStatus, solve_lp
from .cuts import Cut, CutKind, CutMode, CutPool
from .data import ScenarioSet, SystemInstance

FEAS_TOL = 1e-6


class ModelBuildError(ValueError):
    pass


class SubproblemInfeasibleError(RuntimeError):
    """Complete recourse guarantees feasibility; this signals a bug."""


# -- variable/constraint name helpers -------------------------------------

def vu(g, t):
    return f"u[{g},{t}]"


def vy(g, t):
    return f"y[{g},{t}]"


def vz(g, t):
    return f"z[{g},{t}]"


def vp(g, t):
    return f"p[{g},{t}]"


def vrp(g, t):
    return f"rp[{g},{t}]"


def vrm(g, t):
    return f"rm[{g},{t}]"


def vw(j, t):
    return f"w[{j},{t}]"


def vf(l, t):
    return f"fhat[{l},{t}]"


def vdelta(n, t):
    return f"delta[{n},{t}]"


def vtheta(omega):
    return f"theta[{omega}]"


THETA_SINGLE = "theta"


@dataclass(frozen=True)
class FirstStageSolution:
    """Day-ahead decisions; reserve/wind/flow slices feed the Benders cuts."""
    u: np.ndarray        # |G| x T binary
    y: np.ndarray
    z: np.ndarray
    p: np.ndarray        # MW
    r_plus: np.ndarray
    r_minus: np.ndarray
    w: np.ndarray        # |J| x T
    f: np.ndarray        # |L| x T
    delta: np.ndarray    # |N| x T
    c_da: float          # $

    def cut_point(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.r_plus, self.r_minus, self.w, self.f


@dataclass(frozen=True)
class SubproblemResult:
    scenario_id: str
    objective: float        # Q_omega, $
    lam_rp: np.ndarray      # |G| x T duals of the r+ fixings
    lam_rm: np.ndarray
    lam_w: np.ndarray       # |J| x T
    lam_f: np.ndarray       # |L| x T


def day_ahead_cost(instance: SystemInstance, sol_p, sol_y, sol_rp, sol_rm) -> float:
    c = 0.0
    for i, g in enumerate(instance.generators):
        c += (g.energy_cost * sol_p[i].sum()
              + g.startup_cost * sol_y[i].sum()
              + g.res_up_cost * sol_rp[i].sum()
              + g.res_down_cost * sol_rm[i].sum())
    return float(c)


# -- first stage -----------------------------------------------------------

def _add_first_stage(model: ModelHandle, instance: SystemInstance,
                     objective: bool = True) -> None:
    T = instance.horizon
    for g in instance.generators:
        for t in range(1, T + 1):
            model.add_var(vu(g.id, t), binary=True)
            model.add_var(vy(g.id, t), binary=True,
                          obj=g.startup_cost if objective else 0.0)
            model.add_var(vz(g.id, t), binary=True)
            model.add_var(vp(g.id, t), lb=0.0,
                          obj=g.energy_cost if objective else 0.0)
            model.add_var(vrp(g.id, t), lb=0.0, ub=g.res_up_cap,
                          obj=g.res_up_cost if objective else 0.0)
            model.add_var(vrm(g.id, t), lb=0.0, ub=g.res_down_cap,
                          obj=g.res_down_cost if objective else 0.0)
            if t <= g.init_up_periods + g.init_down_periods:
                model.set_bounds(vu(g.id, t), float(g.init_status), float(g.init_status))
    for w in instance.wind_farms:
        for t in range(1, T + 1):
            model.add_var(vw(w.id, t), lb=0.0, ub=w.capacity)
    for ln in instance.lines:
        for t in range(1, T + 1):
            model.add_var(vf(ln.id, t), lb=-ln.capacity, ub=ln.capacity)
    for n in instance.nodes:
        for t in range(1, T + 1):
            free = n != instance.ref_node
            model.add_var(vdelta(n, t), lb=-np.inf if free else 0.0,
                          ub=np.inf if free else 0.0)

    for g in instance.generators:
        enforced = g.init_up_periods + g.init_down_periods
        for t in range(1, T + 1):
            if t > enforced:
                coeffs = {vy(g.id, tp): 1.0
                          for tp in range(max(1, t - g.min_up + 1), t + 1)}
                coeffs[vu(g.id, t)] = coeffs.get(vu(g.id, t), 0.0) - 1.0
                model.add_constr(f"minup[{g.id},{t}]", coeffs, LE, 0.0)
                coeffs = {vz(g.id, tp): 1.0
                          for tp in range(max(1, t - g.min_down + 1), t + 1)}
                coeffs[vu(g.id, t)] = coeffs.get(vu(g.id, t), 0.0) + 1.0
                model.add_constr(f"mindown[{g.id},{t}]", coeffs, LE, 1.0)
            # start-up/shut-down transition; t=1 references the initial status
            coeffs = {vy(g.id, t): 1.0, vz(g.id, t): -1.0, vu(g.id, t): -1.0}
            rhs = -float(g.init_status)
            if t > 1:
                coeffs[vu(g.id, t - 1)] = 1.0
                rhs = 0.0
            model.add_constr(f"logic[{g.id},{t}]", coeffs, EQ, rhs)
            model.add_constr(f"excl[{g.id},{t}]",
                             {vy(g.id, t): 1.0, vz(g.id, t): 1.0}, LE, 1.0)

            # ramping; initial power is u0 * p_min, initial reserves zero
            up = {vp(g.id, t): 1.0, vrp(g.id, t): 1.0, vy(g.id, t): -g.ramp_up}
            dn = {vp(g.id, t): -1.0, vrm(g.id, t): 1.0,
                  vu(g.id, t): -g.ramp_down, vz(g.id, t): -g.ramp_down}
            if t > 1:
                up[vp(g.id, t - 1)] = -1.0
                up[vrp(g.id, t - 1)] = -1.0
                up[vu(g.id, t - 1)] = -g.ramp_up
                up_rhs = 0.0
                dn[vp(g.id, t - 1)] = 1.0
                dn[vrm(g.id, t - 1)] = -1.0
                dn_rhs = 0.0
            else:
                p0 = g.init_status * g.p_min
                up_rhs = p0 + g.ramp_up * g.init_status
                dn_rhs = -p0
            model.add_constr(f"ramp_up[{g.id},{t}]", up, LE, up_rhs)
            model.add_constr(f"ramp_dn[{g.id},{t}]", dn, LE, dn_rhs)

            model.add_constr(f"pmin[{g.id},{t}]",
                             {vp(g.id, t): 1.0, vrm(g.id, t): -1.0,
                              vu(g.id, t): -g.p_min}, GE, 0.0)
            pmax = {vp(g.id, t): 1.0, vrp(g.id, t): 1.0, vu(g.id, t): -g.p_max}
            if t < T:
                pmax[vz(g.id, t + 1)] = g.p_max - g.ramp_down
            model.add_constr(f"pmax[{g.id},{t}]", pmax, LE, 0.0)

    gens_at = {n: [g for g in instance.generators if g.node == n] for n in instance.nodes}
    farms_at = {n: [w for w in instance.wind_farms if w.node == n] for n in instance.nodes}
    out_at = {n: [ln for ln in instance.lines if ln.from_node == n] for n in instance.nodes}
    in_at = {n: [ln for ln in instance.lines if ln.to_node == n] for n in instance.nodes}
    for n in instance.nodes:
        for t in range(1, T + 1):
            coeffs: dict = {}
            for g in gens_at[n]:
                coeffs[vp(g.id, t)] = 1.0
            for w in farms_at[n]:
                coeffs[vw(w.id, t)] = 1.0
            for ln in out_at[n]:
                coeffs[vf(ln.id, t)] = coeffs.get(vf(ln.id, t), 0.0) - 1.0
            for ln in in_at[n]:
                coeffs[vf(ln.id, t)] = coeffs.get(vf(ln.id, t), 0.0) + 1.0
            model.add_constr(f"balance[{n},{t}]", coeffs, EQ, instance.load_at(n, t))
    for ln in instance.lines:
        for t in range(1, T + 1):
            model.add_constr(
                f"flowdef[{ln.id},{t}]",
                {vf(ln.id, t): 1.0, vdelta(ln.from_node, t): -ln.susceptance,
                 vdelta(ln.to_node, t): ln.susceptance}, EQ, 0.0)


def first_stage_row_count(instance: SystemInstance) -> int:
    """Number of first-stage constraint rows under this package's conventions."""
    T = instance.horizon
    rows = 0
    for g in instance.generators:
        enforced = g.init_up_periods + g.init_down_periods
        rows += 2 * max(0, T - enforced)     # min up/down
        rows += 6 * T                        # logic, excl, 2 ramps, pmin, pmax
    rows += T * (instance.n_nodes + instance.n_lines)
    return rows


def second_stage_row_count(instance: SystemInstance) -> int:
    """Per-scenario second-stage rows (balance, reserve limits, flow defs)."""
    T = instance.horizon
    return T * (instance.n_nodes + 2 * instance.n_gens + instance.n_lines)


# -- second stage ----------------------------------------------------------

def _add_second_stage(model: ModelHandle, instance: SystemInstance,
                      scenarios: ScenarioSet, omega: str,
                      prob_weight: float) -> None:
    """Recourse variables/constraints for one scenario.

    ``prob_weight`` scales the recourse objective terms (pi_omega in the
    extensive form, 1.0 in a standalone subproblem).  Shares the first-stage
    variable names rp/rm/w/fhat, which must already exist in the model.
    """
    T = instance.horizon
    s = omega
    for g in instance.generators:
        for t in range(1, T + 1):
            model.add_var(f"pp[{g.id},{t},{s}]", lb=0.0,
                          obj=prob_weight * g.deploy_up_price)
            model.add_var(f"pm[{g.id},{t},{s}]", lb=0.0,
                          obj=-prob_weight * g.deploy_down_price)
    for w in instance.wind_farms:
        for t in range(1, T + 1):
            model.add_var(f"spill[{w.id},{t},{s}]", lb=0.0,
                          ub=scenarios.value(s, w.id, t))
    for n in instance.nodes:
        for t in range(1, T + 1):
            model.add_var(f"shed[{n},{t},{s}]", lb=0.0, ub=instance.load_at(n, t),
                          obj=prob_weight * instance.shed_cost)
            free = n != instance.ref_node
            model.add_var(f"dtil[{n},{t},{s}]", lb=-np.inf if free else 0.0,
                          ub=np.inf if free else 0.0)
    for ln in instance.lines:
        for t in range(1, T + 1):
            model.add_var(f"ftil[{ln.id},{t},{s}]", lb=-ln.capacity, ub=ln.capacity)

    for g in instance.generators:
        for t in range(1, T + 1):
            model.add_constr(f"resup[{g.id},{t},{s}]",
                             {f"pp[{g.id},{t},{s}]": 1.0, vrp(g.id, t): -1.0}, LE, 0.0)
            model.add_constr(f"resdn[{g.id},{t},{s}]",
                             {f"pm[{g.id},{t},{s}]": 1.0, vrm(g.id, t): -1.0}, LE, 0.0)
    gens_at = {n: [g for g in instance.generators if g.node == n] for n in instance.nodes}
    farms_at = {n: [w for w in instance.wind_farms if w.node == n] for n in instance.nodes}
    out_at = {n: [ln for ln in instance.lines if ln.from_node == n] for n in instance.nodes}
    in_at = {n: [ln for ln in instance.lines if ln.to_node == n] for n in instance.nodes}
    for n in instance.nodes:
        for t in range(1, T + 1):
            coeffs: dict = {f"shed[{n},{t},{s}]": 1.0}
            rhs = 0.0
            for g in gens_at[n]:
                coeffs[f"pp[{g.id},{t},{s}]"] = 1.0
                coeffs[f"pm[{g.id},{t},{s}]"] = -1.0
            for w in farms_at[n]:
                rhs -= scenarios.value(s, w.id, t)
                coeffs[vw(w.id, t)] = -1.0
                coeffs[f"spill[{w.id},{t},{s}]"] = -1.0
            for ln in out_at[n]:
                coeffs[f"ftil[{ln.id},{t},{s}]"] = coeffs.get(f"ftil[{ln.id},{t},{s}]", 0.0) - 1.0
                coeffs[vf(ln.id, t)] = coeffs.get(vf(ln.id, t), 0.0) + 1.0
            for ln in in_at[n]:
                coeffs[f"ftil[{ln.id},{t},{s}]"] = coeffs.get(f"ftil[{ln.id},{t},{s}]", 0.0) + 1.0
                coeffs[vf(ln.id, t)] = coeffs.get(vf(ln.id, t), 0.0) - 1.0
            model.add_constr(f"balance2[{n},{t},{s}]", coeffs, EQ, rhs)
    for ln in instance.lines:
        for t in range(1, T + 1):
            model.add_constr(
                f"flowdef2[{ln.id},{t},{s}]",
                {f"ftil[{ln.id},{t},{s}]": 1.0,
                 f"dtil[{ln.from_node},{t},{s}]": -ln.susceptance,
                 f"dtil[{ln.to_node},{t},{s}]": ln.susceptance}, EQ, 0.0)


# -- public builders -------------------------------------------------------

def build_extensive(instance: SystemInstance, scenarios: ScenarioSet) -> ModelHandle:
    """One MILP with the first stage and all scenario recourse blocks."""
    model = ModelHandle(f"{instance.name}-extensive")
    _add_first_stage(model, instance)
    for omega, pi in zip(scenarios.scenario_ids, scenarios.probabilities):
        _add_second_stage(model, instance, scenarios, omega, pi)
    return model


def build_master(instance: SystemInstance, scenarios: ScenarioSet, mode: CutMode,
                 pool: CutPool, theta_min: float,
                 fixed_commitments: dict | None = None) -> ModelHandle:
    """Benders master MILP for the given cut mode and pool state.

    ``fixed_commitments`` maps (generator id, period) to 0/1 and is applied
    by bound tightening on the u variables.
    """
    model = ModelHandle(f"{instance.name}-master-{mode.value}")
    _add_first_stage(model, instance)
    if fixed_commitments:
        for (g, t), val in fixed_commitments.items():
            model.set_bounds(vu(g, t), float(val), float(val))

    if mode is CutMode.SINGLE:
        model.add_var(THETA_SINGLE, lb=-np.inf, obj=1.0)
        model.add_constr("theta_lb", {THETA_SINGLE: 1.0}, GE, theta_min)
    else:
        for omega, pi in zip(scenarios.scenario_ids, scenarios.probabilities):
            model.add_var(vtheta(omega), lb=-np.inf, obj=pi)
            model.add_constr(f"theta_lb[{omega}]", {vtheta(omega): 1.0}, GE, theta_min)

    for cut in pool.live_cuts():
        _materialize_cut(model, instance, scenarios, mode, cut)
    return model


def _cut_var_terms(instance: SystemInstance, cut: Cut) -> tuple[dict, float]:
    """Linear terms of Theta(x) over master variables, plus the constant part."""
    T = instance.horizon
    coeffs: dict = {}
    const = cut.intercept
    for i, g in enumerate(instance.generators):
        for t in range(1, T + 1):
            for lam, anchor, name in (
                (cut.lam_rp, cut.anchor_rp, vrp(g.id, t)),
                (cut.lam_rm, cut.anchor_rm, vrm(g.id, t)),
            ):
                c = lam[i, t - 1]
                if c != 0.0:
                    coeffs[name] = coeffs.get(name, 0.0) + c
                const -= c * anchor[i, t - 1]
    for j, w in enumerate(instance.wind_farms):
        for t in range(1, T + 1):
            c = cut.lam_w[j, t - 1]
            if c != 0.0:
                coeffs[vw(w.id, t)] = coeffs.get(vw(w.id, t), 0.0) + c
            const -= c * cut.anchor_w[j, t - 1]
    for k, ln in enumerate(instance.lines):
        for t in range(1, T + 1):
            c = cut.lam_f[k, t - 1]
            if c != 0.0:
                coeffs[vf(ln.id, t)] = coeffs.get(vf(ln.id, t), 0.0) + c
            const -= c * cut.anchor_f[k, t - 1]
    return coeffs, const


def _materialize_cut(model: ModelHandle, instance: SystemInstance,
                     scenarios: ScenarioSet, mode: CutMode, cut: Cut) -> None:
    all_ids = set(scenarios.scenario_ids)
    if not set(cut.members).issubset(all_ids):
        raise ModelBuildError(f"cut {cut.row_name()} references unknown scenarios")
    coeffs, const = _cut_var_terms(instance, cut)
    # row: theta terms - lambda . x >= intercept - lambda . anchor
    row = {v: -c for v, c in coeffs.items()}
    if mode is CutMode.SINGLE:
        if cut.kind is CutKind.PER_SCENARIO or set(cut.members) != all_ids:
            raise ModelBuildError(
                "single-cut master requires fully aggregated cuts "
                f"(got {cut.kind.value} cut {cut.row_name()})")
        row[THETA_SINGLE] = 1.0
    elif cut.kind is CutKind.PER_SCENARIO:
        if mode is not CutMode.MULTI:
            raise ModelBuildError("per-scenario cuts require the multi-cut master")
        row[vtheta(cut.members[0])] = 1.0
    else:
        if mode is not CutMode.AGGREGATED:
            raise ModelBuildError(
                f"{cut.kind.value} cut {cut.row_name()} requires the aggregated master")
        for omega, pi in cut.theta_weights.items():
            row[vtheta(omega)] = row.get(vtheta(omega), 0.0) + pi
    model.add_constr(cut.row_name(), row, GE, const)


def build_subproblem(instance: SystemInstance, scenarios: ScenarioSet, omega: str,
                     x_hat: FirstStageSolution) -> ModelHandle:
    """Per-scenario recourse LP with equality fixings of r+/r-/w/fhat."""
    model = ModelHandle(f"{instance.name}-sub-{omega}")
    T = instance.horizon
    for i, g in enumerate(instance.generators):
        for t in range(1, T + 1):
            model.add_var(vrp(g.id, t), lb=0.0, ub=g.res_up_cap)
            model.add_var(vrm(g.id, t), lb=0.0, ub=g.res_down_cap)
    for w in instance.wind_farms:
        for t in range(1, T + 1):
            model.add_var(vw(w.id, t), lb=0.0, ub=w.capacity)
    for ln in instance.lines:
        for t in range(1, T + 1):
            model.add_var(vf(ln.id, t), lb=-ln.capacity, ub=ln.capacity)
    _add_second_stage(model, instance, scenarios, omega, 1.0)
    # first-stage values can sit a solver tolerance outside the variable box
    # (e.g. a flow at capacity + 1e-9); clamp so the fixing row stays feasible
    for i, g in enumerate(instance.generators):
        for t in range(1, T + 1):
            model.add_constr(f"fix_rp[{g.id},{t}]", {vrp(g.id, t): 1.0}, EQ,
                             min(max(x_hat.r_plus[i, t - 1], 0.0), g.res_up_cap))
            model.add_constr(f"fix_rm[{g.id},{t}]", {vrm(g.id, t): 1.0}, EQ,
                             min(max(x_hat.r_minus[i, t - 1], 0.0), g.res_down_cap))
    for j, w in enumerate(instance.wind_farms):
        for t in range(1, T + 1):
            model.add_constr(f"fix_w[{w.id},{t}]", {vw(w.id, t): 1.0}, EQ,
                             min(max(x_hat.w[j, t - 1], 0.0), w.capacity))
    for k, ln in enumerate(instance.lines):
        for t in range(1, T + 1):
            model.add_constr(f"fix_f[{ln.id},{t}]", {vf(ln.id, t): 1.0}, EQ,
                             min(max(x_hat.f[k, t - 1], -ln.capacity), ln.capacity))
    return model


def solve_subproblem(instance: SystemInstance, scenarios: ScenarioSet, omega: str,
                     x_hat: FirstStageSolution) -> SubproblemResult:
    model = build_subproblem(instance, scenarios, omega, x_hat)
    res = solve_lp(model)
    if res.status is not SolveStatus.OPTIMAL:
        raise SubproblemInfeasibleError(
            f"subproblem for scenario {omega} returned {res.status.value}; "
            "complete recourse should make this impossible")
    T = instance.horizon
    lam_rp = np.array([[res.dual[f"fix_rp[{g.id},{t}]"] for t in range(1, T + 1)]
                       for g in instance.generators])
    lam_rm = np.array([[res.dual[f"fix_rm[{g.id},{t}]"] for t in range(1, T + 1)]
                       for g in instance.generators])
    lam_w = np.array([[res.dual[f"fix_w[{w.id},{t}]"] for t in range(1, T + 1)]
                      for w in instance.wind_farms])
    lam_f = np.array([[res.dual[f"fix_f[{ln.id},{t}]"] for t in range(1, T + 1)]
                      for ln in instance.lines])
    return SubproblemResult(omega, res.objective, lam_rp, lam_rm, lam_w, lam_f)


def evaluate_cut(cut: Cut, x: FirstStageSolution) -> float:
    """Theta(x): the cut's estimate of (probability-weighted) recourse cost at x."""
    return cut.evaluate(*x.cut_point())


# -- solution extraction ---------------------------------------------------

def extract_first_stage(instance: SystemInstance, result: SolveResult) -> FirstStageSolution:
    T = instance.horizon
    val = result.primal.__getitem__

    def grid(namer, items):
        return np.array([[val(namer(x.id, t)) for t in range(1, T + 1)] for x in items]) \
            if items else np.zeros((0, T))

    u = np.rint(grid(vu, instance.generators))
    y = np.rint(grid(vy, instance.generators))
    z = np.rint(grid(vz, instance.generators))
    p = grid(vp, instance.generators)
    rp = grid(vrp, instance.generators)
    rm = grid(vrm, instance.generators)
    w = grid(vw, instance.wind_farms)
    f = grid(vf, instance.lines)
    delta = np.array([[val(vdelta(n, t)) for t in range(1, T + 1)]
                      for n in instance.nodes])
    c_da = day_ahead_cost(instance, p, y, rp, rm)
    return FirstStageSolution(u, y, z, p, rp, rm, w, f, delta, c_da)


def first_stage_violation(instance: SystemInstance, sol: FirstStageSolution) -> float:
    """Max constraint violation of the day-ahead block; <= FEAS_TOL when feasible."""
    model = ModelHandle("check")
    _add_first_stage(model, instance)
    values: dict[str, float] = {}
    T = instance.horizon
    for i, g in enumerate(instance.generators):
        for t in range(1, T + 1):
            values[vu(g.id, t)] = sol.u[i, t - 1]
            values[vy(g.id, t)] = sol.y[i, t - 1]
            values[vz(g.id, t)] = sol.z[i, t - 1]
            values[vp(g.id, t)] = sol.p[i, t - 1]
            values[vrp(g.id, t)] = sol.r_plus[i, t - 1]
            values[vrm(g.id, t)] = sol.r_minus[i, t - 1]
    for j, w in enumerate(instance.wind_farms):
        for t in range(1, T + 1):
            values[vw(w.id, t)] = sol.w[j, t - 1]
    for k, ln in enumerate(instance.lines):
        for t in range(1, T + 1):
            values[vf(ln.id, t)] = sol.f[k, t - 1]
    for m, n in enumerate(instance.nodes):
        for t in range(1, T + 1):
            values[vdelta(n, t)] = sol.delta[m, t - 1]
    worst = 0.0
    for row in model._rows.values():
        lhs = sum(c * values[v] for v, c in row.coeffs.items())
        if row.sense == LE:
            worst = max(worst, lhs - row.rhs)
        elif row.sense == GE:
            worst = max(worst, row.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - row.rhs))
    for var in model._vars.values():
        x = values.get(var.name)
        if x is None:
            continue
        worst = max(worst, var.lb - x, x - var.ub)
    return float(worst)


def sample_feasible_first_stage(instance: SystemInstance, rng: np.random.Generator,
                                mip_gap: float = 1e-6) -> FirstStageSolution:
    """A random feasible day-ahead point, via a randomized-objective MILP solve."""
    from .backend import solve_milp

    model = ModelHandle("sample")
    _add_first_stage(model, instance, objective=False)
    for name in model.var_names:
        model._vars[name].obj = float(rng.uniform(-1.0, 1.0))
    res = solve_milp(model, mip_gap=mip_gap)
    if res.status is not SolveStatus.OPTIMAL:
        raise ModelBuildError(f"first-stage sampling solve returned {res.status.value}")
    return extract_first_stage(instance, res)


def default_theta_min(instance: SystemInstance) -> float:
    """Provable recourse lower bound: only the -C^- p^- terms can be negative,
    and p^- is capped by the reserve offer limit."""
    T = instance.horizon
    return -float(sum(g.deploy_down_price * g.res_down_cap
                      for g in instance.generators)) * T
