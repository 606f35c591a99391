"""Subset formation, gamma cutoff, commitment intersection, two-pass solve."""

import numpy as np
import pytest

from sucbenders.backend import solve_milp
from sucbenders.clustering import ClusterAssignment
from sucbenders.cuts import CutMode
from sucbenders.data import ScenarioSet
from sucbenders.engine import BendersConfig
from sucbenders.formulations import build_extensive
from sucbenders.outer import (OuterError, SubsetOutcome, SubsetStatus,
                              form_subsets, intersect_commitments,
                              plan_from_assignment, run_outer, solve_subsets)


def _six_scenario_set():
    ids = tuple(f"w{i}" for i in range(1, 7))
    reals = {(sc, "f1", 1): float(i) for i, sc in enumerate(ids)}
    return ScenarioSet(ids, tuple([1 / 6] * 6), reals)


def test_subset_formation_from_assignment():
    # clusters {w1,w2},{w3,w4},{w5,w6} with medoids w1,w3,w6: each subset is
    # its own cluster plus the two foreign medoids
    scen = _six_scenario_set()
    assignment = ClusterAssignment(3, (0, 0, 1, 1, 2, 2), medoids=(0, 2, 5))
    plan = plan_from_assignment(scen, assignment)
    assert plan.medoids == ("w1", "w3", "w6")
    assert plan.subsets == (
        ("w1", "w2", "w3", "w6"),
        ("w3", "w4", "w1", "w6"),
        ("w5", "w6", "w1", "w3"),
    )


def test_subset_probability_renormalization():
    scen = _six_scenario_set()
    assignment = ClusterAssignment(3, (0, 0, 1, 1, 2, 2), medoids=(0, 2, 5))
    plan = plan_from_assignment(scen, assignment)
    sub = scen.restrict(list(plan.subsets[0]))
    assert sum(sub.probabilities) == pytest.approx(1.0)
    assert set(sub.probabilities) == {0.25}


def test_form_subsets_range_checks(toy_a):
    inst, scen = toy_a
    with pytest.raises(OuterError):
        form_subsets(inst, scen, 1)
    with pytest.raises(OuterError):
        form_subsets(inst, scen, 4)
    with pytest.raises(OuterError):
        form_subsets(inst, scen, 2, gamma=0.0)


def test_form_subsets_partition(toy_a):
    inst, scen = toy_a
    plan = form_subsets(inst, scen, 2)
    members = [sc for cluster in plan.clusters for sc in cluster]
    assert sorted(members) == sorted(scen.scenario_ids)
    for c, subset in enumerate(plan.subsets):
        own = set(plan.clusters[c])
        foreign = set(subset) - own
        assert foreign == {m for e, m in enumerate(plan.medoids) if e != c}


def _outcome(i, u, status=SubsetStatus.COMPLETED):
    return SubsetOutcome(i, status, u, 1.0, 0.1, 3, 10)


def test_intersection_drops_disagreements(toy_a):
    inst, _ = toy_a
    u1 = np.ones((2, 4))
    u2 = np.ones((2, 4))
    u2[1, 2] = 0.0  # disagree at (g2, t3)
    fixed = intersect_commitments(inst, [_outcome(0, u1), _outcome(1, u2)])
    assert ("g2", 3) not in fixed
    assert len(fixed) == 7
    assert fixed[("g1", 1)] == 1


def test_intersection_single_outcome_fixes_everything(toy_a):
    inst, _ = toy_a
    u = np.zeros((2, 4))
    fixed = intersect_commitments(inst, [_outcome(0, u)])
    assert len(fixed) == 8
    assert set(fixed.values()) == {0}


def test_intersection_ignores_canceled(toy_a):
    inst, _ = toy_a
    u1 = np.ones((2, 4))
    canceled = SubsetOutcome(1, SubsetStatus.CANCELED, None, None, 0.1, 1, 0)
    fixed = intersect_commitments(inst, [_outcome(0, u1), canceled])
    assert len(fixed) == 8  # only the completed outcome counts


def test_intersection_requires_completed(toy_a):
    inst, _ = toy_a
    canceled = SubsetOutcome(0, SubsetStatus.CANCELED, None, None, 0.1, 1, 0)
    with pytest.raises(OuterError):
        intersect_commitments(inst, [canceled])


def test_gamma_cutoff_ceiling_semantics(toy_a):
    inst, scen = toy_a
    plan = form_subsets(inst, scen, 3, gamma=0.34)  # ceil(0.34*3) = 2
    outcomes = solve_subsets(inst, plan, scen, BendersConfig(mode=CutMode.MULTI))
    done = [o for o in outcomes if o.status is SubsetStatus.COMPLETED]
    canceled = [o for o in outcomes if o.status is SubsetStatus.CANCELED]
    assert len(done) == 2 and len(canceled) == 1
    assert all(o.commitment is not None for o in done)
    assert all(o.commitment is None for o in canceled)


def test_outer_recovers_oracle_at_full_completion(toy_a):
    inst, scen = toy_a
    oracle = solve_milp(build_extensive(inst, scen)).objective
    result = run_outer(inst, scen, BendersConfig(mode=CutMode.MULTI), 2,
                       gamma=1.0, workers=2)
    assert result.solution.objective == pytest.approx(oracle, abs=2e-6)
    assert result.t1 == max(o.wall_time for o in result.outcomes
                            if o.status is SubsetStatus.COMPLETED)


def test_outer_restriction_bound_low_gamma(toy_a):
    inst, scen = toy_a
    oracle = solve_milp(build_extensive(inst, scen)).objective
    result = run_outer(inst, scen, BendersConfig(mode=CutMode.MULTI), 3,
                       gamma=0.34)
    assert result.solution.objective >= oracle - 1e-6


def test_outer_summary_schema(toy_a):
    inst, scen = toy_a
    result = run_outer(inst, scen, BendersConfig(mode=CutMode.MULTI), 2)
    doc = result.summary(inst)
    assert {"subsets", "T1", "T2", "fixed_count", "free_count"} <= set(doc)
    assert doc["fixed_count"] + doc["free_count"] == inst.n_gens * inst.horizon
    for entry in doc["subsets"]:
        assert {"id", "status", "objective", "tau_s", "iterations"} <= set(entry)
