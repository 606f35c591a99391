#!/usr/bin/env python3
"""Regenerate the bundled med-b fixture (6-bus, 6 generators, 2 wind farms,
10 scenarios, 12 periods).

The scenario set has two wind regimes.  Windy days produce at the farms'
nameplate ratings (with a small one-period dip that makes each scenario
distinct); calm days drop to roughly half of that, with the deepest lull
over the evening peak.  Peak load minus calm wind exceeds the base unit's
capacity, so serving the calm regime requires committing the mid-merit
unit g2, while a windy-weighted scenario subset prefers to lean on g1's
reserve band and tolerate a small expected shortfall.  That makes subset
schedules genuinely regime-dependent while keeping master MILPs easy
(only g1 offers reserves, so cuts never reward fractional commitment) and
Benders convergence short (each scenario's recourse has very few kinks).
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "src" / "sucbenders" / "fixtures"

T = 12
NODES = ["n1", "n2", "n3", "n4", "n5", "n6"]
LINES = [
    ("l1", "n1", "n2", 10.0, 250.0),
    ("l2", "n2", "n3", 9.0, 250.0),
    ("l3", "n3", "n4", 11.0, 250.0),
    ("l4", "n4", "n5", 10.0, 250.0),
    ("l5", "n5", "n6", 9.0, 250.0),
    ("l6", "n6", "n1", 10.0, 250.0),
    ("l7", "n2", "n5", 8.0, 200.0),
]

# id, node, C, C_SU, C_U, C_D, C+, C-, Pmin, Pmax, RU, RD, R+, R-, UT, DT, u0, LU, LD
GENS = [
    ("g1", "n1", 12.0, 30.0, 0.8, 2.5, 48.0, 2.0, 40.0, 160.0, 80.0, 80.0, 20.0, 6.0, 4, 4, 1, 3, 0),
    ("g2", "n2", 88.0, 20.0, 1.0, 1.4, 95.0, 6.0, 16.0, 18.0, 18.0, 18.0, 0.0, 0.0, 2, 2, 0, 0, 0),
    ("g3", "n3", 100.0, 15.0, 1.2, 1.6, 108.0, 8.0, 16.0, 18.0, 18.0, 18.0, 0.0, 0.0, 2, 2, 0, 0, 0),
    ("g4", "n4", 105.0, 12.0, 1.4, 1.8, 113.0, 10.0, 13.0, 14.0, 14.0, 14.0, 0.0, 0.0, 1, 1, 0, 0, 0),
    ("g5", "n5", 115.0, 8.0, 1.6, 2.0, 124.0, 12.0, 8.0, 9.0, 9.0, 9.0, 0.0, 0.0, 1, 1, 0, 0, 0),
    ("g6", "n6", 125.0, 6.0, 1.8, 2.2, 135.0, 14.0, 6.0, 7.0, 7.0, 7.0, 0.0, 0.0, 1, 1, 0, 0, 0),
]

WIND = [("w1", "n3", 22.0), ("w2", "n6", 15.0)]

SHARES = {"n1": 0.10, "n2": 0.22, "n3": 0.18, "n4": 0.20, "n5": 0.18, "n6": 0.12}
SHAPE = np.array([118, 126, 138, 150, 162, 178, 193, 194, 180, 168, 148, 130], float)

# calm-regime production per farm and period (deepest lull over the peak)
CALM_W1 = np.array([22, 22, 22, 22, 22, 13, 13, 13, 13, 14, 22, 22], float)
CALM_W2 = np.array([15, 15, 15, 15, 15, 7, 7, 7, 7, 9, 15, 15], float)


def wind_profiles():
    scenarios = {}
    for i in range(5):                      # windy days: nameplate, dip at t=4
        w1 = np.full(T, 22.0)
        w2 = np.full(T, 15.0)
        w1[3] -= 0.4 * (i + 1)
        scenarios[f"s{i + 1:02d}"] = (w1, w2)
    for i in range(5):                      # calm days: lull profile, tweak at t=10
        w1 = CALM_W1.copy()
        w2 = CALM_W2.copy()
        w1[9] = max(0.0, w1[9] + 0.35 * (i - 2))
        scenarios[f"s{i + 6:02d}"] = (w1, w2)
    return scenarios


def main():
    doc = {
        "meta": {"name": "med-b", "horizon": T, "ref_node": "n1",
                 "units": {"power": "MW", "cost": "$", "susceptance": "p.u."}},
        "nodes": NODES,
        "lines": [{"id": i, "from": a, "to": b, "susceptance": s, "capacity": c}
                  for i, a, b, s, c in LINES],
        "generators": [
            {"id": g[0], "node": g[1], "energy_cost": g[2], "startup_cost": g[3],
             "res_up_cost": g[4], "res_down_cost": g[5],
             "deploy_up_price": g[6], "deploy_down_price": g[7],
             "p_min": g[8], "p_max": g[9], "ramp_up": g[10], "ramp_down": g[11],
             "res_up_cap": g[12], "res_down_cap": g[13],
             "min_up": g[14], "min_down": g[15], "init_status": g[16],
             "init_up_periods": g[17], "init_down_periods": g[18]}
            for g in GENS
        ],
        "wind_farms": [{"id": w, "node": n, "capacity": c} for w, n, c in WIND],
        "load": [{"node": n, "period": t + 1, "mw": round(SHARES[n] * SHAPE[t], 1)}
                 for n in NODES for t in range(T)],
        "shed_cost": 400.0,
    }
    with open(OUT / "med-b.json", "w") as fh:
        json.dump(doc, fh, indent=1)

    rows = ["scenario,farm,period,value_mw"]
    for sid, (w1, w2) in wind_profiles().items():
        for t in range(T):
            rows.append(f"{sid},w1,{t + 1},{round(w1[t], 2)}")
        for t in range(T):
            rows.append(f"{sid},w2,{t + 1},{round(w2[t], 2)}")
    (OUT / "med-b.csv").write_text("\n".join(rows) + "\n")
    print("wrote", OUT / "med-b.json", "and", OUT / "med-b.csv")


if __name__ == "__main__":
    main()
