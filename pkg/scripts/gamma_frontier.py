#!/usr/bin/env python3
"""Map the attenuation frontier of a scenario's network.

For a sweep of output-weight values c (applied to both the constraint
channel and the disagreement channel), finds the smallest certifiable
attenuation level gamma_min by bisection and prints the frontier. Points
where no attenuation level admits a certificate are marked infeasible --
this happens once c^2 outgrows the algebraic connectivity.

The sweep reuses the scenario's graph and gains; only the weights move.

Examples:
    python scripts/gamma_frontier.py
    python scripts/gamma_frontier.py --scenario scenarios/k5_box.yaml \
        --c-min 0.05 --c-max 3 --points 25 --csv frontier.csv
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from consenslab import load_scenario, min_gamma
from consenslab.analysis import InfeasibleConfigurationError

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_SCENARIO = REPO_ROOT / "scenarios" / "k3_unit_triangle.yaml"


def sweep(graph, gains, c_values, tol):
    """Returns (c, gamma_min) rows; gamma_min is nan where infeasible."""
    rows = []
    for c in c_values:
        try:
            g = min_gamma(graph, gains, c1=float(c), c2=float(c), tol=tol)
        except InfeasibleConfigurationError:
            g = float("nan")
        rows.append((float(c), g))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenario", type=Path, default=DEFAULT_SCENARIO,
                        help="scenario YAML supplying the graph and gains")
    parser.add_argument("--c-min", type=float, default=0.05)
    parser.add_argument("--c-max", type=float, default=2.5)
    parser.add_argument("--points", type=int, default=15,
                        help="sweep points, geometrically spaced")
    parser.add_argument("--tol", type=float, default=1e-4,
                        help="bisection tolerance on gamma")
    parser.add_argument("--csv", type=Path, default=None,
                        help="also write the frontier as CSV")
    args = parser.parse_args()
    if not (0 < args.c_min < args.c_max):
        parser.error("need 0 < c-min < c-max")

    sc = load_scenario(args.scenario)
    gains = [agent.gain for agent in sc.agents]
    c_values = np.geomspace(args.c_min, args.c_max, args.points)
    rows = sweep(sc.graph, gains, c_values, args.tol)

    print(f"frontier for {args.scenario.name} "
          f"(n={sc.n}, gains max {max(gains):g})")
    print(f"{'c':>10} {'gamma_min':>12}")
    for c, g in rows:
        label = f"{g:12.6f}" if np.isfinite(g) else "  infeasible"
        print(f"{c:10.4f} {label}")

    feasible = [(c, g) for c, g in rows if np.isfinite(g)]
    if feasible:
        c_edge = max(c for c, _ in feasible)
        print(f"\nlargest feasible weight in sweep: c={c_edge:.4f}")
    else:
        print("\nno feasible point in the sweep")

    if args.csv is not None:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(args.csv, np.asarray(rows), fmt="%.10g", delimiter=",",
                   header="c,gamma_min", comments="")
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
