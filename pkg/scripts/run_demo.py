#!/usr/bin/env python3
"""End-to-end walkthrough of one scenario.

Loads a scenario file, certifies it, integrates the constrained protocol,
and prints a compact table of the diagnostics over time: consensus error,
distance to the common constraint set, the running performance index, and
the Lyapunov monitor. Optionally writes the standard artifact directory
(same files the `consenslab simulate` subcommand produces) and a PNG of
the state trajectories.

Examples:
    python scripts/run_demo.py
    python scripts/run_demo.py --scenario scenarios/k5_box.yaml --rows 12
    python scripts/run_demo.py --out demo_out --plot demo_out/states.png
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from consenslab import (Intersection, check_theorem1, complement_basis,
                        contains, full_metrics, integrate, load_scenario,
                        min_gamma)
from consenslab.analysis import InfeasibleConfigurationError
from consenslab.cli import cmd_simulate

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_SCENARIO = REPO_ROOT / "scenarios" / "two_agent_interval.yaml"


def print_table(report, rows):
    idx = np.unique(np.linspace(0, report.times.size - 1, rows).astype(int))
    print(f"\n{'t':>8} {'consensus':>12} {'constraint':>12} "
          f"{'J':>12} {'V':>12}")
    for k in idx:
        print(f"{report.times[k]:8.3f} {report.consensus_error[k]:12.4e} "
              f"{report.constraint_distance[k]:12.4e} "
              f"{report.J[k]:12.4e} {report.V[k]:12.4e}")


def plot_states(trace, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    k_steps, n, m = trace.states.shape
    fig, axes = plt.subplots(m, 1, figsize=(8, 2.5 * m), squeeze=False,
                             sharex=True)
    for d in range(m):
        ax = axes[d][0]
        for i in range(n):
            ax.plot(trace.times, trace.states[:, i, d], label=f"agent {i}")
        ax.set_ylabel(f"x[{d}]")
        ax.grid(alpha=0.3)
    axes[0][0].legend(loc="best", fontsize="small")
    axes[-1][0].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    print(f"saved state plot to {path}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenario", type=Path, default=DEFAULT_SCENARIO,
                        help="scenario YAML (default: the two-agent interval demo)")
    parser.add_argument("--rows", type=int, default=9,
                        help="rows in the printed diagnostics table")
    parser.add_argument("--out", type=Path, default=None,
                        help="also write the four run artifacts here")
    parser.add_argument("--plot", type=Path, default=None,
                        help="save a PNG of the state trajectories")
    args = parser.parse_args()

    sc = load_scenario(args.scenario)
    gains = [agent.gain for agent in sc.agents]
    cert = check_theorem1(sc.graph, gains, sc.weights)
    print(f"scenario: {args.scenario.name} "
          f"(n={sc.n}, m={sc.m}, dt={sc.dt:g}, T={sc.T:g})")
    print(f"lambda2={cert.lambda2:.6g}, kbar={cert.kbar:.6g}, "
          f"a={cert.a:.6g}, gamma={sc.weights.gamma:g} -> "
          f"{'feasible' if cert.feasible else 'INFEASIBLE'}")
    if not cert.feasible:
        print("stopping: no certificate at this attenuation level")
        return 1

    try:
        gstar = min_gamma(sc.graph, gains, sc.weights.c1, sc.weights.c2)
        print(f"gamma_min={gstar:.6g} "
              f"(headroom {sc.weights.gamma / gstar:.2f}x)")
    except InfeasibleConfigurationError as exc:
        print(f"gamma_min: {exc}")

    trace = integrate(sc)
    common = Intersection([agent.constraint for agent in sc.agents])
    report = full_metrics(trace, common, sc.weights, cert.a,
                          complement_basis(sc.n))
    print_table(report, args.rows)

    worst_j = float(np.max(report.J))
    starts = np.array([agent.x0 for agent in sc.agents])
    zero_initial_output = (np.all(starts == starts[0])
                           and contains(common, starts[0]))
    if zero_initial_output:
        # the dissipation bound J(t) <= 0 presumes the run starts at a
        # common feasible point; only then is a positive J a violation
        verdict = "dissipative" if worst_j < 1e-6 else "VIOLATED"
        print(f"\nmax J over the run = {worst_j:.4e} ({verdict})")
    else:
        print(f"\nmax J over the run = {worst_j:.4e} "
              "(start is not a common feasible point, so no sign bound applies)")
    print(f"final consensus error     = {report.consensus_error[-1]:.4e}")
    print(f"final constraint distance = {report.constraint_distance[-1]:.4e}")

    if args.plot is not None:
        args.plot.parent.mkdir(parents=True, exist_ok=True)
        plot_states(trace, args.plot)
    if args.out is not None:
        code = cmd_simulate(args.scenario, args.out)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
