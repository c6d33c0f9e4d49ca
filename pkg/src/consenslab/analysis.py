"""Certificate checks and trace metrics.

Two independent feasibility tests back each other: a 3x3 eigenvalue test on
the certificate matrix and a 2x2 Schur-complement reduction. The disturbance
attenuation level gamma is searched by bisection, which is justified because
only the (3,3) entry of the certificate matrix depends on gamma and it is
decreasing in gamma, so the feasible set can only grow.

Trace metrics (performance index, Lyapunov-style monitors, consensus errors)
are computed on the full trace grid with trapezoid quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convex import distance_many, project_many
from .graph import Graph, algebraic_connectivity, is_connected
from .linalg import ComplementBasis, SymMatrix, is_negative_definite, sym_eigen
from .protocol import Trace

__all__ = [
    "OutputWeights",
    "GammaCertificate",
    "MetricsReport",
    "GraphNotConnectedError",
    "InfeasibleConfigurationError",
    "controlled_output",
    "performance_index",
    "gamma_matrix",
    "check_theorem1",
    "schur_feasibility",
    "min_gamma",
    "lyapunov_monitors",
    "consensus_metrics",
    "full_metrics",
]

# verdicts closer to singular than this are treated as ties, not feasibility
MARGIN_TIE = 1e-9
GAMMA_CEILING = 1e6


class GraphNotConnectedError(ValueError):
    """The certificate requires a connected communication graph."""


class InfeasibleConfigurationError(RuntimeError):
    """No attenuation level below the search ceiling admits a certificate."""


@dataclass(frozen=True)
class OutputWeights:
    """Output weights c1 (constraint error), c2 (disagreement), and the
    attenuation level gamma."""

    c1: float
    c2: float
    gamma: float

    def __post_init__(self):
        for name in ("c1", "c2", "gamma"):
            value = float(getattr(self, name))
            if not value > 0.0:
                raise ValueError(f"{name} must be strictly positive")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class GammaCertificate:
    """Feasibility verdict for one (lambda2, kbar, gamma) triple with the best
    coupling weight a found by the search."""

    lambda2: float
    kbar: float
    a: float
    gamma_matrix: SymMatrix
    eigenvalues: np.ndarray
    feasible: bool
    a_constraint_satisfied: bool

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "eigenvalues", w)


@dataclass(frozen=True)
class MetricsReport:
    """Per-grid-time diagnostics of a trace.

    The single-purpose producers (performance_index feeds J, lyapunov_monitors
    the V fields and xi_norms, consensus_metrics the error fields) zero-fill
    the series they do not compute; full_metrics populates everything.
    """

    times: np.ndarray
    J: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    V: np.ndarray
    consensus_error: np.ndarray
    constraint_distance: np.ndarray
    xi_norms: np.ndarray


def _project_trace(trace: Trace, constraint_set) -> np.ndarray:
    """Projection of every recorded agent state onto the common set, (K, n, m)."""
    k_steps, n, m = trace.states.shape
    flat = trace.states.reshape(k_steps * n, m)
    return project_many(constraint_set, flat).reshape(k_steps, n, m)


def _mean_state(x: np.ndarray) -> np.ndarray:
    return x.mean(axis=0)


def controlled_output(x: np.ndarray, constraint_set, weights: OutputWeights):
    """Stacked outputs (z1, z2): weighted constraint violation and disagreement."""
    projected = project_many(constraint_set, x)
    z1 = weights.c1 * (x - projected)
    z2 = weights.c2 * (x - _mean_state(x))
    return z1.ravel(), z2.ravel()


def performance_index(trace: Trace, constraint_set, weights: OutputWeights,
                      projected: np.ndarray | None = None) -> np.ndarray:
    """J(t): running trapezoid integral of z^T z - gamma^2 w^T w on the grid."""
    k_steps = trace.states.shape[0]
    if projected is None:
        projected = _project_trace(trace, constraint_set)

    constraint_err = trace.states - projected
    disagreement = trace.states - trace.states.mean(axis=1, keepdims=True)
    w = trace.disturbances
    integrand = (
        weights.c1 ** 2 * np.sum(constraint_err * constraint_err, axis=(1, 2))
        + weights.c2 ** 2 * np.sum(disagreement * disagreement, axis=(1, 2))
        - weights.gamma ** 2 * np.sum(w * w, axis=(1, 2))
    )

    out = np.zeros(k_steps)
    if k_steps > 1:
        dt = trace.times[1] - trace.times[0]
        out[1:] = np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]))
    return out


def gamma_matrix(lambda2: float, kbar: float, a: float, weights: OutputWeights) -> SymMatrix:
    """The 3x3 certificate matrix; negative definiteness certifies attenuation."""
    if not lambda2 > 0.0:
        raise GraphNotConnectedError(
            f"certificate matrix needs lambda2 > 0, got {lambda2:g} "
            "(is the graph connected?)"
        )
    c1, c2, gamma = weights.c1, weights.c2, weights.gamma
    return SymMatrix(np.array([
        [-(2.0 * lambda2 * a - c1 * c1), kbar / 2.0, a],
        [kbar / 2.0, -(lambda2 - c2 * c2), 0.5],
        [a, 0.5, -gamma * gamma],
    ]))


def schur_feasibility(lambda2: float, kbar: float, a: float, weights: OutputWeights) -> bool:
    """Independent 2x2 reduction of the certificate test.

    Eliminating the third row/column of the certificate matrix against its
    (3,3) entry -gamma^2 leaves M = A + (1/gamma^2) B B^T with B = (a, 1/2)^T;
    the matrix is negative definite iff M is, tested here by explicit 2x2
    minors with no eigensolver involved.
    """
    c1, c2, gamma = weights.c1, weights.c2, weights.gamma
    inv_gsq = 1.0 / (gamma * gamma)
    m11 = -(2.0 * lambda2 * a - c1 * c1) + inv_gsq * a * a
    m12 = kbar / 2.0 + inv_gsq * a * 0.5
    m22 = -(lambda2 - c2 * c2) + inv_gsq * 0.25
    return m11 < 0.0 and (m11 * m22 - m12 * m12) > 0.0


def _max_eigenvalue(lambda2, kbar, a, weights) -> float:
    mat = gamma_matrix(lambda2, kbar, a, weights)
    return float(sym_eigen(mat).eigenvalues[-1])


def check_theorem1(graph: Graph, gains, weights: OutputWeights,
                   a_max: float = 1e3, grid_points: int = 200) -> GammaCertificate:
    """Search the coupling weight a for a negative definite certificate matrix.

    A logarithmic grid over (kbar^2/lambda2^2, a_max] decides feasibility;
    golden-section refinement around the best grid point only sharpens the
    witness and can never flip an infeasible verdict to feasible. Verdicts
    with margin within the tie zone are treated as infeasible.
    """
    if not is_connected(graph):
        raise GraphNotConnectedError("certificate search requires a connected graph")
    gains = [float(k) for k in gains]
    if len(gains) != graph.n or any(k <= 0.0 for k in gains):
        raise ValueError("gains must be positive, one per agent")
    lambda2 = algebraic_connectivity(graph)
    kbar = max(gains)

    a_low = (kbar / lambda2) ** 2 * (1.0 + 1e-6)
    if a_max <= a_low:
        raise ValueError(f"a_max={a_max:g} leaves no room above the floor {a_low:g}")
    grid = np.geomspace(a_low, a_max, max(2, int(grid_points)))

    def margin(a: float) -> float:
        return _max_eigenvalue(lambda2, kbar, a, weights)

    margins = [margin(a) for a in grid]
    best_idx = int(np.argmin(margins))
    best_a = float(grid[best_idx])
    best_margin = margins[best_idx]
    feasible = best_margin < -MARGIN_TIE

    if feasible:
        # golden-section on the bracketing interval; keeps the better point
        lo = float(grid[max(best_idx - 1, 0)])
        hi = float(grid[min(best_idx + 1, len(grid) - 1)])
        phi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = hi - phi * (hi - lo)
        x2 = lo + phi * (hi - lo)
        f1, f2 = margin(x1), margin(x2)
        for _ in range(60):
            if hi - lo < 1e-12 * (1.0 + hi):
                break
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - phi * (hi - lo)
                f1 = margin(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + phi * (hi - lo)
                f2 = margin(x2)
        for cand, fc in ((x1, f1), (x2, f2)):
            if fc < best_margin:
                best_a, best_margin = float(cand), fc

    mat = gamma_matrix(lambda2, kbar, best_a, weights)
    eigs = sym_eigen(mat).eigenvalues
    nd_verdict, _ = is_negative_definite(mat)
    schur_verdict = schur_feasibility(lambda2, kbar, best_a, weights)
    if abs(best_margin) > MARGIN_TIE and feasible != (nd_verdict and schur_verdict):
        raise ArithmeticError(
            "feasibility verdicts disagree: eigenvalue search says "
            f"{feasible}, minor test says {nd_verdict}, Schur says {schur_verdict}"
        )
    return GammaCertificate(
        lambda2=lambda2,
        kbar=kbar,
        a=best_a,
        gamma_matrix=mat,
        eigenvalues=eigs,
        feasible=feasible,
        a_constraint_satisfied=best_a > (kbar / lambda2) ** 2,
    )


def min_gamma(graph: Graph, gains, c1: float, c2: float,
              a_max: float = 1e3, tol: float = 1e-4) -> float:
    """Smallest certifiable attenuation level, found by bisection on gamma."""

    def feasible_at(gamma: float) -> bool:
        weights = OutputWeights(c1=c1, c2=c2, gamma=gamma)
        return check_theorem1(graph, gains, weights, a_max=a_max).feasible

    hi = 1.0
    while not feasible_at(hi):
        hi *= 2.0
        if hi > GAMMA_CEILING:
            raise InfeasibleConfigurationError(
                f"no certificate below gamma = {GAMMA_CEILING:g}"
            )
    lo = hi / 2.0
    while lo > tol and feasible_at(lo):
        hi = lo
        lo /= 2.0
    # invariant: feasible at hi, infeasible at lo (or lo below resolution)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible_at(mid):
            hi = mid
        else:
            lo = mid
    return hi


def lyapunov_monitors(trace: Trace, constraint_set, a: float,
                      u1: ComplementBasis,
                      projected: np.ndarray | None = None) -> MetricsReport:
    """Proof monitors V1 (constraint error), V2 (disagreement), V = 2a V1 + V2.

    V2 is computed both as the sum-of-squares about the mean and through the
    disagreement-subspace basis; the two must agree or the basis is wrong.
    """
    if not a > 0.0:
        raise ValueError("monitor weight a must be positive")
    k_steps, n, m = trace.states.shape
    if u1.n != n:
        raise ValueError(f"basis is for n={u1.n}, trace has n={n}")

    if projected is None:
        projected = _project_trace(trace, constraint_set)
    err = trace.states - projected
    v1 = 0.5 * np.sum(err * err, axis=(1, 2))

    centered = trace.states - trace.states.mean(axis=1, keepdims=True)
    v2 = 0.5 * np.sum(centered * centered, axis=(1, 2))
    y = np.einsum("pn,knm->kpm", u1.columns.T, trace.states)
    v2_via_basis = 0.5 * np.sum(y * y, axis=(1, 2))
    gap = np.abs(v2 - v2_via_basis).max()
    scale = 1.0 + float(np.abs(v2).max())
    if gap > 1e-9 * scale:
        raise ArithmeticError(
            f"disagreement energy mismatch between direct and basis forms: {gap:g}"
        )

    v = 2.0 * a * v1 + v2

    w = trace.disturbances
    xi = np.stack([
        np.sqrt(np.sum(err * err, axis=(1, 2))),
        np.sqrt(np.sum(y * y, axis=(1, 2))),
        np.sqrt(np.sum(w * w, axis=(1, 2))),
    ], axis=1)

    zeros = np.zeros(k_steps)
    return MetricsReport(
        times=trace.times,
        J=zeros,
        V1=v1,
        V2=v2,
        V=v,
        consensus_error=zeros,
        constraint_distance=zeros,
        xi_norms=xi,
    )


def consensus_metrics(trace: Trace, constraint_set,
                      projected: np.ndarray | None = None) -> MetricsReport:
    """Worst pairwise disagreement and worst distance to the common set, per time."""
    k_steps, n, m = trace.states.shape
    pair_max = np.zeros(k_steps)
    for i in range(n):
        for j in range(i + 1, n):
            diff = trace.states[:, i, :] - trace.states[:, j, :]
            pair_max = np.maximum(pair_max, np.sqrt(np.sum(diff * diff, axis=1)))

    if projected is None:
        flat = trace.states.reshape(k_steps * n, m)
        dist = distance_many(constraint_set, flat).reshape(k_steps, n)
    else:
        gap = trace.states - projected
        dist = np.sqrt(np.sum(gap * gap, axis=2))
    worst_dist = dist.max(axis=1)

    zeros = np.zeros(k_steps)
    return MetricsReport(
        times=trace.times,
        J=zeros,
        V1=zeros,
        V2=zeros,
        V=zeros,
        consensus_error=pair_max,
        constraint_distance=worst_dist,
        xi_norms=np.zeros((k_steps, 3)),
    )


def full_metrics(trace: Trace, constraint_set, weights: OutputWeights,
                 a: float, u1: ComplementBasis) -> MetricsReport:
    """All diagnostics in one report; the trace is projected onto the common
    set once and shared across the three computations."""
    projected = _project_trace(trace, constraint_set)
    j_series = performance_index(trace, constraint_set, weights, projected=projected)
    monitors = lyapunov_monitors(trace, constraint_set, a, u1, projected=projected)
    errors = consensus_metrics(trace, constraint_set, projected=projected)
    return MetricsReport(
        times=trace.times,
        J=j_series,
        V1=monitors.V1,
        V2=monitors.V2,
        V=monitors.V,
        consensus_error=errors.consensus_error,
        constraint_distance=errors.constraint_distance,
        xi_norms=monitors.xi_norms,
    )
