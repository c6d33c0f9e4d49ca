"""Convex constraint sets with metric projections.

Box, Ball, and Halfspace project in closed form. Intersection projects with
Dykstra's algorithm, which (unlike plain alternating projections) converges
to the true nearest point of the intersection rather than just some feasible
point. All projectors also run in batch over an (N, m) array of points; the
batch path is what keeps trace postprocessing fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Box",
    "Ball",
    "Halfspace",
    "Intersection",
    "ProjectionResult",
    "EmptyIntersectionError",
    "project",
    "project_many",
    "distance",
    "distance_many",
    "contains",
]

MEMBERSHIP_TOL = 1e-8
DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_CYCLES = 10000


class EmptyIntersectionError(RuntimeError):
    """Dykstra failed to converge; the intersection is possibly empty."""


def _frozen_vector(x) -> np.ndarray:
    v = np.array(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a 1-d vector with at least one entry")
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lo <= x <= hi} componentwise."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _frozen_vector(self.lo)
        hi = _frozen_vector(self.hi)
        if lo.shape != hi.shape:
            raise ValueError("Box lo and hi must have equal length")
        if np.any(lo > hi):
            raise ValueError("Box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def __eq__(self, other):
        return (isinstance(other, Box)
                and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    def _project_rows(self, pts: np.ndarray) -> np.ndarray:
        return np.clip(pts, self.lo, self.hi)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = _frozen_vector(self.center)
        r = float(self.radius)
        if not r > 0.0:
            raise ValueError("Ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def __eq__(self, other):
        return (isinstance(other, Ball)
                and np.array_equal(self.center, other.center)
                and self.radius == other.radius)

    def _project_rows(self, pts: np.ndarray) -> np.ndarray:
        rel = pts - self.center
        norms = np.sqrt(np.sum(rel * rel, axis=1))
        # interior points keep scale 1; exterior shrink radially
        scale = np.ones_like(norms)
        outside = norms > self.radius
        scale[outside] = self.radius / norms[outside]
        return self.center + rel * scale[:, None]


@dataclass(frozen=True)
class Halfspace:
    """Halfspace {x : normal . x <= offset}; stored with a unit normal.

    Both the normal and the offset are rescaled by the given normal's length,
    so (2, 0) with offset 4 describes the same set as (1, 0) with offset 2.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        raw = np.array(self.normal, dtype=float)
        if raw.ndim != 1 or raw.size < 1:
            raise ValueError("Halfspace normal must be a 1-d vector")
        length = float(np.sqrt(raw @ raw))
        if length == 0.0 or not np.isfinite(length):
            raise ValueError("Halfspace normal must be nonzero and finite")
        unit = raw / length
        unit.flags.writeable = False
        object.__setattr__(self, "normal", unit)
        object.__setattr__(self, "offset", float(self.offset) / length)

    @property
    def dim(self) -> int:
        return self.normal.size

    def __eq__(self, other):
        return (isinstance(other, Halfspace)
                and np.array_equal(self.normal, other.normal)
                and self.offset == other.offset)

    def _project_rows(self, pts: np.ndarray) -> np.ndarray:
        excess = pts @ self.normal - self.offset
        return pts - np.maximum(excess, 0.0)[:, None] * self.normal


@dataclass(frozen=True)
class Intersection:
    """Intersection of finitely many convex sets in one ambient dimension.

    Nested intersections are flattened at construction, which leaves Dykstra
    cycling over closed-form primitive projections only.
    """

    members: tuple

    def __init__(self, members):
        flat = []
        for s in members:
            if isinstance(s, Intersection):
                flat.extend(s.members)
            else:
                flat.append(s)
        if not flat:
            raise ValueError("Intersection needs at least one member")
        dims = {s.dim for s in flat}
        if len(dims) != 1:
            raise ValueError(f"Intersection members disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "members", tuple(flat))

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def __eq__(self, other):
        return (isinstance(other, Intersection)
                and len(self.members) == len(other.members)
                and all(a == b for a, b in zip(self.members, other.members)))


def _check_points(s, pts) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(pts, dtype=float))
    if arr.ndim != 2 or arr.shape[1] != s.dim:
        raise ValueError(f"points have dimension {arr.shape[-1]}, set has {s.dim}")
    return arr


def _dykstra_rows(s: Intersection, pts: np.ndarray) -> tuple[np.ndarray, int, float]:
    x = pts.copy()
    corrections = [np.zeros_like(pts) for _ in s.members]
    residual = np.inf
    for cycle in range(1, DYKSTRA_MAX_CYCLES + 1):
        residual_rows = np.zeros(pts.shape[0])
        for k, member in enumerate(s.members):
            shifted = x + corrections[k]
            x = member._project_rows(shifted)
            new_correction = shifted - x
            delta = new_correction - corrections[k]
            residual_rows += np.sqrt(np.sum(delta * delta, axis=1))
            corrections[k] = new_correction
        residual = float(residual_rows.max())
        if residual < DYKSTRA_TOL:
            return x, cycle, residual
    raise EmptyIntersectionError(
        f"Dykstra projection did not reach residual {DYKSTRA_TOL:g} in "
        f"{DYKSTRA_MAX_CYCLES} cycles (last residual {residual:g}); "
        "the intersection may be empty"
    )


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Nearest point of a set, with the iteration count and stopping residual
    of the solve (both zero for closed-form projections)."""

    point: np.ndarray
    iterations: int
    residual: float


def project_many(s, pts: np.ndarray) -> np.ndarray:
    """Project each row of an (N, m) array onto the set; returns (N, m)."""
    arr = _check_points(s, pts)
    if isinstance(s, Intersection):
        projected, _, _ = _dykstra_rows(s, arr)
        return projected
    return s._project_rows(arr)


def project(s, p) -> ProjectionResult:
    """Metric projection of a single point onto the set."""
    arr = _check_points(s, p)
    if arr.shape[0] != 1:
        raise ValueError("project takes a single point; use project_many for batches")
    if isinstance(s, Intersection):
        projected, cycles, residual = _dykstra_rows(s, arr)
        return ProjectionResult(point=projected[0], iterations=cycles, residual=residual)
    return ProjectionResult(point=s._project_rows(arr)[0], iterations=0, residual=0.0)


def distance_many(s, pts: np.ndarray) -> np.ndarray:
    """Euclidean distance of each row to the set."""
    arr = _check_points(s, pts)
    gap = arr - project_many(s, arr)
    return np.sqrt(np.sum(gap * gap, axis=1))


def distance(s, p) -> float:
    """Euclidean distance from a point to the set."""
    result = project(s, p)
    gap = np.asarray(p, dtype=float) - result.point
    return float(np.sqrt(gap @ gap))


def contains(s, p, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether the point is within tol of the set."""
    return distance(s, p) <= tol
