"""Shared builders and fixtures for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from consenslab import (AgentConfig, Ball, Box, Graph, Halfspace, Intersection,
                        OutputWeights, Scenario, Zero, integrate)

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"


def two_agent_scenario(dt=1e-3, T=30.0) -> Scenario:
    """Two agents with private intervals [0,2] and [1,3], started outside."""
    return Scenario(
        graph=Graph(2, [(0, 1, 1.0)]),
        agents=(
            AgentConfig(1.0, Box([0.0], [2.0]), [-1.0]),
            AgentConfig(1.0, Box([1.0], [3.0]), [4.0]),
        ),
        disturbances=(Zero(), Zero()),
        weights=OutputWeights(c1=0.1, c2=0.1, gamma=1.0),
        dt=dt,
        T=T,
    )


def k3_graph() -> Graph:
    return Graph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


@pytest.fixture(scope="session")
def two_agent_trace():
    """The long two-agent run, shared by module and acceptance tests."""
    return integrate(two_agent_scenario())


def random_connected_graph(rng, max_n=8) -> Graph:
    """Random spanning tree plus extra edges, weights in (0, 5]."""
    n = int(rng.integers(2, max_n + 1))
    edges = {}
    order = rng.permutation(n)
    for idx in range(1, n):
        i, j = int(order[idx]), int(order[int(rng.integers(0, idx))])
        edges[(min(i, j), max(i, j))] = float(rng.uniform(0.0, 5.0)) or 1.0
    for _ in range(int(rng.integers(0, n))):
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        edges.setdefault((i, j), float(rng.uniform(0.0, 5.0)) or 1.0)
    return Graph(n, [(i, j, w) for (i, j), w in edges.items()])


def random_primitive(rng, kind: str, m: int):
    """A random set of the given family with nonempty interior."""
    if kind == "box":
        lo = rng.normal(size=m)
        return Box(lo, lo + rng.uniform(0.2, 3.0, size=m))
    if kind == "ball":
        return Ball(rng.normal(size=m), float(rng.uniform(0.3, 3.0)))
    if kind == "halfspace":
        normal = rng.normal(size=m)
        while not np.linalg.norm(normal) > 1e-3:
            normal = rng.normal(size=m)
        return Halfspace(normal, float(rng.normal()))
    raise ValueError(kind)


def random_intersection(rng, m: int) -> Intersection:
    """Members arranged around a shared anchor so the interior is nonempty."""
    anchor = rng.normal(size=m)
    members = []
    for _ in range(int(rng.integers(2, 5))):
        pick = rng.integers(0, 3)
        if pick == 0:
            members.append(Box(anchor - rng.uniform(0.3, 1.5, size=m),
                               anchor + rng.uniform(0.3, 1.5, size=m)))
        elif pick == 1:
            shift = rng.normal(size=m, scale=0.3)
            members.append(Ball(anchor + shift,
                                float(np.linalg.norm(shift) + rng.uniform(0.3, 1.0))))
        else:
            normal = rng.normal(size=m)
            while not np.linalg.norm(normal) > 1e-3:
                normal = rng.normal(size=m)
            members.append(Halfspace(
                normal, float(normal @ anchor + rng.uniform(0.2, 1.0)
                              * np.linalg.norm(normal))))
    return Intersection(members)


def random_member_point(rng, s) -> np.ndarray:
    """A point of the set: exact for primitives, Dykstra output for intersections."""
    m = s.dim
    if isinstance(s, Box):
        return s.lo + rng.uniform(0.0, 1.0, size=m) * (s.hi - s.lo)
    if isinstance(s, Ball):
        direction = rng.normal(size=m)
        direction /= max(np.linalg.norm(direction), 1e-12)
        return s.center + s.radius * float(rng.uniform(0.0, 1.0)) * direction
    if isinstance(s, Halfspace):
        p = rng.normal(size=m, scale=2.0)
        excess = p @ s.normal - s.offset
        return p - max(excess, 0.0) * s.normal
    from consenslab import project
    return project(s, rng.normal(size=m, scale=2.0)).point
