"""Scenario document parsing and serialization.

One experiment is one YAML file with five sections: graph, agents,
disturbances, weights, sim. Parsing is strict: unknown fields, wrong types,
and domain violations are all rejected with a diagnostic that names the
offending field by path (e.g. "agents[1].constraint.lo"). Serialization
emits plain Python floats, so a dumped scenario parses back to an equal one.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .analysis import OutputWeights
from .convex import Ball, Box, Halfspace, Intersection
from .graph import Graph
from .protocol import (AgentConfig, DecayingExp, GaussianPulse, Scenario,
                       SinePulse, Zero)

__all__ = [
    "ScenarioParseError",
    "parse_scenario",
    "load_scenario",
    "scenario_to_dict",
    "dump_scenario",
]

SET_TAGS = ("box", "ball", "halfspace", "intersection")
DISTURBANCE_TAGS = ("zero", "decaying_exp", "sine_pulse", "gaussian_pulse")


class ScenarioParseError(ValueError):
    """Scenario document rejected; the message names the offending field."""


def _fail(path: str, message: str):
    raise ScenarioParseError(f"{path}: {message}")


def _mapping(node, path: str, required: tuple, optional: tuple = ()) -> dict:
    if not isinstance(node, dict):
        _fail(path, f"expected a mapping, got {type(node).__name__}")
    allowed = set(required) | set(optional)
    unknown = sorted(set(node) - allowed)
    if unknown:
        _fail(path, f"unknown field(s) {unknown}; allowed: {sorted(allowed)}")
    missing = sorted(set(required) - set(node))
    if missing:
        _fail(path, f"missing required field(s) {missing}")
    return node


def _number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        _fail(path, f"expected a number, got {type(node).__name__}")
    return float(node)


def _integer(node, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        _fail(path, f"expected an integer, got {type(node).__name__}")
    return node


def _vector(node, path: str) -> list:
    if not isinstance(node, list) or not node:
        _fail(path, "expected a nonempty list of numbers")
    return [_number(v, f"{path}[{k}]") for k, v in enumerate(node)]


def _build(factory, path: str, /, **kwargs):
    # domain constructors validate invariants; re-raise with the field path
    try:
        return factory(**kwargs)
    except ScenarioParseError:
        raise
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_set(node, path: str):
    if not isinstance(node, dict):
        _fail(path, "expected a mapping with a 'type' tag")
    tag = node.get("type")
    if tag not in SET_TAGS:
        _fail(f"{path}.type", f"expected one of {list(SET_TAGS)}, got {tag!r}")
    if tag == "box":
        spec = _mapping(node, path, ("type", "lo", "hi"))
        return _build(Box, path, lo=_vector(spec["lo"], f"{path}.lo"),
                      hi=_vector(spec["hi"], f"{path}.hi"))
    if tag == "ball":
        spec = _mapping(node, path, ("type", "center", "radius"))
        return _build(Ball, path, center=_vector(spec["center"], f"{path}.center"),
                      radius=_number(spec["radius"], f"{path}.radius"))
    if tag == "halfspace":
        spec = _mapping(node, path, ("type", "normal", "offset"))
        return _build(Halfspace, path,
                      normal=_vector(spec["normal"], f"{path}.normal"),
                      offset=_number(spec["offset"], f"{path}.offset"))
    spec = _mapping(node, path, ("type", "members"))
    members = spec["members"]
    if not isinstance(members, list) or not members:
        _fail(f"{path}.members", "expected a nonempty list of set specs")
    parsed = [_parse_set(s, f"{path}.members[{k}]") for k, s in enumerate(members)]
    return _build(Intersection, path, members=parsed)


def _parse_disturbance(node, path: str):
    if not isinstance(node, dict):
        _fail(path, "expected a mapping with a 'type' tag")
    tag = node.get("type")
    if tag not in DISTURBANCE_TAGS:
        _fail(f"{path}.type", f"expected one of {list(DISTURBANCE_TAGS)}, got {tag!r}")
    if tag == "zero":
        _mapping(node, path, ("type",))
        return Zero()
    if tag == "decaying_exp":
        spec = _mapping(node, path, ("type", "amplitude", "rate"))
        return _build(DecayingExp, path,
                      amplitude=_vector(spec["amplitude"], f"{path}.amplitude"),
                      rate=_number(spec["rate"], f"{path}.rate"))
    if tag == "sine_pulse":
        spec = _mapping(node, path, ("type", "amplitude", "freq", "t_on", "t_off"))
        return _build(SinePulse, path,
                      amplitude=_vector(spec["amplitude"], f"{path}.amplitude"),
                      freq=_number(spec["freq"], f"{path}.freq"),
                      t_on=_number(spec["t_on"], f"{path}.t_on"),
                      t_off=_number(spec["t_off"], f"{path}.t_off"))
    spec = _mapping(node, path, ("type", "amplitude", "center", "width"))
    return _build(GaussianPulse, path,
                  amplitude=_vector(spec["amplitude"], f"{path}.amplitude"),
                  center=_number(spec["center"], f"{path}.center"),
                  width=_number(spec["width"], f"{path}.width"))


def parse_scenario(doc) -> Scenario:
    """Build a Scenario from a parsed document (mapping of the five sections)."""
    top = _mapping(doc, "scenario",
                   ("graph", "agents", "disturbances", "weights", "sim"))

    gspec = _mapping(top["graph"], "graph", ("n", "edges"))
    n = _integer(gspec["n"], "graph.n")
    raw_edges = gspec["edges"]
    if not isinstance(raw_edges, list):
        _fail("graph.edges", "expected a list of [i, j, weight] triples")
    edges = []
    for k, e in enumerate(raw_edges):
        if not isinstance(e, list) or len(e) != 3:
            _fail(f"graph.edges[{k}]", "expected [i, j, weight]")
        edges.append((
            _integer(e[0], f"graph.edges[{k}][0]"),
            _integer(e[1], f"graph.edges[{k}][1]"),
            _number(e[2], f"graph.edges[{k}][2]"),
        ))
    graph = _build(Graph, "graph", n=n, edges=edges)

    raw_agents = top["agents"]
    if not isinstance(raw_agents, list) or not raw_agents:
        _fail("agents", "expected a nonempty list")
    agents = []
    for k, node in enumerate(raw_agents):
        spec = _mapping(node, f"agents[{k}]", ("k", "x0", "constraint"))
        agents.append(_build(
            AgentConfig, f"agents[{k}]",
            gain=_number(spec["k"], f"agents[{k}].k"),
            constraint=_parse_set(spec["constraint"], f"agents[{k}].constraint"),
            x0=_vector(spec["x0"], f"agents[{k}].x0"),
        ))

    raw_dists = top["disturbances"]
    if not isinstance(raw_dists, list):
        _fail("disturbances", "expected a list")
    dists = [_parse_disturbance(node, f"disturbances[{k}]")
             for k, node in enumerate(raw_dists)]

    wspec = _mapping(top["weights"], "weights", ("c1", "c2", "gamma"))
    weights = _build(OutputWeights, "weights",
                     c1=_number(wspec["c1"], "weights.c1"),
                     c2=_number(wspec["c2"], "weights.c2"),
                     gamma=_number(wspec["gamma"], "weights.gamma"))

    sspec = _mapping(top["sim"], "sim", ("dt", "T"))
    return _build(Scenario, "scenario", graph=graph, agents=tuple(agents),
                  disturbances=tuple(dists), weights=weights,
                  dt=_number(sspec["dt"], "sim.dt"),
                  T=_number(sspec["T"], "sim.T"))


def load_scenario(path) -> Scenario:
    """Parse a scenario file; malformed YAML or fields raise ScenarioParseError."""
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"{path}: not valid YAML: {exc}") from exc
    return parse_scenario(doc)


def _set_to_dict(s) -> dict:
    if isinstance(s, Box):
        return {"type": "box", "lo": s.lo.tolist(), "hi": s.hi.tolist()}
    if isinstance(s, Ball):
        return {"type": "ball", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Halfspace):
        return {"type": "halfspace", "normal": s.normal.tolist(), "offset": s.offset}
    if isinstance(s, Intersection):
        return {"type": "intersection",
                "members": [_set_to_dict(m) for m in s.members]}
    raise TypeError(f"not a serializable set: {type(s).__name__}")


def _disturbance_to_dict(d) -> dict:
    if isinstance(d, Zero):
        return {"type": "zero"}
    if isinstance(d, DecayingExp):
        return {"type": "decaying_exp", "amplitude": d.amplitude.tolist(),
                "rate": d.rate}
    if isinstance(d, SinePulse):
        return {"type": "sine_pulse", "amplitude": d.amplitude.tolist(),
                "freq": d.freq, "t_on": d.t_on, "t_off": d.t_off}
    if isinstance(d, GaussianPulse):
        return {"type": "gaussian_pulse", "amplitude": d.amplitude.tolist(),
                "center": d.center, "width": d.width}
    raise TypeError(f"not a serializable disturbance: {type(d).__name__}")


def scenario_to_dict(sc: Scenario) -> dict:
    """Plain-data form of a Scenario, inverse of parse_scenario."""
    return {
        "graph": {"n": sc.graph.n,
                  "edges": [[i, j, w] for i, j, w in sc.graph.edges]},
        "agents": [{"k": a.gain, "x0": a.x0.tolist(),
                    "constraint": _set_to_dict(a.constraint)}
                   for a in sc.agents],
        "disturbances": [_disturbance_to_dict(d) for d in sc.disturbances],
        "weights": {"c1": sc.weights.c1, "c2": sc.weights.c2,
                    "gamma": sc.weights.gamma},
        "sim": {"dt": sc.dt, "T": sc.T},
    }


def dump_scenario(sc: Scenario) -> str:
    """YAML text for a Scenario; parsing it back yields an equal Scenario."""
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False)
