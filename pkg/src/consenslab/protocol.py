"""Closed-loop agent dynamics and the fixed-step integrator.

Each agent is a disturbed single integrator steered by neighbor averaging
plus a projection pull toward its own constraint set. Neighbor sums are
accumulated with math.fsum, which is exactly rounded and therefore
independent of edge order; relabeling agents permutes a simulated trace
bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .convex import project_many
from .graph import Graph

if TYPE_CHECKING:
    from .analysis import OutputWeights

__all__ = [
    "AgentConfig",
    "Zero",
    "DecayingExp",
    "SinePulse",
    "GaussianPulse",
    "Scenario",
    "Trace",
    "TrajectoryDiverged",
    "control_input",
    "vector_field",
    "integrate",
    "disturbance_l2_norm_sq",
]

DIVERGENCE_NORM = 1e12


@dataclass(frozen=True)
class AgentConfig:
    """One agent: feedback gain, private constraint set, initial state."""

    gain: float
    constraint: object
    x0: np.ndarray

    def __post_init__(self):
        if not float(self.gain) > 0.0:
            raise ValueError("agent gain must be positive")
        x0 = np.array(self.x0, dtype=float)
        if x0.ndim != 1 or x0.size < 1:
            raise ValueError("x0 must be a 1-d vector")
        if x0.size != self.constraint.dim:
            raise ValueError(
                f"x0 has dimension {x0.size}, constraint has {self.constraint.dim}"
            )
        x0.flags.writeable = False
        object.__setattr__(self, "gain", float(self.gain))
        object.__setattr__(self, "x0", x0)

    def __eq__(self, other):
        return (isinstance(other, AgentConfig)
                and self.gain == other.gain
                and self.constraint == other.constraint
                and np.array_equal(self.x0, other.x0))


def _amplitude(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise ValueError("amplitude must be a 1-d vector")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Zero:
    """No disturbance."""

    def sample(self, t: float, m: int) -> np.ndarray:
        return np.zeros(m)

    def l2_norm_sq(self, horizon: float) -> float:
        return 0.0


@dataclass(frozen=True)
class DecayingExp:
    """w(t) = amplitude * exp(-rate * t)."""

    amplitude: np.ndarray
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _amplitude(self.amplitude))
        object.__setattr__(self, "rate", float(self.rate))
        if not self.rate > 0.0:
            raise ValueError("DecayingExp rate must be positive")

    def __eq__(self, other):
        return (isinstance(other, DecayingExp)
                and np.array_equal(self.amplitude, other.amplitude)
                and self.rate == other.rate)

    def sample(self, t: float, m: int) -> np.ndarray:
        return self.amplitude * math.exp(-self.rate * t)

    def l2_norm_sq(self, horizon: float) -> float:
        amp_sq = float(self.amplitude @ self.amplitude)
        if math.isinf(horizon):
            decay = 1.0
        else:
            decay = 1.0 - math.exp(-2.0 * self.rate * horizon)
        return amp_sq * decay / (2.0 * self.rate)


@dataclass(frozen=True)
class SinePulse:
    """w(t) = amplitude * sin(2*pi*freq*t) on [t_on, t_off], zero elsewhere."""

    amplitude: np.ndarray
    freq: float
    t_on: float
    t_off: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _amplitude(self.amplitude))
        object.__setattr__(self, "freq", float(self.freq))
        object.__setattr__(self, "t_on", float(self.t_on))
        object.__setattr__(self, "t_off", float(self.t_off))
        if not self.t_off >= self.t_on:
            raise ValueError("SinePulse needs t_off >= t_on")
        if math.isinf(self.t_off):
            # unbounded support would break square integrability
            raise ValueError("SinePulse t_off must be finite")

    def __eq__(self, other):
        return (isinstance(other, SinePulse)
                and np.array_equal(self.amplitude, other.amplitude)
                and (self.freq, self.t_on, self.t_off)
                == (other.freq, other.t_on, other.t_off))

    def sample(self, t: float, m: int) -> np.ndarray:
        if self.t_on <= t <= self.t_off:
            return self.amplitude * math.sin(2.0 * math.pi * self.freq * t)
        return np.zeros(self.amplitude.size)

    def l2_norm_sq(self, horizon: float) -> float:
        lo = max(self.t_on, 0.0)
        hi = min(self.t_off, horizon)
        if hi <= lo or self.freq == 0.0:
            return 0.0
        omega = 2.0 * math.pi * self.freq

        def antiderivative(t: float) -> float:
            # integral of sin^2(omega s) ds
            return 0.5 * t - math.sin(2.0 * omega * t) / (4.0 * omega)

        amp_sq = float(self.amplitude @ self.amplitude)
        return amp_sq * (antiderivative(hi) - antiderivative(lo))


@dataclass(frozen=True)
class GaussianPulse:
    """w(t) = amplitude * exp(-(t - center)^2 / (2 * width^2))."""

    amplitude: np.ndarray
    center: float
    width: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _amplitude(self.amplitude))
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "width", float(self.width))
        if not self.width > 0.0:
            raise ValueError("GaussianPulse width must be positive")

    def __eq__(self, other):
        return (isinstance(other, GaussianPulse)
                and np.array_equal(self.amplitude, other.amplitude)
                and (self.center, self.width) == (other.center, other.width))

    def sample(self, t: float, m: int) -> np.ndarray:
        arg = (t - self.center) / self.width
        return self.amplitude * math.exp(-0.5 * arg * arg)

    def l2_norm_sq(self, horizon: float) -> float:
        # the squared pulse is a Gaussian of width w/sqrt(2); erf gives the mass
        amp_sq = float(self.amplitude @ self.amplitude)
        upper = 1.0 if math.isinf(horizon) else math.erf((horizon - self.center) / self.width)
        lower = math.erf(-self.center / self.width)
        return amp_sq * self.width * (math.sqrt(math.pi) / 2.0) * (upper - lower)


def disturbance_l2_norm_sq(spec, horizon: float) -> float:
    """Closed-form integral of ||w(s)||^2 over [0, horizon]; horizon may be inf."""
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    return spec.l2_norm_sq(horizon)


@dataclass(frozen=True)
class Scenario:
    """A complete simulation setup: topology, agents, disturbances, weights, grid."""

    graph: Graph
    agents: tuple[AgentConfig, ...]
    disturbances: tuple
    weights: "OutputWeights"
    dt: float
    T: float

    def __post_init__(self):
        agents = tuple(self.agents)
        disturbances = tuple(self.disturbances)
        n = self.graph.n
        if len(agents) != n:
            raise ValueError(f"{len(agents)} agent configs for a graph with {n} nodes")
        if len(disturbances) != n:
            raise ValueError(f"{len(disturbances)} disturbances for {n} agents")
        dims = {agent.x0.size for agent in agents}
        if len(dims) != 1:
            raise ValueError(f"agents disagree on state dimension: {sorted(dims)}")
        m = dims.pop()
        for idx, dist in enumerate(disturbances):
            amp = getattr(dist, "amplitude", None)
            if amp is not None and amp.size != m:
                raise ValueError(
                    f"disturbance {idx} has dimension {amp.size}, agents have {m}"
                )
        dt = float(self.dt)
        horizon = float(self.T)
        if not dt > 0.0:
            raise ValueError("dt must be positive")
        if not horizon > 0.0:
            raise ValueError("T must be positive")
        if dt > horizon:
            raise ValueError("dt must not exceed T")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "disturbances", disturbances)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "T", horizon)

    def __eq__(self, other):
        return (isinstance(other, Scenario)
                and self.graph == other.graph
                and self.agents == other.agents
                and self.disturbances == other.disturbances
                and self.weights == other.weights
                and (self.dt, self.T) == (other.dt, other.T))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.agents[0].x0.size

    def initial_state(self) -> np.ndarray:
        return np.array([agent.x0 for agent in self.agents])


@dataclass(frozen=True, eq=False)
class Trace:
    """Sampled closed-loop run on the uniform grid times[k] = k*dt."""

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    disturbances: np.ndarray

    def __post_init__(self):
        for name in ("times", "states", "inputs", "disturbances"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        k = self.times.size
        if self.states.shape[0] != k or self.inputs.shape != self.states.shape \
                or self.disturbances.shape != self.states.shape:
            raise ValueError("trace arrays are misaligned")


class TrajectoryDiverged(RuntimeError):
    """State norm blew past the divergence guard; carries the partial trace."""

    def __init__(self, time: float, partial: Trace):
        super().__init__(
            f"trajectory diverged at t={time:g} (state norm exceeded "
            f"{DIVERGENCE_NORM:g} or became non-finite)"
        )
        self.time = time
        self.partial = partial


def control_input(i: int, x: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Consensus coupling plus projection pull for agent i at state x (n x m)."""
    agent = scenario.agents[i]
    xi = x[i]
    coupling = np.array([
        math.fsum(w * (x[j, d] - xi[d]) for j, w in scenario.graph.neighbors(i))
        for d in range(xi.size)
    ])
    pull = project_many(agent.constraint, xi[None, :])[0] - xi
    return coupling + agent.gain * pull


def _field(t: float, x: np.ndarray, scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Control and disturbance arrays (each n x m) at time t."""
    n, m = x.shape
    u = np.empty((n, m))
    w = np.empty((n, m))
    for i in range(n):
        u[i] = control_input(i, x, scenario)
        w[i] = scenario.disturbances[i].sample(t, m)
    return u, w


def vector_field(t: float, x: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Right-hand side of the closed loop: control plus disturbance."""
    u, w = _field(t, x, scenario)
    return u + w


def integrate(scenario: Scenario) -> Trace:
    """Run classical fixed-step RK4 over [0, T] and record every grid point."""
    dt = scenario.dt
    n_steps = max(1, round(scenario.T / dt))
    n, m = scenario.n, scenario.m

    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, n, m))
    inputs = np.empty((n_steps + 1, n, m))
    disturbances = np.empty((n_steps + 1, n, m))

    x = scenario.initial_state()
    for k in range(n_steps + 1):
        t = k * dt
        u, w = _field(t, x, scenario)
        times[k] = t
        states[k] = x
        inputs[k] = u
        disturbances[k] = w

        norm = float(np.sqrt(np.sum(x * x)))
        if not math.isfinite(norm) or norm > DIVERGENCE_NORM:
            partial = Trace(
                times=times[: k + 1].copy(),
                states=states[: k + 1].copy(),
                inputs=inputs[: k + 1].copy(),
                disturbances=disturbances[: k + 1].copy(),
            )
            raise TrajectoryDiverged(t, partial)
        if k == n_steps:
            break

        k1 = u + w
        k2 = vector_field(t + 0.5 * dt, x + (0.5 * dt) * k1, scenario)
        k3 = vector_field(t + 0.5 * dt, x + (0.5 * dt) * k2, scenario)
        k4 = vector_field(t + dt, x + dt * k3, scenario)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return Trace(times=times, states=states, inputs=inputs, disturbances=disturbances)
