"""Fixed-step RK4 integration of assembled models, disturbances, metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import DivergenceError, UnknownAreaRef
from .network import MultiAreaSystem, SystemModel, assemble_multi_area, system_from_tf
from .tf_core import TransferFunction

DIVERGENCE_STATE = 1e6


@dataclass(frozen=True)
class Step:
    t0: float = 0.0
    magnitude: float = 1.0

    def __post_init__(self):
        if not self.t0 >= 0:
            raise ValueError(f"step t0 must be >= 0, got {self.t0}")

    def __call__(self, t: np.ndarray, t_end: float) -> np.ndarray:
        return np.where(t >= self.t0, self.magnitude, 0.0)

    def scaled(self, k):
        return Step(self.t0, k * self.magnitude)

    def delayed(self, dt):
        return Step(self.t0 + dt, self.magnitude)


@dataclass(frozen=True)
class Ramp:
    """Linear rise from 0 at ``t0`` to ``magnitude`` at ``t1``, then hold."""

    t0: float
    t1: float
    magnitude: float

    def __post_init__(self):
        if not self.t0 >= 0:
            raise ValueError(f"ramp t0 must be >= 0, got {self.t0}")
        if not self.t1 > self.t0:
            raise ValueError(f"ramp needs t1 > t0, got t0={self.t0}, t1={self.t1}")

    def __call__(self, t, t_end):
        frac = np.clip((t - self.t0) / (self.t1 - self.t0), 0.0, 1.0)
        return self.magnitude * frac

    def scaled(self, k):
        return Ramp(self.t0, self.t1, k * self.magnitude)

    def delayed(self, dt):
        return Ramp(self.t0 + dt, self.t1 + dt, self.magnitude)


@dataclass(frozen=True)
class Noise:
    """Zero-order-held uniform noise in ``[-amplitude, amplitude]``.

    Hold value ``k`` (covering ``[t0 + k*T, t0 + (k+1)*T)``) is the k-th
    draw of ``numpy.random.default_rng(seed).uniform(-1, 1, size)``
    times ``amplitude``; draws are taken in order, so a longer horizon
    only appends values.
    """

    t0: float
    amplitude: float
    seed: int
    sample_interval: float

    def __post_init__(self):
        if not self.t0 >= 0:
            raise ValueError(f"noise t0 must be >= 0, got {self.t0}")
        if not self.sample_interval > 0:
            raise ValueError(f"noise sample_interval must be > 0, got {self.sample_interval}")

    def __call__(self, t, t_end):
        n = int(math.floor(max(t_end - self.t0, 0.0) / self.sample_interval)) + 2
        draws = np.random.default_rng(self.seed).uniform(-1.0, 1.0, n)
        k = np.floor((t - self.t0) / self.sample_interval).astype(int)
        out = self.amplitude * draws[np.clip(k, 0, n - 1)]
        return np.where(t >= self.t0, out, 0.0)

    def scaled(self, k):
        return Noise(self.t0, k * self.amplitude, self.seed, self.sample_interval)

    def delayed(self, dt):
        return Noise(self.t0 + dt, self.amplitude, self.seed, self.sample_interval)


Shape = Union[Step, Ramp, Noise]


@dataclass(frozen=True)
class Disturbance:
    """A signal on one model input.

    ``target`` is an area id (meaning its ``dpl_<id>`` load input) or the
    literal name of a model input such as ``dpref_area1`` or ``u``.
    """

    target: str
    shape: Shape

    def input_name(self, model: SystemModel) -> str:
        if f"dpl_{self.target}" in model.input_names:
            return f"dpl_{self.target}"
        if self.target in model.input_names:
            return self.target
        raise UnknownAreaRef(f"disturbance target {self.target!r} is not an area or input of the model")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    t_end: float = 60.0
    record_stride: int = 1

    def __post_init__(self):
        if not (0 < self.dt <= 0.1):
            raise ValueError(f"dt must lie in (0, 0.1], got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end >= 1):
            raise ValueError(f"t_end must be >= 1 s, got {self.t_end}")
        if not (int(self.record_stride) == self.record_stride and self.record_stride >= 1):
            raise ValueError(f"record_stride must be an integer >= 1, got {self.record_stride}")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))


@dataclass(frozen=True)
class ResponseMetrics:
    peak_deviation: float
    peak_time: float
    settling_time: Optional[float]  # None when not settled inside the horizon
    steady_state: float

    @property
    def settled(self) -> bool:
        return self.settling_time is not None


@dataclass
class SimResult:
    time: np.ndarray
    series: Dict[str, np.ndarray]
    states: np.ndarray
    metrics: Dict[str, ResponseMetrics] = field(default_factory=dict)
    diverged: bool = False

    @property
    def names(self) -> List[str]:
        return list(self.series)

    def final(self, name: str) -> float:
        return float(self.series[name][-1])


@dataclass(frozen=True)
class SimScenario:
    system: MultiAreaSystem
    disturbances: tuple = ()
    config: SimConfig = field(default_factory=SimConfig)
    base_frequency: float = 50.0
    tuning: object = None
    name: str = "scenario"


def compute_metrics(series: np.ndarray, time: np.ndarray) -> ResponseMetrics:
    """Peak, settling (2% band of final, floor 1e-6), and steady state.

    The steady state is the mean over the last 5% of the horizon.
    """
    y = np.asarray(series, dtype=float)
    t = np.asarray(time, dtype=float)
    if y.size == 0:
        raise ValueError("empty series")
    ipk = int(np.argmax(np.abs(y)))
    tail = t >= t[-1] - 0.05 * (t[-1] - t[0])
    final = float(np.mean(y[tail]))
    band = max(0.02 * abs(final), 1e-6)
    outside = np.flatnonzero(np.abs(y - final) > band)
    if outside.size == 0:
        settling = float(t[0])
    elif outside[-1] == y.size - 1:
        settling = None
    else:
        settling = float(t[outside[-1] + 1])
    return ResponseMetrics(float(y[ipk]), float(t[ipk]), settling, final)


def _input_matrix(model: SystemModel, inputs: Sequence[Disturbance], t: np.ndarray, t_end: float) -> np.ndarray:
    U = np.zeros((t.size, model.ss.n_inputs))
    for d in inputs:
        j = model.input_names.index(d.input_name(model))
        U[:, j] += d.shape(t, t_end)
    return U


def _package(model, time, X, U, diverged=False) -> SimResult:
    ss = model.ss
    Y = X @ ss.C.T + U @ ss.D.T
    series = {name: Y[:, k].copy() for k, name in enumerate(model.output_names)}
    res = SimResult(time, series, X, diverged=diverged)
    if not diverged and time.size:
        res.metrics = {name: compute_metrics(v, time) for name, v in series.items()}
    return res


def integrate(model: SystemModel, inputs: Sequence[Disturbance], cfg: SimConfig) -> SimResult:
    """Classical RK4 on ``x' = A x + B u(t)`` from the zero state.

    Inputs are evaluated at the stage times (as one-sided limits at the
    step ends); outputs
    ``y = C x + D u`` are recorded every ``cfg.record_stride`` steps.
    """
    ss = model.ss
    A, B = ss.A, ss.B
    h = cfg.dt
    N = cfg.n_steps
    stride = int(cfg.record_stride)
    grid = np.arange(N + 1) * h
    mid = grid[:-1] + 0.5 * h
    # one-sided limits inside each step, so an event on a grid point
    # belongs wholly to the step that starts there
    eps = 1e-9 * h
    U0 = _input_matrix(model, inputs, grid, cfg.t_end)
    b_start = _input_matrix(model, inputs, grid[:-1] + eps, cfg.t_end) @ B.T
    b_mid = _input_matrix(model, inputs, mid, cfg.t_end) @ B.T
    b_end = _input_matrix(model, inputs, grid[1:] - eps, cfg.t_end) @ B.T

    rec = np.arange(0, N + 1, stride)
    X = np.zeros((rec.size, ss.n_states))
    x = np.zeros(ss.n_states)
    r = 1
    for k in range(N):
        k1 = A @ x + b_start[k]
        k2 = A @ (x + 0.5 * h * k1) + b_mid[k]
        k3 = A @ (x + 0.5 * h * k2) + b_mid[k]
        k4 = A @ (x + h * k3) + b_end[k]
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(x) <= DIVERGENCE_STATE):
            done = rec[:r]
            partial = _package(model, grid[done], X[:r], U0[done], diverged=True)
            raise DivergenceError(f"state exceeded {DIVERGENCE_STATE:g} at t = {grid[k + 1]:.6g} s", partial)
        if (k + 1) % stride == 0:
            X[r] = x
            r += 1
    return _package(model, grid[rec], X, U0[rec])


def step_response(g: TransferFunction, cfg: SimConfig) -> SimResult:
    """Unit step at t = 0 into ``g``; the output series is named ``y``."""
    return integrate(system_from_tf(g), [Disturbance("u", Step(0.0, 1.0))], cfg)


@dataclass(frozen=True)
class ProbeReport:
    dts: tuple
    differences: tuple
    # None where both differences sit at roundoff level (solution exact)
    ratios: tuple


def convergence_probe(model: SystemModel, inputs: Sequence[Disturbance], cfg: SimConfig,
                      refinements: int = 2) -> ProbeReport:
    """Halve dt ``refinements`` times and compare outputs on the coarse grid.

    For RK4 each halving should shrink the difference by about 16.
    """
    runs = []
    dts = []
    for j in range(refinements + 1):
        f = 2 ** j
        c = SimConfig(cfg.dt / f, cfg.t_end, cfg.record_stride * f)
        res = integrate(model, inputs, c)
        runs.append(np.column_stack(list(res.series.values())))
        dts.append(c.dt)
    scale = max(1.0, max(float(np.max(np.abs(r))) for r in runs))
    diffs = tuple(float(np.max(np.abs(a - b))) for a, b in zip(runs, runs[1:]))
    floor = 1e-13 * scale
    ratios = tuple(
        None if (d1 <= floor or d2 <= floor) else d1 / d2 for d1, d2 in zip(diffs, diffs[1:])
    )
    return ProbeReport(tuple(dts), diffs, ratios)


def run_scenario_sim(scenario: SimScenario) -> SimResult:
    return integrate(assemble_multi_area(scenario.system), scenario.disturbances, scenario.config)
