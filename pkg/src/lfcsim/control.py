"""Droop and secondary (PI / integral) frequency control, ACE, gain tuning."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import AllUnstableError, DivergenceError, ZeroControllerError
from .tf_core import TransferFunction

#: any |df| beyond this marks a tuning run as diverged
DIVERGENCE_DF = 10.0


@dataclass(frozen=True)
class PIGains:
    Kp: float = 0.0
    Ki: float = 7.0

    def __post_init__(self):
        if not (self.Kp >= 0 and self.Ki >= 0):
            raise ValueError(f"PI gains must be non-negative, got Kp={self.Kp}, Ki={self.Ki}")

    @property
    def is_zero(self) -> bool:
        return self.Kp == 0 and self.Ki == 0


@dataclass(frozen=True)
class BiasSetting:
    B: float

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError(f"frequency bias B must be > 0, got {self.B}")

    @classmethod
    def from_area(cls, D: float, R: float) -> "BiasSetting":
        """Area frequency-response characteristic ``D + 1/R``."""
        return cls(D + 1.0 / R)


def pi_controller_tf(g: PIGains) -> TransferFunction:
    """``(Kp s + Ki) / s``; with ``Kp = 0`` this is the pure reset action ``Ki/s``."""
    if g.is_zero:
        raise ZeroControllerError("PI controller with Kp = Ki = 0")
    if g.Ki == 0:
        return TransferFunction.gain(g.Kp)
    return TransferFunction([g.Ki, g.Kp], [0.0, 1.0])


def steady_state_deviation(dPL: float, D: float, R: float) -> float:
    """Primary-control-only frequency offset ``-dPL / (D + 1/R)``.

    ``R = math.inf`` disables the droop path.
    """
    beta = D + (0.0 if math.isinf(R) else 1.0 / R)
    if not beta > 0:
        raise ValueError("D + 1/R must be positive")
    return -dPL / beta


def ace(df: float, dPtie: float, b: BiasSetting) -> float:
    """Area control error ``dPtie + B * df`` (tie export counted positive)."""
    return dPtie + b.B * df


MAX_GRID_POINTS = 10_000


def _grid(lo: float, hi: float, step: float) -> tuple:
    if not all(map(math.isfinite, (lo, hi, step))):
        raise ValueError("grid bounds must be finite")
    if step <= 0 or hi < lo:
        raise ValueError(f"bad grid {lo}:{hi}:{step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if n > MAX_GRID_POINTS:
        raise ValueError(f"grid {lo}:{hi}:{step} has {n} points (limit {MAX_GRID_POINTS})")
    return tuple(lo + i * step for i in range(n))


@dataclass(frozen=True)
class TuningCriterion:
    kind: str = "ISE"
    horizon: float = 20.0
    kp_values: tuple = (0.0,)
    ki_values: tuple = field(default_factory=lambda: _grid(1.0, 10.0, 1.0))

    def __post_init__(self):
        if self.kind not in ("ISE", "ITAE"):
            raise ValueError(f"criterion must be ISE or ITAE, got {self.kind!r}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")
        for name in ("kp_values", "ki_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} grid is empty")
            if not all(math.isfinite(v) and v >= 0 for v in vals):
                raise ValueError(f"{name} must be finite and non-negative")
            object.__setattr__(self, name, vals)

    @classmethod
    def from_ranges(cls, kind, horizon, kp_range, ki_range) -> "TuningCriterion":
        return cls(kind, horizon, _grid(*kp_range), _grid(*ki_range))


@dataclass(frozen=True)
class TuningResult:
    gains: PIGains
    score: float
    # (Kp, Ki, score) for every grid point, in evaluation order
    table: tuple = ()


def score_trajectory(time: np.ndarray, dfs: Sequence[np.ndarray], kind: str) -> float:
    """ISE = sum(df^2 dt) or ITAE = sum(t |df| dt), summed over areas."""
    h = time[1] - time[0] if len(time) > 1 else 0.0
    total = 0.0
    for df in dfs:
        if not np.all(np.isfinite(df)) or np.max(np.abs(df)) > DIVERGENCE_DF:
            return math.inf
        if kind == "ISE":
            total += float(np.sum(df * df) * h)
        else:
            total += float(np.sum(time * np.abs(df)) * h)
    return total


def evaluate_gains(scenario, gains: PIGains, criterion: TuningCriterion) -> float:
    """Simulate ``scenario`` with ``gains`` in every area and score it."""
    from .network import MultiAreaSystem, assemble_multi_area
    from .sim_engine import SimConfig, integrate

    ctrl = None if gains.is_zero else gains
    system = MultiAreaSystem(
        [replace(a, controller=ctrl) for a in scenario.system.areas], scenario.system.ties
    )
    cfg = SimConfig(scenario.config.dt, criterion.horizon, scenario.config.record_stride)
    model = assemble_multi_area(system)
    try:
        res = integrate(model, scenario.disturbances, cfg)
    except DivergenceError:
        return math.inf
    dfs = [res.series[f"df_{a.id}"] for a in system.areas]
    return score_trajectory(res.time, dfs, criterion.kind)


def tune_gains(scenario, c: TuningCriterion, workers: Optional[int] = None) -> TuningResult:
    """Exhaustive grid search over (Kp, Ki), applied uniformly to all areas.

    Ties on score go to the smallest Ki, then the smallest Kp. A grid
    point with both gains zero is evaluated as primary control only.
    """
    points = sorted({(kp, ki) for kp in c.kp_values for ki in c.ki_values}, key=lambda p: (p[1], p[0]))

    def run(p):
        return evaluate_gains(scenario, PIGains(*p), c)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            scores = list(pool.map(run, points))
    else:
        scores = [run(p) for p in points]

    best = None
    for (kp, ki), s in zip(points, scores):
        if math.isinf(s):
            continue
        if best is None or s < best[0]:
            best = (s, kp, ki)
    if best is None:
        raise AllUnstableError(f"all {len(points)} grid points diverged")
    table = tuple((kp, ki, s) for (kp, ki), s in zip(points, scores))
    return TuningResult(PIGains(best[1], best[2]), best[0], table)
