"""Assemble single- and multi-area LFC loops into one state-space model.

Each area is wired from SISO blocks (generator, governor, turbine,
optional PI controller, and a rotor-angle integrator when the area has
tie lines). Tie flows are static functions of the angle states,
``dPtie_ij = T_ij * (ddelta_i - ddelta_j)`` with ``ddelta' = 2*pi*df``,
so ``dPtie_ij' = 2*pi*T_ij*(df_i - df_j)``.

Signal naming (``<id>`` is the area id)::

    inputs   dpl_<id>, dpref_<id>
    outputs  df_<id>, ptie_<from>_<to>, dpm_<id>, dpv_<id>, ace_<id>
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .control import BiasSetting, PIGains, pi_controller_tf
from .errors import AlgebraicLoopError, UnknownAreaRef
from .plant_models import (
    GeneratorParams,
    GovernorParams,
    HydroTurbineParams,
    ThermalTurbineParams,
    generator_tf,
    governor_tf,
    hydro_governor_tf,
    hydro_turbine_tf,
    thermal_turbine_tf,
)
from .tf_core import StateSpace, TransferFunction, to_state_space

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AreaModel:
    id: str
    kind: str = "thermal"
    generator: GeneratorParams = field(default_factory=GeneratorParams)
    governor: GovernorParams = field(default_factory=GovernorParams)
    turbine: Union[ThermalTurbineParams, HydroTurbineParams, None] = None
    controller: Optional[PIGains] = None
    bias: Optional[BiasSetting] = None
    hydro_compensation: bool = True

    def __post_init__(self):
        if self.kind not in ("thermal", "hydro"):
            raise ValueError(f"area kind must be thermal or hydro, got {self.kind!r}")
        expected = ThermalTurbineParams if self.kind == "thermal" else HydroTurbineParams
        if self.turbine is None:
            object.__setattr__(self, "turbine", expected())
        elif not isinstance(self.turbine, expected):
            raise ValueError(f"{self.kind} area {self.id!r} needs {expected.__name__}")
        if self.bias is None:
            object.__setattr__(self, "bias", BiasSetting.from_area(self.generator.D, self.governor.R))

    def governor_block(self) -> TransferFunction:
        if self.kind == "hydro":
            return hydro_governor_tf(self.governor, self.turbine, self.hydro_compensation)
        return governor_tf(self.governor)

    def turbine_block(self) -> TransferFunction:
        if self.kind == "hydro":
            return hydro_turbine_tf(self.turbine)
        return thermal_turbine_tf(self.turbine)


@dataclass(frozen=True)
class TieLine:
    from_area: str
    to_area: str
    T: float = 0.545  # synchronizing coefficient [pu/rad]

    def __post_init__(self):
        if self.from_area == self.to_area:
            raise ValueError(f"tie line connects area {self.from_area!r} to itself")
        if not self.T > 0:
            raise ValueError(f"synchronizing coefficient T must be > 0, got {self.T}")

    @property
    def name(self) -> str:
        return f"ptie_{self.from_area}_{self.to_area}"


@dataclass(frozen=True)
class MultiAreaSystem:
    areas: Tuple[AreaModel, ...]
    ties: Tuple[TieLine, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "areas", tuple(self.areas))
        object.__setattr__(self, "ties", tuple(self.ties))
        if not self.areas:
            raise ValueError("system needs at least one area")
        ids = [a.id for a in self.areas]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate area ids in {ids}")
        pairs = set()
        for t in self.ties:
            for end in (t.from_area, t.to_area):
                if end not in ids:
                    raise UnknownAreaRef(f"tie {t.from_area}-{t.to_area} references unknown area {end!r}")
            key = frozenset((t.from_area, t.to_area))
            if key in pairs:
                raise ValueError(f"more than one tie between {t.from_area} and {t.to_area}")
            pairs.add(key)


@dataclass(frozen=True)
class AreaState:
    delta_omega: float
    delta_delta: Optional[float]
    internal: Dict[str, float]


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Assembled closed loop plus the bookkeeping needed to read it back."""

    ss: StateSpace
    input_names: Tuple[str, ...]
    output_names: Tuple[str, ...]
    state_names: Tuple[str, ...]
    area_ids: Tuple[str, ...] = ()
    ties: Tuple[TieLine, ...] = ()
    # per tie: (state row of the flow as seen by from_area, same for to_area)
    tie_views: Tuple[Tuple[np.ndarray, np.ndarray], ...] = ()
    # per area: state row of the net tie export
    injections: Dict[str, np.ndarray] = field(default_factory=dict)

    def output_index(self, name: str) -> int:
        return self.output_names.index(name)

    def area_state(self, area_id: str, x: np.ndarray) -> AreaState:
        x = np.asarray(x, dtype=float)
        y = self.ss.C @ x
        df = float(y[self.output_index(f"df_{area_id}")])
        suffix = f"_{area_id}["
        internal = {n: float(v) for n, v in zip(self.state_names, x) if suffix in n}
        angle = None
        if f"angle_{area_id}[0]" in self.state_names:
            angle = TWO_PI * internal[f"angle_{area_id}[0]"]
        return AreaState(df, angle, internal)


class _Diagram:
    """Static wiring of SISO state-space blocks.

    Block inputs and system outputs are linear combinations of block
    outputs and external inputs; :meth:`close` eliminates the algebraic
    part and returns one (A, B, C, D).
    """

    def __init__(self, input_names: Sequence[str]):
        self.inputs = list(input_names)
        self.blocks: List[Tuple[str, StateSpace]] = []
        self.wiring: Dict[str, Dict[str, float]] = {}
        self.outputs: List[Tuple[str, Dict[str, float]]] = []

    def add(self, name: str, g: TransferFunction):
        self.blocks.append((name, to_state_space(g)))

    def connect(self, block: str, terms: Dict[str, float]):
        self.wiring[block] = terms

    def output(self, name: str, terms: Dict[str, float]):
        self.outputs.append((name, terms))

    def close(self):
        names = [b for b, _ in self.blocks]
        bidx = {b: i for i, b in enumerate(names)}
        widx = {w: i for i, w in enumerate(self.inputs)}
        nb, nw = len(names), len(self.inputs)
        sizes = [ss.n_states for _, ss in self.blocks]
        offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        n = int(offs[-1])

        A = np.zeros((n, n))
        Bb = np.zeros((n, nb))
        Cb = np.zeros((nb, n))
        Db = np.zeros((nb, nb))
        state_names = []
        for i, (name, ss) in enumerate(self.blocks):
            s = slice(offs[i], offs[i + 1])
            A[s, s] = ss.A
            Bb[s, i] = ss.B[:, 0]
            Cb[i, s] = ss.C[0]
            Db[i, i] = ss.D[0, 0]
            state_names += [f"{name}[{k}]" for k in range(sizes[i])]

        def split(terms):
            my, mw = np.zeros(nb), np.zeros(nw)
            for sig, k in terms.items():
                if sig in bidx:
                    my[bidx[sig]] += k
                else:
                    mw[widx[sig]] += k
            return my, mw

        M = np.zeros((nb, nb))
        N = np.zeros((nb, nw))
        for name, terms in self.wiring.items():
            M[bidx[name]], N[bidx[name]] = split(terms)
        Pm = np.zeros((len(self.outputs), nb))
        Qm = np.zeros((len(self.outputs), nw))
        for r, (_, terms) in enumerate(self.outputs):
            Pm[r], Qm[r] = split(terms)

        # y = Cb x + Db (M y + N w)  =>  y = L (Cb x + Db N w)
        loop = np.eye(nb) - Db @ M
        if np.linalg.cond(loop) > 1e12:
            raise AlgebraicLoopError("block diagram contains a singular algebraic loop")
        L = np.linalg.inv(loop)
        Ys = L @ Cb  # block outputs per state
        Yw = L @ Db @ N  # block outputs per external input
        A_sys = A + Bb @ M @ Ys
        B_sys = Bb @ (M @ Yw + N)
        C_sys = Pm @ Ys
        D_sys = Pm @ Yw + Qm
        ss = StateSpace(A_sys, B_sys, C_sys, D_sys)
        return ss, tuple(state_names), Ys, Yw


def assemble_multi_area(s: MultiAreaSystem) -> SystemModel:
    """Closed-loop model of ``s`` with tie-line-bias secondary control.

    Areas with at least one tie feed ``-ACE`` to their controller; an
    isolated area feeds ``-df``.
    """
    ids = [a.id for a in s.areas]
    tied = {t.from_area for t in s.ties} | {t.to_area for t in s.ties}
    inputs = [f"dpl_{i}" for i in ids] + [f"dpref_{i}" for i in ids]
    dg = _Diagram(inputs)

    for a in s.areas:
        dg.add(f"gen_{a.id}", generator_tf(a.generator))
        dg.add(f"gov_{a.id}", a.governor_block())
        dg.add(f"turb_{a.id}", a.turbine_block())
        if a.controller is not None and not a.controller.is_zero:
            dg.add(f"ctrl_{a.id}", pi_controller_tf(a.controller))
        if a.id in tied:
            dg.add(f"angle_{a.id}", TransferFunction([TWO_PI], [0.0, 1.0]))

    # flow on each tie as seen from each end, over block outputs (angles)
    views: Dict[str, List[Tuple[int, Dict[str, float]]]] = {i: [] for i in ids}
    for k, t in enumerate(s.ties):
        views[t.from_area].append((k, {f"angle_{t.from_area}": t.T, f"angle_{t.to_area}": -t.T}))
        views[t.to_area].append((k, {f"angle_{t.to_area}": t.T, f"angle_{t.from_area}": -t.T}))

    def export(area_id):
        total: Dict[str, float] = {}
        for _, terms in views[area_id]:
            for sig, c in terms.items():
                total[sig] = total.get(sig, 0.0) + c
        return total

    def add_terms(acc, terms, scale=1.0):
        for sig, c in terms.items():
            acc[sig] = acc.get(sig, 0.0) + scale * c
        return acc

    has_ctrl = {b for b, _ in dg.blocks}
    for a in s.areas:
        i = a.id
        dg.connect(f"gen_{i}", add_terms({f"turb_{i}": 1.0, f"dpl_{i}": -1.0}, export(i), -1.0))
        gov_in = {f"dpref_{i}": 1.0, f"gen_{i}": -1.0 / a.governor.R}
        if f"ctrl_{i}" in has_ctrl:
            gov_in[f"ctrl_{i}"] = 1.0
            if i in tied:
                err = add_terms({f"gen_{i}": -a.bias.B}, export(i), -1.0)
            else:
                err = {f"gen_{i}": -1.0}
            dg.connect(f"ctrl_{i}", err)
        dg.connect(f"gov_{i}", gov_in)
        dg.connect(f"turb_{i}", {f"gov_{i}": 1.0})
        if i in tied:
            dg.connect(f"angle_{i}", {f"gen_{i}": 1.0})

    for i in ids:
        dg.output(f"df_{i}", {f"gen_{i}": 1.0})
    for k, t in enumerate(s.ties):
        dg.output(t.name, dict(views[t.from_area])[k])
    for i in ids:
        dg.output(f"dpm_{i}", {f"turb_{i}": 1.0})
    for i in ids:
        dg.output(f"dpv_{i}", {f"gov_{i}": 1.0})
    for a in s.areas:
        dg.output(f"ace_{a.id}", add_terms({f"gen_{a.id}": a.bias.B}, export(a.id)))

    ss, state_names, Ys, _ = dg.close()
    bidx = {b: r for r, (b, _) in enumerate(dg.blocks)}

    def row(terms):
        r = np.zeros(ss.n_states)
        for sig, c in terms.items():
            r = r + c * Ys[bidx[sig]]
        return r

    tie_views = tuple(
        (row(dict(views[t.from_area])[k]), row(dict(views[t.to_area])[k])) for k, t in enumerate(s.ties)
    )
    injections = {i: row(export(i)) for i in ids}

    return SystemModel(
        ss,
        tuple(inputs),
        tuple(name for name, _ in dg.outputs),
        state_names,
        tuple(ids),
        s.ties,
        tie_views,
        injections,
    )


def assemble_single_area(a: AreaModel) -> SystemModel:
    return assemble_multi_area(MultiAreaSystem((a,)))


def system_from_tf(g: TransferFunction, input_name: str = "u", output_name: str = "y") -> SystemModel:
    """Wrap a bare transfer function so it can be integrated."""
    return SystemModel(to_state_space(g), (input_name,), (output_name,),
                       tuple(f"x[{k}]" for k in range(g.order)))


def tie_antisymmetry_check(s: SystemModel, trajectory) -> bool:
    """Audit tie flows along a recorded trajectory.

    For every tie the flow seen by the sending area must be the exact
    negation of the flow seen by the receiving area, and the reported
    ``ptie`` column must equal the sending-side view.
    """
    X = np.asarray(trajectory.states)
    for t, (seen_from, seen_to) in zip(s.ties, s.tie_views):
        f_from = X @ seen_from
        f_to = X @ seen_to
        if not np.array_equal(f_from, -f_to):
            return False
        # reported column goes through a different BLAS path; allow roundoff only
        reported = trajectory.series.get(t.name)
        if reported is not None:
            scale = max(1.0, float(np.max(np.abs(f_from), initial=0.0)))
            if np.max(np.abs(reported - f_from), initial=0.0) > 1e-12 * scale:
                return False
    return True


def injection_balance(s: SystemModel, trajectory) -> np.ndarray:
    """Sum over areas of net tie export at each sample (ideally zero)."""
    X = np.asarray(trajectory.states)
    total = np.zeros(X.shape[0])
    for row in s.injections.values():
        total = total + X @ row
    return total
