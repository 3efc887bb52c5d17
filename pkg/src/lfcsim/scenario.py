"""Scenario files: INI-style ``.cfg`` documents parsed with configparser.

Sections::

    [sim]                  dt, t_end, record_stride, base_frequency
    [areas.<id>]           kind, H, D, R, tau_g, tau_t | T_w, R_t, T_r,
                           compensation, Kp, Ki, B
    [ties.<name>]          from, to, T
    [disturbances.<name>]  target, shape, t0, magnitude | t1 | amplitude,
                           seed, sample_interval
    [tuning]               criterion, horizon, kp_min, kp_max, kp_step,
                           ki_min, ki_max, ki_step

Every value is checked before anything is simulated; errors carry
``file:line [section] key``.
"""
from __future__ import annotations

import configparser
import math
import re
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .control import BiasSetting, PIGains, TuningCriterion
from .errors import ParseError, ValidationError
from .network import AreaModel, MultiAreaSystem, TieLine
from .plant_models import GeneratorParams, GovernorParams, HydroTurbineParams, ThermalTurbineParams
from .sim_engine import Disturbance, Noise, Ramp, SimConfig, SimScenario, Step

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^([^\s=:#;][^=:]*?)\s*[=:]")


MAX_STEPS = 10_000_000


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


# key -> (converter, check, invariant text)
_SIM_KEYS = {
    "dt": (float, lambda v: 0 < v <= 0.1, "dt must lie in (0, 0.1] s"),
    "t_end": (float, lambda v: v >= 1, "t_end must be >= 1 s"),
    "record_stride": (int, lambda v: v >= 1, "record_stride must be >= 1"),
    "base_frequency": (float, _pos, "base_frequency must be > 0 Hz"),
}
_AREA_COMMON = {
    "kind": (str, lambda v: v in ("thermal", "hydro"), "kind must be 'thermal' or 'hydro'"),
    "H": (float, _pos, "inertia H must be > 0"),
    "D": (float, _nonneg, "load damping D must be >= 0"),
    "R": (float, _pos, "droop R must be > 0"),
    "tau_g": (float, _pos, "governor time constant tau_g must be > 0"),
    "Kp": (float, _nonneg, "Kp must be >= 0"),
    "Ki": (float, _nonneg, "Ki must be >= 0"),
    "B": (float, _pos, "frequency bias B must be > 0"),
}
_AREA_THERMAL = {"tau_t": (float, _pos, "turbine time constant tau_t must be > 0")}
_AREA_HYDRO = {
    "T_w": (float, _pos, "water starting time T_w must be > 0"),
    "R_t": (float, _pos, "temporary droop R_t must be > 0"),
    "T_r": (float, _pos, "reset time T_r must be > 0"),
    "compensation": (str, lambda v: v in ("on", "off"), "compensation must be 'on' or 'off'"),
}
_TIE_KEYS = {
    "from": (str, bool, "from must name an area"),
    "to": (str, bool, "to must name an area"),
    "T": (float, _pos, "synchronizing coefficient T must be > 0"),
}
_DIST_COMMON = {
    "target": (str, bool, "target must name an area"),
    "shape": (str, lambda v: v in ("step", "ramp", "noise"), "shape must be step, ramp or noise"),
    "t0": (float, _nonneg, "t0 must be >= 0"),
}
_DIST_SHAPES = {
    "step": {"magnitude": (float, math.isfinite, "magnitude must be finite")},
    "ramp": {
        "magnitude": (float, math.isfinite, "magnitude must be finite"),
        "t1": (float, math.isfinite, "t1 must be finite"),
    },
    "noise": {
        "amplitude": (float, _nonneg, "amplitude must be >= 0"),
        "seed": (int, _nonneg, "seed must be a non-negative integer"),
        "sample_interval": (float, _pos, "sample_interval must be > 0"),
    },
}
_TUNING_KEYS = {
    "criterion": (str, lambda v: v in ("ISE", "ITAE"), "criterion must be ISE or ITAE"),
    "horizon": (float, lambda v: v >= 1, "horizon must be >= 1 s"),
    "kp_min": (float, _nonneg, "kp_min must be >= 0"),
    "kp_max": (float, _nonneg, "kp_max must be >= 0"),
    "kp_step": (float, _pos, "kp_step must be > 0"),
    "ki_min": (float, _nonneg, "ki_min must be >= 0"),
    "ki_max": (float, _nonneg, "ki_max must be >= 0"),
    "ki_step": (float, _pos, "ki_step must be > 0"),
}

_AREA_DEFAULTS = {"H": 5.0, "D": 0.8, "R": 0.05, "tau_g": 0.2, "tau_t": 0.5,
                  "T_w": 1.0, "R_t": 0.38, "T_r": 5.0, "compensation": "on"}


def _line_index(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    index = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            index[(section, None)] = n
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index[(section, m.group(1).strip())] = n
    return index


class _Reader:
    def __init__(self, path: str, text: str):
        self.path = path
        self.lines = _line_index(text)
        # no DEFAULT section: every key must live in the section it configures
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       default_section="\x00")
        cp.optionxform = str
        try:
            cp.read_string(text, source=path)
        except configparser.DuplicateSectionError as e:
            raise ParseError(f"{path}:{e.lineno}", f"duplicate section [{e.section}]") from None
        except configparser.DuplicateOptionError as e:
            raise ParseError(f"{path}:{e.lineno} [{e.section}]", f"duplicate key {e.option!r}") from None
        except configparser.MissingSectionHeaderError as e:
            raise ParseError(f"{path}:{e.lineno}", "key outside of any [section]") from None
        except configparser.ParsingError as e:
            lineno = e.errors[0][0] if e.errors else "?"
            raise ParseError(f"{path}:{lineno}", "malformed line (expected 'key = value')") from None
        self.cp = cp

    def loc(self, section: str, key: Optional[str] = None) -> str:
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        where = f"{self.path}:{line}" if line else self.path
        return f"{where} [{section}]" + (f" {key}" if key else "")

    def fail(self, section, key, message):
        raise ValidationError(self.loc(section, key), message)

    def read(self, section: str, schema: Dict[str, tuple], required=(), defaults=None) -> dict:
        body = self.cp[section]
        for key in body:
            if key not in schema:
                allowed = ", ".join(sorted(schema))
                self.fail(section, key, f"unknown key {key!r} (allowed: {allowed})")
        out = dict(defaults or {})
        for key in required:
            if key not in body:
                self.fail(section, None, f"missing required key {key!r}")
        for key, raw in body.items():
            conv, check, text = schema[key]
            try:
                value = conv(raw.strip())
            except ValueError:
                self.fail(section, key, f"{text}; could not read {raw.strip()!r} as {conv.__name__}")
            if conv is float and not math.isfinite(value):
                self.fail(section, key, f"{text}; got non-finite {raw.strip()!r}")
            if not check(value):
                self.fail(section, key, f"{text} (got {raw.strip()})")
            out[key] = value
        return out

    def sections(self, prefix: str) -> List[Tuple[str, str]]:
        found = []
        for name in self.cp.sections():
            if name.startswith(prefix + "."):
                tail = name[len(prefix) + 1:]
                if not tail:
                    self.fail(name, None, f"[{prefix}.<name>] needs a name")
                found.append((name, tail))
        return found


def _build_area(rd: _Reader, section: str, area_id: str) -> AreaModel:
    kind = rd.cp[section].get("kind", "").strip()
    extra = _AREA_HYDRO if kind == "hydro" else _AREA_THERMAL
    schema = {**_AREA_COMMON, **extra}
    if kind not in ("thermal", "hydro"):
        schema = dict(_AREA_COMMON, **_AREA_THERMAL, **_AREA_HYDRO)
    v = rd.read(section, schema, required=("kind",), defaults=_AREA_DEFAULTS)
    controller = None
    if "Kp" in v or "Ki" in v:
        gains = PIGains(v.get("Kp", 0.0), v.get("Ki", 0.0))
        if gains.is_zero:
            rd.fail(section, "Ki", "Kp and Ki are both zero; omit them for primary-only control")
        controller = gains
    gen = GeneratorParams(v["H"], v["D"])
    gov = GovernorParams(v["tau_g"], v["R"])
    bias = BiasSetting(v["B"]) if "B" in v else None
    if kind == "hydro":
        compensation = v["compensation"] == "on"
        if compensation and not v["R_t"] > v["R"]:
            rd.fail(section, "R_t", f"temporary droop R_t={v['R_t']} must exceed droop R={v['R']}")
        turbine = HydroTurbineParams(v["T_w"], v["R_t"], v["T_r"])
        return AreaModel(area_id, "hydro", gen, gov, turbine, controller, bias, compensation)
    return AreaModel(area_id, "thermal", gen, gov, ThermalTurbineParams(v["tau_t"]), controller, bias)


def _build_disturbance(rd: _Reader, section: str, dt: float) -> Disturbance:
    shape = rd.cp[section].get("shape", "").strip()
    schema = dict(_DIST_COMMON, **_DIST_SHAPES.get(shape, {}))
    required = ("target", "shape") + tuple(_DIST_SHAPES.get(shape, {}))
    v = rd.read(section, schema, required=required, defaults={"t0": 0.0})
    if shape == "step":
        s = Step(v["t0"], v["magnitude"])
    elif shape == "ramp":
        if not v["t1"] > v["t0"]:
            rd.fail(section, "t1", f"ramp needs t1 > t0 (got t0={v['t0']}, t1={v['t1']})")
        s = Ramp(v["t0"], v["t1"], v["magnitude"])
    else:
        if v["sample_interval"] < dt:
            rd.fail(section, "sample_interval", f"sample_interval must be >= dt ({dt})")
        s = Noise(v["t0"], v["amplitude"], v["seed"], v["sample_interval"])
    return Disturbance(v["target"], s)


def loads(text: str, path: str = "<string>") -> SimScenario:
    """Parse and validate scenario text."""
    rd = _Reader(path, text)
    known = ("sim", "tuning")
    for name in rd.cp.sections():
        if name not in known and not name.startswith(("areas.", "ties.", "disturbances.")):
            rd.fail(name, None, f"unknown section [{name}]")

    if not rd.cp.has_section("sim"):
        raise ValidationError(path, "missing [sim] section")
    sim = rd.read("sim", _SIM_KEYS, defaults={"dt": 0.01, "t_end": 60.0, "record_stride": 1,
                                              "base_frequency": 50.0})
    if sim["t_end"] / sim["dt"] > MAX_STEPS:
        rd.fail("sim", "t_end", f"t_end / dt exceeds {MAX_STEPS} steps")
    cfg = SimConfig(sim["dt"], sim["t_end"], sim["record_stride"])

    areas = [_build_area(rd, sec, aid) for sec, aid in rd.sections("areas")]
    if not areas:
        raise ValidationError(path, "scenario needs at least one [areas.<id>] section")
    ids = {a.id for a in areas}

    ties = []
    pairs = {}
    for sec, _ in rd.sections("ties"):
        v = rd.read(sec, _TIE_KEYS, required=("from", "to"), defaults={"T": 0.545})
        for end in ("from", "to"):
            if v[end] not in ids:
                rd.fail(sec, end, f"unknown area {v[end]!r}")
        if v["from"] == v["to"]:
            rd.fail(sec, "to", "tie line must join two different areas")
        key = frozenset((v["from"], v["to"]))
        if key in pairs:
            rd.fail(sec, None, f"second tie between {v['from']} and {v['to']} (first in [{pairs[key]}])")
        pairs[key] = sec
        ties.append(TieLine(v["from"], v["to"], v["T"]))

    disturbances = []
    for sec, _ in rd.sections("disturbances"):
        d = _build_disturbance(rd, sec, cfg.dt)
        if d.target not in ids:
            rd.fail(sec, "target", f"unknown area {d.target!r}")
        disturbances.append(d)

    tuning = None
    if rd.cp.has_section("tuning"):
        v = rd.read("tuning", _TUNING_KEYS, required=tuple(k for k in _TUNING_KEYS if k != "criterion"),
                    defaults={"criterion": "ISE"})
        for g in ("kp", "ki"):
            if v[f"{g}_max"] < v[f"{g}_min"]:
                rd.fail("tuning", f"{g}_max", f"{g}_max must be >= {g}_min")
        if v["horizon"] / cfg.dt > MAX_STEPS:
            rd.fail("tuning", "horizon", f"horizon / dt exceeds {MAX_STEPS} steps")
        try:
            tuning = TuningCriterion.from_ranges(
                v["criterion"], v["horizon"],
                (v["kp_min"], v["kp_max"], v["kp_step"]), (v["ki_min"], v["ki_max"], v["ki_step"]),
            )
        except ValueError as e:
            rd.fail("tuning", None, str(e))

    return SimScenario(MultiAreaSystem(areas, ties), tuple(disturbances), cfg,
                       sim["base_frequency"], tuning, Path(path).stem)


def packaged_scenarios() -> List[str]:
    root = resources.files("lfcsim") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve(path) -> Path:
    """``path`` itself if it exists, else the packaged scenario of that name."""
    p = Path(path)
    if p.exists():
        return p
    if p.name in packaged_scenarios():
        return Path(str(resources.files("lfcsim") / "scenarios" / p.name))
    return p


def parse_scenario(path) -> SimScenario:
    """Read, parse and validate a scenario file (packaged names accepted).

    I/O problems surface as ``OSError``; content problems as
    :class:`ParseError` or :class:`ValidationError`.
    """
    p = resolve(path)
    return loads(p.read_text(), str(p))
