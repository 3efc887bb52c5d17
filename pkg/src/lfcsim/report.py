"""Result bundles: CSV trajectories and JSON metric summaries."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import DivergenceError, UnknownSignalError
from .network import assemble_multi_area
from .plotting import emit_plot
from .sim_engine import SimResult, SimScenario, compute_metrics, integrate


@dataclass
class ResultBundle:
    out_dir: Path
    csv_path: Path
    metrics_path: Path
    plot_paths: List[Path] = field(default_factory=list)
    result: Optional[SimResult] = None
    diverged: bool = False

    @property
    def exit_code(self) -> int:
        return 2 if self.diverged else 0


def emit_csv(result: SimResult, path) -> Path:
    """Write ``time,<outputs...>`` with shortest round-trip floats, LF endings."""
    path = Path(path)
    names = list(result.series)
    cols = [result.time] + [result.series[n] for n in names]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_csv(path) -> SimResult:
    """Load a CSV written by :func:`emit_csv` (states are not stored)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    series = {name: data[:, k + 1].copy() for k, name in enumerate(header[1:])}
    return SimResult(data[:, 0].copy(), series, np.zeros((len(body), 0)))


def metrics_summary(result: SimResult, scenario: Optional[SimScenario] = None) -> dict:
    signals = {}
    for name, values in result.series.items():
        if not result.time.size:
            break
        m = result.metrics.get(name) or compute_metrics(values, result.time)
        entry = asdict(m)
        entry["settled"] = m.settled
        if scenario is not None and name.startswith("df_"):
            entry["peak_deviation_hz"] = m.peak_deviation * scenario.base_frequency
        signals[name] = entry
    doc = {"diverged": result.diverged, "samples": int(result.time.size), "signals": signals}
    if scenario is not None:
        doc = {
            "scenario": scenario.name,
            "dt": scenario.config.dt,
            "t_end": scenario.config.t_end,
            "record_stride": scenario.config.record_stride,
            "base_frequency": scenario.base_frequency,
            **doc,
        }
    return doc


def emit_metrics(result: SimResult, path, scenario: Optional[SimScenario] = None) -> Path:
    path = Path(path)
    path.write_text(json.dumps(metrics_summary(result, scenario), indent=2) + "\n")
    return path


def run_scenario(scenario: SimScenario, out_dir, plot: Sequence[str] = ()) -> ResultBundle:
    """Assemble, integrate and write ``<name>.csv`` and ``<name>_metrics.json``.

    On divergence the partial trajectory is still written and the bundle
    is flagged (exit code 2).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = assemble_multi_area(scenario.system)
    missing = [s for s in plot if s not in model.output_names]
    if missing:
        raise UnknownSignalError(f"unknown signal(s) {missing}; available: {list(model.output_names)}")
    try:
        result = integrate(model, scenario.disturbances, scenario.config)
    except DivergenceError as e:
        result = e.partial
    csv_path = emit_csv(result, out / f"{scenario.name}.csv")
    metrics_path = emit_metrics(result, out / f"{scenario.name}_metrics.json", scenario)
    bundle = ResultBundle(out, csv_path, metrics_path, result=result, diverged=result.diverged)
    if plot and result.time.size:
        p = out / f"{scenario.name}_{'_'.join(plot)}.svg"
        bundle.plot_paths.append(Path(emit_plot(result, plot, p)))
    return bundle
