"""Command line: ``lfcsim {run,tune,probe,validate} <scenario>``.

Exit codes: 0 success, 1 parse/validation failure, 2 divergence,
3 I/O failure.
"""
import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .control import tune_gains
from .errors import AllUnstableError, DivergenceError, LFCError, ParseError, UnknownSignalError, ValidationError
from .network import assemble_multi_area
from .report import run_scenario
from .scenario import parse_scenario
from .sim_engine import convergence_probe

log = logging.getLogger("lfcsim")

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3


def cmd_validate(args, scenario):
    s = scenario.system
    print(f"{scenario.name}: ok ({len(s.areas)} area(s), {len(s.ties)} tie(s), "
          f"{len(scenario.disturbances)} disturbance(s))")
    return EXIT_OK


def cmd_run(args, scenario):
    plot = [p for p in (args.plot or "").split(",") if p]
    bundle = run_scenario(scenario, args.out, plot)
    print(f"wrote {bundle.csv_path}")
    print(f"wrote {bundle.metrics_path}")
    for p in bundle.plot_paths:
        print(f"wrote {p}")
    res = bundle.result
    for name in res.series:
        if name.startswith("df_"):
            print(f"  {name}: final {res.final(name):.6g} pu")
    if bundle.diverged:
        log.error("simulation diverged; partial trajectory written")
    return bundle.exit_code


def cmd_tune(args, scenario):
    if scenario.tuning is None:
        raise ValidationError(scenario.name, "tune needs a [tuning] section")
    result = tune_gains(scenario, scenario.tuning, workers=args.workers)
    c = scenario.tuning
    print(f"# {c.kind} over {len(result.table)} grid points, horizon {c.horizon:g} s")
    print("Kp,Ki,score")
    for kp, ki, score in result.table:
        print(f"{kp!r},{ki!r},{score!r}")
    snippet = f"Kp = {result.gains.Kp!r}\nKi = {result.gains.Ki!r}\n"
    print(f"# best {c.kind} = {result.score!r}; paste into each [areas.<id>] section:")
    print(snippet, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{scenario.name}_tuned.cfg").write_text(
            f"# {c.kind} = {result.score!r}\n"
            + "".join(f"[areas.{a.id}]\n{snippet}\n" for a in scenario.system.areas)
        )
    return EXIT_OK


def cmd_probe(args, scenario):
    model = assemble_multi_area(scenario.system)
    rep = convergence_probe(model, scenario.disturbances, scenario.config, args.refinements)
    print("dt,max_diff_to_next")
    for dt, d in zip(rep.dts, rep.differences):
        print(f"{dt!r},{d!r}")
    for r in rep.ratios:
        print("ratio exact" if r is None else f"ratio {r:.3f}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="lfcsim", description="Load-frequency control scenario runner")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write CSV + metrics")
    r.add_argument("scenario")
    r.add_argument("--out", default="out")
    r.add_argument("--plot", help="comma-separated signal names to plot (SVG)")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("tune", help="grid-search PI gains using the [tuning] section")
    t.add_argument("scenario")
    t.add_argument("--out")
    t.add_argument("--workers", type=int, default=1)
    t.set_defaults(func=cmd_tune)

    pr = sub.add_parser("probe", help="RK4 step-halving convergence check")
    pr.add_argument("scenario")
    pr.add_argument("--refinements", type=int, default=2)
    pr.set_defaults(func=cmd_probe)

    v = sub.add_parser("validate", help="parse and validate only")
    v.add_argument("scenario")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        scenario = parse_scenario(args.scenario)
        return args.func(args, scenario)
    except (ParseError, ValidationError, UnknownSignalError) as e:
        log.error("%s", e)
        return EXIT_INVALID
    except (DivergenceError, AllUnstableError) as e:
        log.error("%s", e)
        return EXIT_DIVERGED
    except OSError as e:
        log.error("%s", e)
        return EXIT_IO
    except LFCError as e:
        log.error("%s", e)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
