"""Command-line driver: ground states, surfaces, simulations, optimisation, sweeps.

Every file written starts with a ``#`` header recording the tool version, a
hash of the resolved parameters and the overrides used, so runs are
reproducible from their outputs alone. Nothing time- or host-dependent goes
into the output, so identical inputs give byte-identical files.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import SystemParams, dumps_config, load_config, parse_overrides
from .control import (THRESHOLD, OptimizationResult, exact_problem, optimize_stage1,
                      optimize_stage2, speed_limit_scan, surface_problem, terminal_error)
from .gpe import NumericalError, ground_state
from .grid import magnetization, write_field_csv
from .observables import pressure_exact, work_report
from .piston import (PistonTrajectory, StationarySurface, build_surface, equilibrium_position,
                     simulate_exact, simulate_surrogate)
from .schedule import ControlSchedule
from .trial import TrialParams, trial_pressure_shift

log = logging.getLogger("rabipiston")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class Manifest:
    """Resolved parameters plus the provenance lines stamped on every output."""

    def __init__(self, command: str, params: SystemParams, config_path, overrides, args: dict):
        self.command = command
        self.params = params
        self.config_path = config_path
        self.overrides = list(overrides)
        self.args = args

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(dumps_config(self.params).encode()).hexdigest()[:16]

    def header(self) -> str:
        lines = [
            f"rabipiston {__version__}",
            f"command = {self.command}",
            f"config = {self.config_path or '<defaults>'}",
            f"config_hash = {self.config_hash}",
            f"overrides = {' '.join(self.overrides) or '<none>'}",
        ]
        lines += [f"arg.{k} = {v}" for k, v in sorted(self.args.items())]
        lines.append("deterministic = true")
        lines += ["param." + line for line in dumps_config(self.params).splitlines()]
        return "".join(f"# {line}\n" for line in lines)


def _csv(path: Path, header: str, columns: str, rows, fmt="%.12g") -> None:
    with open(path, "w") as fh:
        fh.write(header)
        fh.write(columns + "\n")
        if len(rows):
            np.savetxt(fh, np.asarray(rows, dtype=float), delimiter=",", fmt=fmt)


def _keyvalues(path: Path, header: str, items) -> None:
    body = "".join(f"{k} = {_fmt(v)}\n" for k, v in items)
    Path(path).write_text(header + body)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _load_surface(args, required: bool = True) -> StationarySurface | None:
    if args.surface is None:
        if required:
            raise ValueError(f"{args.command} needs a stationary surface file: pass --surface FILE "
                             "(build one with the 'surface' subcommand)")
        return None
    return StationarySurface.from_file(args.surface)


def _schedule(args) -> ControlSchedule:
    if (args.c1 is None) != (args.c2 is None):
        raise ValueError("--c1 and --c2 must be given together")
    if args.c1 is None:
        return ControlSchedule.reference(args.tf)
    return ControlSchedule.quintic(args.tf, args.c1, args.c2)


# --------------------------------------------------------------------------
# subcommands

def cmd_ground_state(args, m: Manifest) -> None:
    p = m.params
    gs = ground_state(args.a, args.phi, p, tol=args.tol)
    head = m.header()
    write_field_csv(gs.field, args.out / "ground_state_field.csv", header=head)
    _keyvalues(args.out / "ground_state.txt", head, [
        ("a", args.a), ("phi", args.phi), ("energy", gs.energy),
        ("pressure", pressure_exact(gs.field, args.a, p)),
        ("magnetization", magnetization(gs.field)),
        ("iterations", gs.iterations), ("residual", gs.residual),
    ])


def cmd_surface(args, m: Manifest) -> None:
    def progress(done, total):
        log.info("surface column %d/%d", done, total)

    surf = build_surface((args.a_min, args.a_max), (args.phi_min * math.pi, args.phi_max * math.pi),
                         args.na, args.nphi, m.params, tol=args.tol, jobs=args.jobs,
                         progress=progress)
    surf.to_file(args.out / args.name, header=m.header())


def _starting_points(args, p, surface, mode):
    """(a0, a_target): explicit flags win, otherwise the equilibria in the active mode."""
    if mode == "surrogate" or (surface is not None and args.equilibria == "surface"):
        prob = surface_problem(args.tf, surface, p, args.a0, args.a_target)
    else:
        prob = exact_problem(args.tf, p, args.a0, args.a_target)
    return prob.a0, prob.a_target


def cmd_simulate(args, m: Manifest) -> None:
    p = m.params
    sched = _schedule(args)
    surface = _load_surface(args, required=args.mode == "surrogate")
    a0, target = _starting_points(args, p, surface, args.mode)
    if args.mode == "exact":
        snap = args.out / "snapshots" if args.snapshot_every else None
        if snap is not None:
            snap.mkdir(exist_ok=True)
        traj = simulate_exact(sched, params=p, a0=a0, snapshot_every=args.snapshot_every,
                              snapshot_dir=snap)
    else:
        traj = simulate_surrogate(sched, surface=surface, params=p, a0=a0)
    head = m.header()
    traj.subsample(args.every).to_csv(args.out / "trajectory.csv", header=head)
    xi2 = terminal_error(traj, target)
    _keyvalues(args.out / "summary.txt", head, [
        ("schedule", sched.describe()), ("mode", args.mode), ("a0", a0), ("a_target", target),
        ("a_final", traj.final_position), ("v_final", traj.final_velocity), ("xi2", xi2),
    ])
    print(f"xi2 = {xi2:.6g}  a(t_f) = {traj.final_position:.6f}  v(t_f) = {traj.final_velocity:.3e}")
    if args.mode == "exact" and surface is not None:
        ledger = work_report(traj, surface)
        (args.out / "work.txt").write_text(ledger.to_text(head))
        print(ledger.to_text(), end="")


def _write_result(path, res: OptimizationResult, head):
    Path(path).write_text(res.to_text(head))


def cmd_optimize(args, m: Manifest) -> None:
    p = m.params
    surface = _load_surface(args)
    head = m.header()
    s1 = optimize_stage1(args.tf, surface, p, jobs=args.jobs)
    _write_result(args.out / "stage1.txt", s1, head)
    print(f"stage 1: c1 = {s1.c1:.6f}  c2 = {s1.c2:.6f}  surrogate xi2 = {s1.xi2:.4g}")
    rows = list(s1.log)
    if s1.xi2 >= THRESHOLD and not args.force_stage2:
        print(f"stage 1 error {s1.xi2:.3g} is above {THRESHOLD:g}: t_f is below the speed "
              "limit, skipping stage 2")
    elif not args.skip_stage2:
        s2 = optimize_stage2((s1.c1, s1.c2), args.tf, p, jobs=args.jobs)
        _write_result(args.out / "stage2.txt", s2, head)
        rows += s2.log
        print(f"stage 2: c1 = {s2.c1:.6f}  c2 = {s2.c2:.6f}  exact xi2 = {s2.xi2:.4g}")
    table = [(stage, c1, c2, xi2, i + 1) for i, (stage, c1, c2, xi2) in enumerate(rows)]
    _csv(args.out / "optimize_log.csv", head, "stage,c1,c2,xi2,evaluations", table)


def _tf_values(args):
    if args.tf_list:
        return [float(v) for v in args.tf_list.split(",")]
    n = int(round((args.tf_max - args.tf_min) / args.tf_step))
    return [args.tf_min + i * args.tf_step for i in range(n + 1)]


def cmd_speed_limit(args, m: Manifest) -> None:
    surface = _load_surface(args)
    rows, t_fc = speed_limit_scan(_tf_values(args), m.params, surface, jobs=args.jobs)
    head = m.header() + f"# t_fc = {t_fc if t_fc is not None else 'none'}\n"
    _csv(args.out / "speed_limit.csv", head, "t_f,xi2,c1,c2", rows)
    print(f"t_fc = {t_fc}" if t_fc is not None else "no scanned t_f reaches the threshold")


def cmd_trial(args, m: Manifest) -> None:
    p = m.params
    deltas = [float(v) for v in args.deltas.split(",")]
    a_values = np.linspace(args.a_min, args.a_max, args.na)
    rows = []
    for d in deltas:
        base = p.replace(delta=0.0)
        hot = p.replace(delta=d)
        warm0 = warm1 = None
        for a in a_values:
            shift = trial_pressure_shift(TrialParams(p.g_s, d, float(a)))
            numeric = math.nan
            if args.numeric:
                g0 = ground_state(a, 0.0, base, initial=warm0)
                g1 = ground_state(a, 0.0, hot, initial=warm1)
                warm0, warm1 = g0.field, g1.field
                numeric = pressure_exact(g1.field, a, hot) - pressure_exact(g0.field, a, base)
            rows.append((a, d, shift, numeric))
    _csv(args.out / "trial_shift.csv", m.header(), "a,delta,shift_trial,shift_numeric", rows)


def cmd_work_report(args, m: Manifest) -> None:
    surface = _load_surface(args)
    traj = PistonTrajectory.from_csv(args.trajectory)
    ledger = work_report(traj, surface)
    (args.out / "work.txt").write_text(ledger.to_text(m.header()))
    print(ledger.to_text(), end="")


def cmd_equilibrium(args, m: Manifest) -> None:
    surface = _load_surface(args, required=False)
    rows = [(phi, equilibrium_position(phi, m.params, surface)) for phi in (0.0, math.pi / 2)]
    _csv(args.out / "equilibria.csv", m.header(), "phi,a_eq", rows)
    for phi, a in rows:
        print(f"a_eq(phi={phi:.6f}) = {a:.6f}")


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value parameter file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter (repeatable)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rabipiston", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    def surface_flag(sp):
        sp.add_argument("--surface", type=Path, help="stationary surface file")

    def schedule_flags(sp, tf_default=60.0):
        sp.add_argument("--tf", type=float, default=tf_default, help="protocol duration (tau)")

    sp = add("ground-state", cmd_ground_state, "ground state at fixed piston and Rabi angle")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--phi", type=float, default=0.0)
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = add("surface", cmd_surface, "tabulate E_gs, P_st and S over (a, phi)")
    sp.add_argument("--na", type=int, default=71)
    sp.add_argument("--nphi", type=int, default=51)
    sp.add_argument("--a-min", type=float, default=1.55)
    sp.add_argument("--a-max", type=float, default=1.90)
    sp.add_argument("--phi-min", type=float, default=-0.2, help="in units of pi")
    sp.add_argument("--phi-max", type=float, default=0.7, help="in units of pi")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--name", default="surface.txt")

    sp = add("simulate", cmd_simulate, "piston trajectory under a control schedule")
    schedule_flags(sp)
    surface_flag(sp)
    sp.add_argument("--mode", choices=("exact", "surrogate"), default="exact")
    sp.add_argument("--c1", type=float, help="quintic control value at t_f/3 (units of pi)")
    sp.add_argument("--c2", type=float, help="quintic control value at 2t_f/3 (units of pi)")
    sp.add_argument("--a0", type=float, help="initial piston position (default: equilibrium)")
    sp.add_argument("--a-target", type=float, help="target position (default: equilibrium)")
    sp.add_argument("--equilibria", choices=("exact", "surface"), default="exact",
                    help="how default a0/a_target are found in exact mode")
    sp.add_argument("--every", type=int, default=40, help="write every n-th sample")
    sp.add_argument("--snapshot-every", type=int, help="dump the field every n steps")

    sp = add("optimize", cmd_optimize, "two-stage optimisation of (c1, c2)")
    schedule_flags(sp)
    surface_flag(sp)
    sp.add_argument("--skip-stage2", action="store_true")
    sp.add_argument("--force-stage2", action="store_true",
                    help="run stage 2 even when stage 1 misses the threshold")

    sp = add("speed-limit", cmd_speed_limit, "best surrogate error versus t_f")
    surface_flag(sp)
    sp.add_argument("--tf-min", type=float, default=40.0)
    sp.add_argument("--tf-max", type=float, default=70.0)
    sp.add_argument("--tf-step", type=float, default=2.0)
    sp.add_argument("--tf-list", help="comma-separated t_f values (overrides the range)")

    sp = add("trial", cmd_trial, "trial-model pressure shift versus a")
    sp.add_argument("--deltas", default="1,2,5")
    sp.add_argument("--a-min", type=float, default=0.5)
    sp.add_argument("--a-max", type=float, default=4.0)
    sp.add_argument("--na", type=int, default=71)
    sp.add_argument("--numeric", action="store_true",
                    help="add the ground-state shift at phi = 0 (slow)")

    sp = add("work-report", cmd_work_report, "work decomposition of a saved trajectory")
    surface_flag(sp)
    sp.add_argument("--trajectory", type=Path, required=True)

    sp = add("equilibrium", cmd_equilibrium, "equilibrium positions at phi = 0 and pi/2")
    surface_flag(sp)
    return parser


_SKIP_ARGS = {"func", "command", "config", "set", "out", "jobs", "verbose"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        base = load_config(args.config) if args.config else SystemParams()
        params = parse_overrides(args.set, base)
        if args.jobs < 1:
            raise ValueError("--jobs must be >= 1")
        args.out.mkdir(parents=True, exist_ok=True)
        recorded = {k: v for k, v in vars(args).items() if k not in _SKIP_ARGS and v is not None}
        manifest = Manifest(args.command, params, args.config, args.set, recorded)
        args.func(args, manifest)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
