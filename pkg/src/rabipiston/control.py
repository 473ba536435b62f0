"""Terminal-error functional and the two-stage optimisation of (c1, c2).

Stage 1 works entirely on the surrogate (tabulated stationary pressure) and
is cheap; stage 2 refines the stage-1 optimum against exact co-simulations
with a shrinking 3x3 neighbourhood search.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .config import SystemParams
from .piston import (PistonTrajectory, StationarySurface, SurfaceRangeError,
                     equilibrium_position, simulate_exact, simulate_surrogate)
from .schedule import ControlSchedule

log = logging.getLogger(__name__)

A_SCALE = 0.1
V_SCALE = 0.01
A_TARGET = 1.68
THRESHOLD = 1e-4


def terminal_error(trajectory: PistonTrajectory, a_target: float = A_TARGET,
                   a_scale: float = A_SCALE, v_scale: float = V_SCALE) -> float:
    """xi^2 = ((a(t_f) - a_target)/a_scale)^2 + (v(t_f)/v_scale)^2."""
    da = (trajectory.final_position - a_target) / a_scale
    dv = trajectory.final_velocity / v_scale
    return da * da + dv * dv


@dataclass
class OptimizationResult:
    c1: float
    c2: float
    xi2: float
    evaluations: int
    stage: int
    t_f: float = math.nan
    log: list = field(default_factory=list, repr=False)

    def to_text(self, header: str = "") -> str:
        return header + "".join(
            f"{k} = {v!r}\n" for k, v in
            (("stage", self.stage), ("t_f", self.t_f), ("c1", self.c1), ("c2", self.c2),
             ("xi2", self.xi2), ("evaluations", self.evaluations)))


@dataclass(frozen=True)
class Problem:
    """Everything a candidate evaluation needs; picklable for worker pools."""
    t_f: float
    params: SystemParams
    a0: float
    a_target: float
    dt: float | None = None


def _surrogate_xi2(problem: Problem, surface: StationarySurface, c1: float, c2: float) -> float:
    sched = ControlSchedule.quintic(problem.t_f, c1, c2)
    try:
        traj = simulate_surrogate(sched, surface=surface, params=problem.params, a0=problem.a0,
                                  dt=problem.dt)
    except SurfaceRangeError:
        return math.inf
    return terminal_error(traj, problem.a_target)


def surface_problem(t_f: float, surface: StationarySurface, params: SystemParams,
                    a0: float | None = None, a_target: float | None = None,
                    dt: float | None = None) -> Problem:
    """Start and target positions from the surrogate's own equilibria."""
    if a0 is None:
        a0 = equilibrium_position(0.0, params, surface)
    if a_target is None:
        a_target = equilibrium_position(np.pi / 2, params, surface)
    return Problem(float(t_f), params, float(a0), float(a_target), dt)


def _scan_chunk(args):
    problem, surface, points = args
    return [_surrogate_xi2(problem, surface, c1, c2) for c1, c2 in points]


def optimize_stage1(t_f: float, surface: StationarySurface, params: SystemParams,
                    grid_step: float = 0.025, bounds=(-0.1, 0.6), simplex_tol: float = 1e-4,
                    a0: float | None = None, a_target: float | None = None,
                    jobs: int = 1, dt: float | None = 0.01) -> OptimizationResult:
    """Grid scan over (c1, c2) then Nelder-Mead refinement, all on the surrogate.

    Candidates that leave the surface score +inf. ``dt`` is the RK4 step of
    the candidate runs (None: the exact-mode step); the piston motion is slow
    enough that 0.01 tau reproduces xi^2 of the fine step to ~1e-13.
    """
    problem = surface_problem(t_f, surface, params, a0, a_target, dt)
    nodes = np.round(np.arange(bounds[0], bounds[1] + 0.5 * grid_step, grid_step), 12)
    points = [(c1, c2) for c1 in nodes for c2 in nodes]
    if jobs > 1:
        chunks = [points[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_scan_chunk, [(problem, surface, c) for c in chunks]))
        values = [None] * len(points)
        for i, part in enumerate(parts):
            values[i::jobs] = part
    else:
        values = _scan_chunk((problem, surface, points))
    history = [(1, c1, c2, xi2) for (c1, c2), xi2 in zip(points, values)]
    best = int(np.argmin(values))
    if not math.isfinite(values[best]):
        raise SurfaceRangeError(f"every stage-1 candidate at t_f={t_f} left the surface")
    x0 = np.array(points[best])

    def objective(c):
        xi2 = _surrogate_xi2(problem, surface, float(c[0]), float(c[1]))
        history.append((1, float(c[0]), float(c[1]), xi2))
        return xi2

    simplex = np.array([x0, x0 + [grid_step, 0.0], x0 + [0.0, grid_step]])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 0.5 * simplex_tol,
                            "fatol": 0.0, "maxiter": 2000, "maxfev": 4000})
    c1, c2 = (float(v) for v in res.x)
    xi2 = float(res.fun)
    if values[best] < xi2:
        c1, c2, xi2 = float(x0[0]), float(x0[1]), float(values[best])
    return OptimizationResult(c1, c2, xi2, len(history), 1, float(t_f), history)


def _exact_xi2(args):
    problem, c1, c2, initial = args
    sched = ControlSchedule.quintic(problem.t_f, c1, c2)
    traj = simulate_exact(sched, params=problem.params, a0=problem.a0, initial=initial)
    return terminal_error(traj, problem.a_target)


def exact_problem(t_f: float, params: SystemParams, a0: float | None = None,
                  a_target: float | None = None) -> Problem:
    """Start and target positions from direct ground-state equilibria."""
    if a0 is None:
        a0 = equilibrium_position(0.0, params)
    if a_target is None:
        a_target = equilibrium_position(np.pi / 2, params)
    return Problem(float(t_f), params, float(a0), float(a_target))


def optimize_stage2(start, t_f: float, params: SystemParams, step: float = 0.005,
                    min_step: float = 0.001, threshold: float = THRESHOLD,
                    a0: float | None = None, a_target: float | None = None,
                    jobs: int = 1, evaluate=None) -> OptimizationResult:
    """Neighbourhood descent on the exact xi^2 starting from the stage-1 optimum.

    Evaluates the 3x3 stencil of spacing ``step`` around the incumbent, moves
    to the best point, halves the step when nothing improves, and stops when
    the incumbent is below ``threshold`` or the step drops below ``min_step``.
    Ties go to the candidate nearest ``start``. ``evaluate(c1, c2)`` may be
    supplied to replace the exact simulation (tests use this).
    """
    from .gpe import ground_state

    start = (float(start[0]), float(start[1]))
    cache: dict = {}
    history: list = []
    if evaluate is None:
        problem = exact_problem(t_f, params, a0, a_target)
        initial = ground_state(problem.a0, 0.0, params).field

        def batch(points):
            tasks = [(problem, c1, c2, initial) for c1, c2 in points]
            if jobs > 1 and len(tasks) > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    return list(pool.map(_exact_xi2, tasks))
            return [_exact_xi2(t) for t in tasks]
    else:
        def batch(points):
            return [evaluate(c1, c2) for c1, c2 in points]

    def key(c):
        return (round(c[0], 9), round(c[1], 9))

    def evaluate_all(points):
        todo = [c for c in points if key(c) not in cache]
        for c, xi2 in zip(todo, batch(todo)):
            cache[key(c)] = xi2
            history.append((2, c[0], c[1], xi2))
            log.info("stage 2: c1=%.6f c2=%.6f xi2=%.6g", c[0], c[1], xi2)
        return [cache[key(c)] for c in points]

    def dist(c):
        return math.hypot(c[0] - start[0], c[1] - start[1])

    inc = start
    while True:
        stencil = [(inc[0] + i * step, inc[1] + j * step) for i in (-1, 0, 1) for j in (-1, 0, 1)]
        values = evaluate_all(stencil)
        inc_val = cache[key(inc)]
        if inc_val < threshold:
            break
        best_val = min(values)
        if best_val < inc_val:
            ties = [c for c, v in zip(stencil, values) if v == best_val]
            inc = min(ties, key=dist)
            continue
        step *= 0.5
        if step < min_step:
            break
    return OptimizationResult(inc[0], inc[1], cache[key(inc)], len(cache), 2, float(t_f), history)


def speed_limit_scan(t_f_values, params: SystemParams, surface: StationarySurface,
                     threshold: float = THRESHOLD, resolution: float = 0.1,
                     jobs: int = 1, **stage1_kw):
    """Best surrogate xi^2 for each t_f and the critical time t_f,c.

    t_f,c is the smallest t_f with xi^2 < ``threshold``, refined by bisection
    between the last failing and first passing scanned value. Returns
    ``(rows, t_fc)`` where rows is a list of (t_f, xi2, c1, c2); t_fc is None
    when no scanned value passes.
    """
    t_f_values = sorted(float(t) for t in t_f_values)
    if not t_f_values:
        raise ValueError("empty t_f list")
    problem = surface_problem(t_f_values[0], surface, params)
    kw = dict(a0=problem.a0, a_target=problem.a_target, jobs=jobs, **stage1_kw)

    def run(t_f):
        res = optimize_stage1(t_f, surface, params, **kw)
        log.info("speed limit: t_f=%.4g xi2=%.4g", t_f, res.xi2)
        return (t_f, res.xi2, res.c1, res.c2)

    rows = [run(t) for t in t_f_values]
    passing = [i for i, r in enumerate(rows) if r[1] < threshold]
    if not passing:
        return rows, None
    first = passing[0]
    if first == 0:
        return rows, rows[0][0]
    lo, hi = rows[first - 1][0], rows[first][0]
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        row = run(mid)
        rows.append(row)
        if row[1] < threshold:
            hi = mid
        else:
            lo = mid
    rows.sort()
    return rows, hi
