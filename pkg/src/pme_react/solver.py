"""Explicit finite-volume scheme for the weighted reaction-diffusion flow.

Discretization.  Radial domain [0, R] split into equal cells; faces sit at
``i Δr`` and carry the area factor ``r^(N-1)``, cell volumes are
``(r_out^N - r_in^N)/N`` (the N-sphere measure divided by the unit sphere
area).  The diffusive flux through an interior face is the two-point
difference of ``u^m``; the origin face has zero area and the outer face is
either a homogeneous Dirichlet ghost cell at distance Δr or a zero-flux
Neumann face.  The update is explicit Euler on
``u_i += dt/(rho_i V_i) (F_{i+1/2} - F_{i-1/2}) + dt u_i^p``.

Time step.  Diffusion-limited by ``cfl_safety * min_i rho_i Δr^2 / (2 N m
u_nbhd^(m-1))`` where ``u_nbhd`` is the max of the cell and its neighbors,
additionally capped by ``reaction_dt_cap * (sup u)^(1-p)`` when the reaction
is on, and by the remaining time to ``t_end`` (which also covers an
identically zero state, whose diffusion limit is infinite).

Blow-up bookkeeping.  The run stops when the sup norm reaches
``blowup_threshold`` (the numerical blow-up time is linearly interpolated
inside the crossing step) or leaves the finite range (flag ``overflow``).
Negative undershoots are clamped to zero with the clamped weighted mass
accumulated, and ``tau0 = 1/((p-1) sup(u0)^(p-1))`` is recorded for runs
with reaction.

Output.  Series values (sup norm and support radius) and full snapshots are
taken at the configured output times from the cellwise linear interpolant
between the two bracketing steps, so the series always agrees with the
stored snapshots by construction.  A positive ``snapshot_stride`` k
additionally stores every k-th accepted step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .density import DensityParams, ProblemConstants, rho as density_rho

BOUNDARY_DIRICHLET = "dirichlet0"
BOUNDARY_NEUMANN = "neumann0"
BOUNDARIES = (BOUNDARY_DIRICHLET, BOUNDARY_NEUMANN)

TERM_COMPLETED = "completed"
TERM_BLOWUP = "blowup"
TERM_STALLED = "stalled"
TERM_STEP_LIMIT = "step_limit"

FLAG_THRESHOLD = "threshold"
FLAG_OVERFLOW = "overflow"

SUPPORT_THRESHOLD = 1.0e-12


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid; derived arrays are computed once at build."""

    N: int
    R: float
    cells: int
    faces: np.ndarray = field(init=False, repr=False)
    centers: np.ndarray = field(init=False, repr=False)
    volumes: np.ndarray = field(init=False, repr=False)
    dr: float = field(init=False)

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.R > 0.0:
            raise ValueError(f"R must be positive, got {self.R}")
        if int(self.cells) != self.cells or self.cells < 2:
            raise ValueError(f"cells must be an integer >= 2, got {self.cells}")
        faces = np.linspace(0.0, self.R, self.cells + 1)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "centers", 0.5 * (faces[:-1] + faces[1:]))
        object.__setattr__(self, "volumes", (faces[1:] ** self.N - faces[:-1] ** self.N) / self.N)
        object.__setattr__(self, "dr", float(faces[1] - faces[0]))


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    R: float
    cells: int
    cfl_safety: float = 0.45
    blowup_threshold: float = 1.0e6
    boundary: str = BOUNDARY_DIRICHLET
    reaction: bool = True
    output_times: Tuple[float, ...] = ()
    snapshot_stride: int = 0
    support_threshold: float = SUPPORT_THRESHOLD
    reaction_dt_cap: float = 0.1
    max_steps: int = 10**9
    use_numba: bool = True

    def __post_init__(self) -> None:
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.R > 0.0:
            raise ValueError(f"R must be positive, got {self.R}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.blowup_threshold > 0.0:
            raise ValueError(f"blowup_threshold must be positive, got {self.blowup_threshold}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 0:
            raise ValueError(f"snapshot_stride must be an integer >= 0, got {self.snapshot_stride}")
        times = tuple(float(t) for t in self.output_times)
        if any(t < 0.0 or t > self.t_end for t in times):
            raise ValueError("output_times must lie within [0, t_end]")
        if list(times) != sorted(set(times)):
            raise ValueError("output_times must be strictly increasing")
        object.__setattr__(self, "output_times", times if times else (self.t_end,))


@dataclass
class State:
    t: float
    u: np.ndarray


@dataclass(frozen=True)
class BlowupRecord:
    s_num: float
    flag: str
    final_sup: float


@dataclass
class RunResult:
    grid: RadialGrid
    config: SolverConfig
    rho_values: np.ndarray
    times: np.ndarray
    sup_series: np.ndarray
    support_series: np.ndarray
    snapshots: List[Tuple[float, np.ndarray]]
    stride_snapshots: List[Tuple[float, np.ndarray]]
    termination: str
    blowup: Optional[BlowupRecord]
    tau0: Optional[float]
    steps: int
    clamp_total: float
    final_state: State


def reaction_time_scale(p: float, sup_u0: float) -> float:
    """Reaction comparison time ``1/((p-1) sup^{p-1})``; inf for zero data."""
    if sup_u0 <= 0.0:
        return math.inf
    return 1.0 / ((p - 1.0) * sup_u0 ** (p - 1.0))


def support_radius_numeric(u: np.ndarray, grid: RadialGrid, threshold: float = SUPPORT_THRESHOLD) -> float:
    """Outer face radius of the last cell with ``u > threshold`` (0 if none).

    Monotone in the threshold: raising it never grows the radius.
    """
    idx = np.flatnonzero(np.asarray(u) > threshold)
    if idx.size == 0:
        return 0.0
    return float(grid.faces[idx[-1] + 1])


def weighted_mass(u: np.ndarray, grid: RadialGrid, rho_values: np.ndarray) -> float:
    """Discrete weighted mass ``sum_i rho_i V_i u_i`` (conserved by pure
    Neumann diffusion up to clamping)."""
    return float(np.sum(np.asarray(rho_values) * grid.volumes * np.asarray(u)))


def _rho_values(rho: Union[DensityParams, Callable, np.ndarray, Sequence[float]], grid: RadialGrid) -> np.ndarray:
    if isinstance(rho, DensityParams):
        vals = np.asarray(density_rho(rho, grid.centers), dtype=float)
    elif callable(rho):
        vals = np.asarray(rho(grid.centers), dtype=float)
        if vals.ndim == 0:
            vals = np.full(grid.cells, float(vals))
    else:
        vals = np.asarray(rho, dtype=float)
    if vals.shape != (grid.cells,):
        raise ValueError(f"density values have shape {vals.shape}, expected ({grid.cells},)")
    if not np.all(vals > 0.0):
        raise ValueError("density must be strictly positive on every cell")
    return vals


def step(u: np.ndarray, t: float, grid: RadialGrid, rho, constants: ProblemConstants, config: SolverConfig) -> Tuple[np.ndarray, float]:
    """Single explicit step (mainly for tests); returns the new state."""
    res = run(u, grid, rho, constants, config, _max_total_steps=1)
    return res.final_state.u, res.final_state.t


def run(
    u0: Union[np.ndarray, State],
    grid: RadialGrid,
    rho,
    constants: ProblemConstants,
    config: SolverConfig,
    _max_total_steps: Optional[int] = None,
) -> RunResult:
    """Advance initial data to ``t_end`` or numerical blow-up.

    ``rho`` may be a :class:`~pme_react.density.DensityParams` (canonical
    member evaluated at cell centers), a callable ``r -> rho(r)``, or a
    per-cell array.  ``u0`` is copied; a :class:`State` supplies a nonzero
    start time.
    """
    if grid.N != constants.N:
        raise ValueError(f"grid dimension N={grid.N} does not match constants N={constants.N}")
    if isinstance(u0, State):
        t = float(u0.t)
        u = np.array(u0.u, dtype=float, copy=True)
    else:
        t = 0.0
        u = np.array(u0, dtype=float, copy=True)
    if u.shape != (grid.cells,):
        raise ValueError(f"initial data has shape {u.shape}, expected ({grid.cells},)")
    if np.any(u < 0.0):
        raise ValueError("initial data must be nonnegative")

    rho_vals = _rho_values(rho, grid)
    vol = grid.volumes
    rho_vol = rho_vals * vol
    inv_rho_vol = 1.0 / rho_vol
    area_over_dr = grid.faces ** (grid.N - 1) / grid.dr
    cfl_coef = config.cfl_safety * rho_vals * grid.dr**2 / (2.0 * grid.N * constants.m)
    dirichlet = config.boundary == BOUNDARY_DIRICHLET
    max_steps = config.max_steps if _max_total_steps is None else _max_total_steps

    u_prev = np.empty_like(u)
    um = np.empty_like(u)
    flux = np.empty(grid.cells + 1, dtype=float)

    tau0 = reaction_time_scale(constants.p, float(u.max())) if config.reaction else None

    pending = [tt for tt in config.output_times if tt >= t]
    out_times: List[float] = []
    out_sup: List[float] = []
    out_support: List[float] = []
    snapshots: List[Tuple[float, np.ndarray]] = []
    stride_snaps: List[Tuple[float, np.ndarray]] = []

    def emit(t_out: float, u_out: np.ndarray) -> None:
        out_times.append(t_out)
        out_sup.append(float(u_out.max()))
        out_support.append(support_radius_numeric(u_out, grid, config.support_threshold))
        snapshots.append((t_out, u_out.copy()))

    # output times already reached (typically t=0) use the exact state
    while pending and pending[0] <= t:
        emit(pending.pop(0), u)

    termination = TERM_COMPLETED
    blowup: Optional[BlowupRecord] = None
    total_steps = 0
    clamp_total = 0.0
    big = 2**62

    while t < config.t_end:
        t_stop = pending[0] if pending else config.t_end
        budget = config.snapshot_stride if config.snapshot_stride > 0 else big
        budget = min(budget, max_steps - total_steps)
        if budget <= 0:
            termination = TERM_STEP_LIMIT
            break
        t_prev, t, status, nsub, clamp_added, sup_prev, sup_new = _kernels.advance(
            u,
            u_prev,
            um,
            flux,
            rho_vol,
            inv_rho_vol,
            area_over_dr,
            cfl_coef,
            float(constants.m),
            float(constants.p),
            bool(config.reaction),
            bool(dirichlet),
            float(config.blowup_threshold),
            float(config.reaction_dt_cap),
            float(t),
            float(config.t_end),
            float(t_stop),
            budget,
            use_numba=config.use_numba,
        )
        total_steps += nsub
        clamp_total += clamp_added
        if config.snapshot_stride > 0 and nsub > 0:
            stride_snaps.append((t, u.copy()))

        # interpolate output times crossed by the last step; all pending
        # times <= t lie in (t_prev, t] because the kernel stops at t_stop
        while pending and pending[0] <= t:
            t_out = pending.pop(0)
            frac = 1.0 if t == t_prev else (t_out - t_prev) / (t - t_prev)
            emit(t_out, u_prev + frac * (u - u_prev))

        if status == _kernels.STATUS_BLOWUP:
            s_num = t_prev + (t - t_prev) * (config.blowup_threshold - sup_prev) / (sup_new - sup_prev)
            blowup = BlowupRecord(s_num=s_num, flag=FLAG_THRESHOLD, final_sup=sup_new)
            termination = TERM_BLOWUP
            break
        if status == _kernels.STATUS_OVERFLOW:
            blowup = BlowupRecord(s_num=t, flag=FLAG_OVERFLOW, final_sup=math.inf)
            termination = TERM_BLOWUP
            break
        if status == _kernels.STATUS_STALLED:
            termination = TERM_STALLED
            break
        if total_steps >= max_steps and t < config.t_end:
            termination = TERM_STEP_LIMIT
            break

    return RunResult(
        grid=grid,
        config=config,
        rho_values=rho_vals,
        times=np.asarray(out_times),
        sup_series=np.asarray(out_sup),
        support_series=np.asarray(out_support),
        snapshots=snapshots,
        stride_snapshots=stride_snaps,
        termination=termination,
        blowup=blowup,
        tau0=tau0,
        steps=total_steps,
        clamp_total=clamp_total,
        final_state=State(t=t, u=u.copy()),
    )
