"""Outcome classification and threshold mapping.

Classifies trajectories into the three regions (positive solutions,
negative-but-bounded solutions, finite-time blow-up), locates the critical
initial supermale level or introduction rate separating them by bisection,
and sweeps those thresholds over a range of initial population sizes.
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .models import DimensionalParams, DimensionlessParams, ModelKind, ModelSpec
from .ode import EventLog, IntegratorConfig, Status, integrate
from .pde import SpatialGrid, integrate_pde

WORKER_ENV = "TYCLAB_WORKERS"

# classification runs only need events, not a fine trajectory record
CLASSIFY_CONFIG = IntegratorConfig(sample_dt=0.01)


class Region(enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE_NO_BLOWUP = "NegativeNoBlowup"
    BLOWUP = "Blowup"

    @property
    def rank(self) -> int:
        return _REGION_RANK[self]


_REGION_RANK = {Region.POSITIVE: 0, Region.NEGATIVE_NO_BLOWUP: 1, Region.BLOWUP: 2}


class IndeterminateOutcome(RuntimeError):
    """The integrator collapsed without a diverging magnitude; the run fits
    none of the three regions."""


class BracketInvalid(ValueError):
    """Bisection bracket endpoints classify on the same side of the
    requested boundary."""

    def __init__(self, message: str, all_below: bool = False):
        super().__init__(message)
        self.all_below = all_below


class NonMonotoneScan(RuntimeError):
    """The outcome sequence along the swept axis left a region and came
    back; the bisection's ordering assumption does not hold."""


@dataclass
class Outcome:
    """Region assignment plus the events that determined it."""

    region: Region
    negativity_intervals: dict[str, list[tuple[float, float]]]
    blowup: Optional[object]
    status: Status


class Boundary(enum.Enum):
    REGION_1_2 = "R1/2"
    REGION_2_3 = "R2/3"

    @property
    def above_rank(self) -> int:
        return 1 if self is Boundary.REGION_1_2 else 2


def _outcome_from(log: EventLog, status: Status) -> Outcome:
    # The modified models are singular where m+s crosses zero, which a
    # negative male population eventually forces; a step collapse there
    # still answers the negativity question, so only an event-free
    # collapse is indeterminate.
    if log.blowup is not None:
        region = Region.BLOWUP
    elif log.has_negativity():
        region = Region.NEGATIVE_NO_BLOWUP
    elif status is Status.STEP_COLLAPSE:
        raise IndeterminateOutcome("step size collapsed without divergence")
    else:
        region = Region.POSITIVE
    return Outcome(
        region=region,
        negativity_intervals=log.negativity_intervals,
        blowup=log.blowup,
        status=status,
    )


def classify(
    model: ModelSpec, x0: Sequence[float], cfg: Optional[IntegratorConfig] = None
) -> Outcome:
    """Integrate and map (negativity?, blow-up?) to the three regions.

    Dimensional 3-species parameters are rescaled to canonical form first;
    the classification is invariant under the scaling.
    """
    cfg = cfg or CLASSIFY_CONFIG
    spec = model
    x = np.asarray(x0, dtype=float)
    if isinstance(model.params, DimensionalParams) and model.kind is not ModelKind.CLASSIC4:
        spec = model.to_dimensionless()
        x = x / model.params.K
    traj, log = integrate(spec, x, cfg)
    return _outcome_from(log, traj.status)


def classify_field(
    model: ModelSpec,
    fields0: np.ndarray,
    grid: SpatialGrid,
    cfg: Optional[IntegratorConfig] = None,
) -> Outcome:
    """Spatial counterpart of :func:`classify`."""
    cfg = cfg or CLASSIFY_CONFIG
    traj, log = integrate_pde(model, fields0, grid, cfg)
    if traj.status is Status.STEP_COLLAPSE:
        raise IndeterminateOutcome("step size collapsed without divergence")
    return _outcome_from(log, traj.status)


def _axis_point(
    model: ModelSpec, axis: str, f0m0: float, value: float, s0: float
) -> tuple[ModelSpec, np.ndarray]:
    if axis == "s0":
        return model, np.array([f0m0, f0m0, value])
    if axis == "gamma":
        if not isinstance(model.params, DimensionlessParams):
            raise ValueError("gamma sweeps need dimensionless parameters")
        spec = replace(model, params=replace(model.params, gamma=float(value)))
        return spec, np.array([f0m0, f0m0, s0])
    raise ValueError(f"unknown axis {axis!r}; expected 's0' or 'gamma'")


def scan_outcomes(
    model: ModelSpec,
    axis: str,
    values: Sequence[float],
    f0m0: float,
    cfg: Optional[IntegratorConfig] = None,
    s0: float = 0.0,
) -> list[Outcome]:
    """Classify along a sequence of axis values (used by the pre-scan and
    the ordering tests)."""
    out = []
    for v in values:
        spec, x0 = _axis_point(model, axis, f0m0, float(v), s0)
        out.append(classify(spec, x0, cfg))
    return out


@dataclass(frozen=True)
class ThresholdResult:
    """A located critical value with its verifying classifications."""

    value: float
    bracket: tuple[float, float]
    boundary: Boundary
    below_outcome: Region
    above_outcome: Region
    n_runs: int

    def __float__(self) -> float:
        return self.value


def find_threshold(
    model: ModelSpec,
    f0m0: float,
    axis: str,
    boundary: Boundary,
    bracket: tuple[float, float],
    tol: float = 1e-4,
    cfg: Optional[IntegratorConfig] = None,
    s0: float = 0.0,
    prescan: int = 16,
) -> ThresholdResult:
    """Bisect the axis value (initial supermale level s0 or introduction
    rate gamma) for the requested region boundary.

    A uniform pre-scan first validates that outcomes are weakly ordered
    along the axis (Positive, then NegativeNoBlowup, then Blowup) and
    narrows the bracket; non-monotone scans raise :class:`NonMonotoneScan`.
    The returned value is verified by classifying at value +/- tol on
    opposite sides of the boundary.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    above = boundary.above_rank
    n_runs = 0

    grid = np.linspace(lo, hi, max(2, prescan))
    outcomes = scan_outcomes(model, axis, grid, f0m0, cfg, s0)
    n_runs += len(grid)
    ranks = [o.region.rank for o in outcomes]
    # the bisection only needs the below/above indicator of the requested
    # boundary to switch once along the bracket
    flags = [r >= above for r in ranks]
    if any(not b and a for a, b in zip(flags, flags[1:])):
        raise NonMonotoneScan(
            f"{boundary.value} indicator along {axis} is not monotone "
            f"at f0=m0={f0m0}: ranks {ranks}"
        )
    if flags[0]:
        raise BracketInvalid(
            f"lower bracket already classifies at or above {boundary.value}"
        )
    if not flags[-1]:
        raise BracketInvalid(
            f"no {boundary.value} crossing within bracket [{lo}, {hi}]",
            all_below=True,
        )
    # narrow to the adjacent pre-scan pair straddling the boundary
    idx = next(i for i in range(len(flags) - 1) if not flags[i] and flags[i + 1])
    lo, hi = float(grid[idx]), float(grid[idx + 1])

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        spec, x0 = _axis_point(model, axis, f0m0, mid, s0)
        n_runs += 1
        if classify(spec, x0, cfg).region.rank >= above:
            hi = mid
        else:
            lo = mid
    value = 0.5 * (lo + hi)

    spec_lo, x_lo = _axis_point(model, axis, f0m0, value - tol, s0)
    spec_hi, x_hi = _axis_point(model, axis, f0m0, value + tol, s0)
    below_outcome = classify(spec_lo, x_lo, cfg).region
    above_outcome = classify(spec_hi, x_hi, cfg).region
    n_runs += 2
    return ThresholdResult(
        value=value,
        bracket=(lo, hi),
        boundary=boundary,
        below_outcome=below_outcome,
        above_outcome=above_outcome,
        n_runs=n_runs,
    )


@dataclass
class ThresholdCurve:
    """Critical values over a grid of initial population sizes.

    ``values[i]`` is None where the search failed or the boundary does not
    exist; ``status[i]`` says which ("ok", "absent", or "failed: ...").
    The curve is ``absent`` when no grid point has the boundary at all.
    """

    axis: str
    boundary: Boundary
    f0m0: list[float]
    values: list[Optional[float]]
    status: list[str]
    results: list[Optional[ThresholdResult]] = field(default_factory=list)

    @property
    def absent(self) -> bool:
        return all(s == "absent" for s in self.status)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(x, v) for x, v in zip(self.f0m0, self.values) if v is not None]

    def non_smooth_points(self, threshold: float = 0.05) -> list[float]:
        """Grid points where the curve is markedly non-smooth: the discrete
        second difference exceeds ``threshold`` times the curve's mean
        magnitude. A jaggedness heuristic (the Allee factor produces such
        kinks at small populations); empty for smooth curves."""
        pts = self.points
        if len(pts) < 3:
            return []
        xs, vs = zip(*pts)
        scale = float(np.mean(np.abs(vs)))
        if scale == 0.0:
            return []
        flagged = []
        for i in range(1, len(vs) - 1):
            d2 = abs(vs[i - 1] - 2.0 * vs[i] + vs[i + 1])
            if d2 > threshold * scale:
                flagged.append(xs[i])
        return flagged


@dataclass
class RegionMap:
    model: ModelSpec
    r12: ThresholdCurve
    r23: ThresholdCurve


def _map_point(
    model: ModelSpec,
    f0: float,
    axis: str,
    bracket_r12: tuple[float, float],
    bracket_r23: tuple[float, float],
    tol: float,
    cfg: Optional[IntegratorConfig],
    s0: float,
) -> tuple[tuple[Optional[float], str, Optional[ThresholdResult]],
           tuple[Optional[float], str, Optional[ThresholdResult]]]:
    def search(boundary: Boundary, bracket):
        try:
            res = find_threshold(model, f0, axis, boundary, bracket, tol, cfg, s0)
            return res.value, "ok", res
        except BracketInvalid as e:
            if e.all_below:
                return None, "absent", None
            return None, f"failed: {e}", None
        except (NonMonotoneScan, IndeterminateOutcome) as e:
            return None, f"failed: {e}", None

    r12 = search(Boundary.REGION_1_2, bracket_r12)
    # reuse the R1/2 value as the lower bracket where it exists
    lo23 = r12[0] if r12[0] is not None else bracket_r23[0]
    r23 = search(Boundary.REGION_2_3, (lo23, bracket_r23[1]))
    return r12, r23


def _map_point_task(args):
    return _map_point(*args)


def region_map(
    model: ModelSpec,
    f0m0_range: tuple[float, float] = (0.1, 0.5),
    axis: str = "s0",
    resolution: int = 9,
    bracket_r12: tuple[float, float] = (0.0, 2.0),
    bracket_r23: tuple[float, float] = (0.0, 10.0),
    tol: float = 1e-4,
    cfg: Optional[IntegratorConfig] = None,
    s0: float = 0.0,
    workers: Optional[int] = None,
) -> RegionMap:
    """Sweep f0 = m0 over a range and locate both region boundaries at each
    point. Per-point failures are recorded and the sweep continues; for
    models with no blow-up anywhere the R2/3 curve comes back absent.

    The sweep parallelizes over grid points (``workers`` or the
    TYCLAB_WORKERS environment variable); results merge by index, so the
    output is independent of the worker count.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    grid = [float(v) for v in np.linspace(f0m0_range[0], f0m0_range[1], resolution)]
    if workers is None:
        workers = int(os.environ.get(WORKER_ENV, "1"))
    tasks = [(model, f0, axis, bracket_r12, bracket_r23, tol, cfg, s0) for f0 in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_map_point_task, tasks))
    else:
        results = [_map_point(*t) for t in tasks]

    def build(boundary: Boundary, side: int) -> ThresholdCurve:
        vals = [r[side][0] for r in results]
        stats = [r[side][1] for r in results]
        ress = [r[side][2] for r in results]
        return ThresholdCurve(
            axis=axis, boundary=boundary, f0m0=grid,
            values=vals, status=stats, results=ress,
        )

    return RegionMap(
        model=model,
        r12=build(Boundary.REGION_1_2, 0),
        r23=build(Boundary.REGION_2_3, 1),
    )


@dataclass
class ThresholdComparison:
    """Region maps of several models on one shared grid, for overlay."""

    axis: str
    f0m0: list[float]
    maps: dict[str, RegionMap]


def compare_thresholds(
    models: Sequence[ModelSpec],
    axis: str = "s0",
    f0m0_range: tuple[float, float] = (0.1, 0.5),
    resolution: int = 9,
    **kw,
) -> ThresholdComparison:
    """Region-map several model variants on a common f0=m0 grid."""
    if not models:
        raise ValueError("need at least one model")
    maps: dict[str, RegionMap] = {}
    for spec in models:
        label = spec.kind.value
        if label in maps:
            label = f"{label}#{sum(k.startswith(spec.kind.value) for k in maps)}"
        maps[label] = region_map(spec, f0m0_range, axis, resolution, **kw)
    grid = [float(v) for v in np.linspace(f0m0_range[0], f0m0_range[1], resolution)]
    return ThresholdComparison(axis=axis, f0m0=grid, maps=maps)
