"""Adaptive RKF45 integration with negativity and blow-up event capture."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .models import ModelSpec, state_vector


class Status(enum.Enum):
    COMPLETED_HORIZON = "CompletedHorizon"
    BLOWUP_DETECTED = "BlowupDetected"
    STEP_COLLAPSE = "StepCollapse"


_STATUS_FROM_CODE = {
    kernels.STATUS_COMPLETED: Status.COMPLETED_HORIZON,
    kernels.STATUS_BLOWUP: Status.BLOWUP_DETECTED,
    kernels.STATUS_COLLAPSE: Status.STEP_COLLAPSE,
}


@dataclass(frozen=True)
class IntegratorConfig:
    """Solver settings shared by the ODE and PDE engines.

    Tolerances and step bounds are in dimensionless units. ``blowup_cutoff``
    is the magnitude at which a component is declared divergent; ``neg_eps``
    the level below zero that counts as genuine negativity; ``sample_dt``
    the dense-output spacing of the recorded trajectory.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    h_init: float = 1e-4
    h_min: float = 1e-12
    h_max: float = 0.04
    t_end: float = 50.0
    blowup_cutoff: float = 1e8
    neg_eps: float = 1e-9
    sample_dt: float = 1e-3
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if self.blowup_cutoff < 1e3:
            raise ValueError("blowup_cutoff must be at least 1e3")
        if self.neg_eps < 0:
            raise ValueError("neg_eps must be nonnegative")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.sample_dt <= 0:
            raise ValueError("sample_dt must be positive")

    def with_(self, **kw) -> "IntegratorConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class BlowupRecord:
    """First component to reach the cutoff, with the estimated blow-up time.

    ``t_estimate`` is the dense-output time at which the component magnitude
    crossed the cutoff; ``t_fit`` the secondary reciprocal-fit estimate when
    available.
    """

    component: str
    sign: int
    t_estimate: float
    method: str
    cutoff: float
    t_fit: Optional[float] = None


@dataclass
class EventLog:
    """Negativity intervals per component plus an optional blow-up record."""

    negativity_intervals: dict[str, list[tuple[float, float]]]
    blowup: Optional[BlowupRecord] = None

    def has_negativity(self) -> bool:
        return any(self.negativity_intervals.values())


@dataclass
class Trajectory:
    """Dense-sampled solution: times, states (row per sample), final status."""

    times: np.ndarray
    states: np.ndarray
    status: Status
    components: tuple[str, ...]
    n_accepted: int = 0
    n_rejected: int = 0

    def component(self, name: str) -> np.ndarray:
        return self.states[:, self.components.index(name)]


@dataclass(frozen=True)
class BlowupEstimate:
    t_estimate: float
    method: str
    t_cutoff: float
    t_fit: Optional[float]


def _reciprocal_fit(times: np.ndarray, mags: np.ndarray) -> Optional[float]:
    """Least-squares fit of 1/mag = (T - t)/c on a diverging tail; returns T."""
    w = 1.0 / mags
    A = np.stack([np.ones_like(times), times], axis=-1)
    (a, b), *_ = np.linalg.lstsq(A, w, rcond=None)
    if b >= 0:
        return None
    return float(-a / b)


def estimate_blowup_time(
    times: Sequence[float], magnitudes: Sequence[float], cutoff: float
) -> BlowupEstimate:
    """Estimate the blow-up time from a diverging magnitude tail.

    The primary estimate is the first sample time at which the magnitude
    reaches ``cutoff``; a reciprocal fit mag ~ c/(T-t) over the preceding
    samples is reported alongside.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(magnitudes, dtype=float)
    if t.ndim != 1 or t.shape != m.shape or t.size < 2:
        raise ValueError("times and magnitudes must be matching 1-D arrays")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if np.any(np.diff(m) <= 0):
        raise ValueError("magnitude tail must be strictly increasing")
    if m[-1] < cutoff:
        raise ValueError("tail never reaches the cutoff")
    idx = int(np.argmax(m >= cutoff))
    t_cut = float(t[idx])
    pre = slice(max(0, idx - 12), idx + 1)
    t_fit = _reciprocal_fit(t[pre], m[pre]) if idx >= 2 else None
    return BlowupEstimate(
        t_estimate=t_cut, method="cutoff-crossing", t_cutoff=t_cut, t_fit=t_fit
    )


def locate_zero_crossing(
    value: Callable[[float], float],
    t_lo: float,
    t_hi: float,
    level: float = 0.0,
    t_tol: float = 1e-8,
) -> float:
    """Bisect a scalar function of time for the point where it crosses
    ``level``. The endpoints must straddle the level."""
    if not t_lo < t_hi:
        raise ValueError("need t_lo < t_hi")
    g_lo = value(t_lo) - level
    g_hi = value(t_hi) - level
    if g_lo == 0.0:
        return t_lo
    if g_hi == 0.0:
        return t_hi
    if (g_lo > 0) == (g_hi > 0):
        raise ValueError("endpoints do not bracket the level")
    lo, hi = t_lo, t_hi
    for _ in range(200):
        if hi - lo <= t_tol:
            break
        mid = 0.5 * (lo + hi)
        g = value(mid) - level
        if g == 0.0:
            return mid
        if (g > 0) == (g_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _events_from_rows(
    neg_rows: np.ndarray, names: tuple[str, ...]
) -> dict[str, list[tuple[float, float]]]:
    intervals: dict[str, list[tuple[float, float]]] = {n: [] for n in names}
    for row in neg_rows:
        intervals[names[int(row[0])]].append((float(row[1]), float(row[2])))
    for lst in intervals.values():
        lst.sort()
    return intervals


def _blowup_record(
    names: tuple[str, ...],
    blow_species: int,
    blow_sign: int,
    blow_t: float,
    tail_t: np.ndarray,
    tail_mag: np.ndarray,
    cutoff: float,
) -> BlowupRecord:
    mags = tail_mag[:, blow_species]
    keep = np.ones(mags.shape[0], dtype=bool)
    keep[1:] = np.diff(mags) > 0
    t_fit = None
    if keep.sum() >= 4:
        tt, mm = tail_t[keep], mags[keep]
        t_fit = _reciprocal_fit(tt[-12:], mm[-12:])
    return BlowupRecord(
        component=names[blow_species],
        sign=int(blow_sign),
        t_estimate=float(blow_t),
        method="cutoff-crossing",
        cutoff=cutoff,
        t_fit=t_fit,
    )


def integrate(
    model: ModelSpec, x0: Sequence[float], cfg: Optional[IntegratorConfig] = None
) -> tuple[Trajectory, EventLog]:
    """Integrate a spatially independent model from ``x0``.

    Steps the RKF45 embedded pair with standard error control, scans each
    accepted step for components crossing below -neg_eps (crossings
    localized on the dense output), and stops early once any component
    magnitude reaches the blow-up cutoff. The trajectory is sampled every
    ``sample_dt`` plus at event times.
    """
    cfg = cfg or IntegratorConfig()
    spec = model
    if spec.spatial:
        raise ValueError("integrate() handles nonspatial models; see integrate_pde")
    x = state_vector(x0, spec.kind)
    if not np.all(np.isfinite(x)):
        raise ValueError("initial state must be finite")

    (status_code, _final_t, _final_y, times, states, _n_snap, _snaps,
     neg_rows, blow_species, blow_sign, blow_t, tail_t, tail_mag,
     n_acc, n_rej) = kernels.integrate_core(
        spec.kind.code, spec.pvec(), 0, 0.0, 0, 1.0, 0,
        x, 0.0, cfg.t_end, cfg.abs_tol, cfg.rel_tol,
        cfg.h_init, cfg.h_min, cfg.h_max,
        cfg.blowup_cutoff, cfg.neg_eps, cfg.sample_dt,
        np.empty(0), cfg.max_steps,
    )

    names = spec.species
    traj = Trajectory(
        times=np.array(times),
        states=np.array(states),
        status=_STATUS_FROM_CODE[status_code],
        components=names,
        n_accepted=int(n_acc),
        n_rejected=int(n_rej),
    )
    log = EventLog(negativity_intervals=_events_from_rows(np.array(neg_rows), names))
    if status_code == kernels.STATUS_BLOWUP:
        log.blowup = _blowup_record(
            names, int(blow_species), int(blow_sign), float(blow_t),
            np.array(tail_t), np.array(tail_mag), cfg.blowup_cutoff,
        )
    return traj, log
