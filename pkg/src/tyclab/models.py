"""Model definitions for the Trojan Y Chromosome (TYC) family.

Covers the dimensionless three-species system, the dimensional four-species
system, the modified competition models (with and without the Allee factor),
and the exponential-logistic variant, together with the closed-form blow-up
thresholds and the local stability criterion of the trojan equilibrium.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels


class ModelKind(enum.Enum):
    """Which member of the TYC model family."""

    CLASSIC3 = "classic3"
    CLASSIC4 = "classic4"
    MODIFIED_ALLEE = "modified_allee"
    MODIFIED_NOALLEE = "modified_noallee"
    EXPLOGISTIC3 = "explogistic3"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def n_species(self) -> int:
        return 4 if self is ModelKind.CLASSIC4 else 3

    @property
    def species(self) -> tuple[str, ...]:
        return ("f", "m", "s", "r4") if self is ModelKind.CLASSIC4 else ("f", "m", "s")


_KIND_CODES = {
    ModelKind.CLASSIC3: kernels.KIND_CLASSIC3,
    ModelKind.MODIFIED_ALLEE: kernels.KIND_MODIFIED_ALLEE,
    ModelKind.MODIFIED_NOALLEE: kernels.KIND_MODIFIED_NOALLEE,
    ModelKind.EXPLOGISTIC3: kernels.KIND_EXPLOGISTIC3,
    ModelKind.CLASSIC4: kernels.KIND_CLASSIC4,
}


@dataclass(frozen=True)
class DimensionlessParams:
    """Parameters of the scaled system: populations are fractions of the
    carrying capacity and time is measured in death-rate units.

    r is the birth/death time-scale ratio beta*K/(2*delta); gamma the
    scaled supermale introduction rate; allee the Allee threshold (only
    meaningful for the Allee variant); diffusion the scaled diffusivity
    used by the spatial models.
    """

    r: float
    gamma: float = 0.0
    allee: Optional[float] = None
    diffusion: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.allee is not None and not 0.0 < self.allee < 1.0:
            raise ValueError("allee threshold must lie in (0, 1)")
        if self.diffusion < 0:
            raise ValueError("diffusion must be nonnegative")


@dataclass(frozen=True)
class DimensionalParams:
    """Raw model parameters: per-capita birth rate beta, death rate delta,
    carrying capacity K, trojan introduction rate mu, diffusivity D."""

    beta: float
    delta: float
    K: float
    mu: float = 0.0
    diffusion: float = 0.0

    def __post_init__(self):
        for name in ("beta", "delta", "K", "mu", "diffusion"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.K == 0:
            raise ValueError("carrying capacity K must be positive")
        if self.delta == 0:
            raise ValueError("death rate delta must be positive")


Params = DimensionlessParams | DimensionalParams


@dataclass(frozen=True)
class ModelSpec:
    """A model kind plus its parameter set (and whether it is spatial)."""

    kind: ModelKind
    params: Params
    spatial: bool = False

    def __post_init__(self):
        if self.kind is ModelKind.CLASSIC4:
            if not isinstance(self.params, DimensionalParams):
                raise ValueError("classic4 requires dimensional parameters")
        if self.kind is ModelKind.MODIFIED_ALLEE:
            p = self.params
            if not isinstance(p, DimensionlessParams) or p.allee is None:
                raise ValueError("modified_allee requires the allee threshold")

    @property
    def n_species(self) -> int:
        return self.kind.n_species

    @property
    def species(self) -> tuple[str, ...]:
        return self.kind.species

    def pvec(self) -> np.ndarray:
        """Flat parameter vector consumed by the kernels."""
        p = self.params
        if isinstance(p, DimensionalParams):
            if self.kind is not ModelKind.CLASSIC4:
                raise ValueError(
                    f"{self.kind.value} integrates in dimensionless form; "
                    "use to_dimensionless() first"
                )
            return np.array([p.beta, p.delta, p.K, p.mu], dtype=float)
        allee = p.allee if p.allee is not None else 1.0
        return np.array([p.r, p.gamma, allee, 0.0], dtype=float)

    @property
    def diffusion(self) -> float:
        return self.params.diffusion

    def to_dimensionless(self) -> "ModelSpec":
        """Rescale a dimensional 3-species spec into canonical form."""
        if isinstance(self.params, DimensionlessParams):
            return self
        if self.kind is ModelKind.CLASSIC4:
            raise ValueError("classic4 has no dimensionless form")
        p, _ = nondimensionalize(self.params, np.zeros(3))
        return replace(self, params=p)


def state_vector(values: Sequence[float], kind: ModelKind = ModelKind.CLASSIC3) -> np.ndarray:
    """Normalize a state to a float array of the right length."""
    x = np.asarray(values, dtype=float)
    n = kind.n_species
    if x.shape != (n,):
        raise ValueError(f"{kind.value} state needs {n} components, got shape {x.shape}")
    return x


def logistic(state: Sequence[float], kind: ModelKind, K: float = 1.0) -> float:
    """Growth-damping factor at a state.

    1 - (f+m+s) for the dimensionless kinds, 1 - (f+m+s)/K for the
    dimensional four-species model, exp(1 - (f+m+s)) for the exponential
    variant.
    """
    x = np.asarray(state, dtype=float)
    total = float(x[0] + x[1] + x[2])
    if kind is ModelKind.EXPLOGISTIC3:
        return float(np.exp(1.0 - total))
    if kind is ModelKind.CLASSIC4:
        return 1.0 - total / K
    return 1.0 - total


def _rhs_via_kernel(kind: ModelKind, pvec: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    kernels.eval_rhs_ode(kind.code, pvec, x, out)
    return out


def rhs_classic3(p: DimensionlessParams, x: Sequence[float]) -> np.ndarray:
    """Time derivative of the dimensionless three-species system:
    (r*m*f*L - f, r*m*f*L + 2*r*s*f*L - m, gamma - s) with L = 1-(f+m+s).
    """
    x = state_vector(x, ModelKind.CLASSIC3)
    return _rhs_via_kernel(ModelKind.CLASSIC3, _pvec_dimless(p), x)


def rhs_classic4(p: DimensionalParams, x: Sequence[float]) -> np.ndarray:
    """Reaction rates of the dimensional four-species system (f, m, s, r4)
    with L = 1-(f+m+s)/K."""
    x = state_vector(x, ModelKind.CLASSIC4)
    pvec = np.array([p.beta, p.delta, p.K, p.mu], dtype=float)
    return _rhs_via_kernel(ModelKind.CLASSIC4, pvec, x)


def rhs_modified(p: DimensionlessParams, x: Sequence[float], allee_on: bool = True) -> np.ndarray:
    """Time derivative of the modified competition model; with allee_on the
    per-capita factor (f/a - 1) applies, without it the factor is 1. Both
    mating terms are defined as 0 when m+s = 0 (continuity limit)."""
    kind = ModelKind.MODIFIED_ALLEE if allee_on else ModelKind.MODIFIED_NOALLEE
    if allee_on and p.allee is None:
        raise ValueError("allee threshold required when allee_on")
    x = state_vector(x, kind)
    return _rhs_via_kernel(kind, _pvec_dimless(p), x)


def rhs_explogistic3(p: DimensionlessParams, x: Sequence[float]) -> np.ndarray:
    """Classic dimensionless rates with the exponential logistic factor in
    the f and m equations; the s equation is unchanged."""
    x = state_vector(x, ModelKind.EXPLOGISTIC3)
    return _rhs_via_kernel(ModelKind.EXPLOGISTIC3, _pvec_dimless(p), x)


def rhs_classic3_dimensional(p: DimensionalParams, x: Sequence[float]) -> np.ndarray:
    """Dimensional three-species rates: ((beta/2)*L*f*m - delta*f,
    (beta/2)*L*f*m + beta*L*f*s - delta*m, mu - delta*s), L = 1-(f+m+s)/K."""
    f, m, s = (float(v) for v in x)
    L = 1.0 - (f + m + s) / p.K
    df = 0.5 * p.beta * L * f * m - p.delta * f
    dm = 0.5 * p.beta * L * f * m + p.beta * L * f * s - p.delta * m
    ds = p.mu - p.delta * s
    return np.array([df, dm, ds])


def _pvec_dimless(p: DimensionlessParams) -> np.ndarray:
    allee = p.allee if p.allee is not None else 1.0
    return np.array([p.r, p.gamma, allee, 0.0], dtype=float)


def nondimensionalize(
    p: DimensionalParams, x_dim: Sequence[float]
) -> tuple[DimensionlessParams, np.ndarray]:
    """Scale populations by K and time by 1/delta: r = beta*K/(2*delta),
    gamma = mu/(delta*K). Returns the scaled parameters and state."""
    if p.K <= 0 or p.delta <= 0:
        raise ValueError("nondimensionalization needs K > 0 and delta > 0")
    r = p.beta * p.K / (2.0 * p.delta)
    gamma = p.mu / (p.delta * p.K)
    q = DimensionlessParams(r=r, gamma=gamma, diffusion=p.diffusion / p.delta)
    return q, np.asarray(x_dim, dtype=float) / p.K


@dataclass(frozen=True)
class PositivityReport:
    """Result of sampling the Kamke condition on the coordinate faces."""

    holds: bool
    min_value: float
    witnesses: list[tuple[str, tuple[float, ...], float]] = field(default_factory=list)


def positivity_criterion(
    model: ModelSpec,
    region: Sequence[tuple[float, float]],
    grid_points: int = 64,
    max_witnesses: int = 16,
) -> PositivityReport:
    """Sample each coordinate face of ``region`` (one species pinned to 0)
    and check that the pinned species' rate is nonnegative there, the
    condition under which nonnegative data stays nonnegative.

    ``region`` lists (lo, hi) per species and must sit in the nonnegative
    orthant. Witness points of violation are returned (up to
    ``max_witnesses``, worst first).
    """
    n = model.n_species
    region = [(float(lo), float(hi)) for lo, hi in region]
    if len(region) != n:
        raise ValueError(f"region needs {n} (lo, hi) pairs")
    for lo, hi in region:
        if lo < 0 or hi < lo:
            raise ValueError("region must lie in the nonnegative orthant")

    pvec = model.pvec()
    names = model.species
    witnesses: list[tuple[str, tuple[float, ...], float]] = []
    min_value = np.inf
    axes = [np.linspace(lo, hi, grid_points) for lo, hi in region]
    out = np.empty(n)
    for face in range(n):
        coords = [axes[j] for j in range(n) if j != face]
        mesh = np.meshgrid(*coords, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=-1)
        face_worst: list[tuple[float, tuple[float, ...]]] = []
        x = np.empty(n)
        for row in pts:
            x[face] = 0.0
            k = 0
            for j in range(n):
                if j != face:
                    x[j] = row[k]
                    k += 1
            kernels.eval_rhs_ode(model.kind.code, pvec, x, out)
            v = out[face]
            if v < min_value:
                min_value = v
            if v < 0:
                face_worst.append((v, tuple(x)))
        face_worst.sort(key=lambda t: t[0])
        for v, pt in face_worst[:max_witnesses]:
            witnesses.append((names[face], pt, v))
    witnesses.sort(key=lambda t: t[2])
    return PositivityReport(
        holds=not witnesses,
        min_value=float(min_value),
        witnesses=witnesses[:max_witnesses],
    )


def threshold_f0(delta1: float, delta2: float, p: DimensionalParams) -> float:
    """Initial female level beyond which the comparison subsolution blows up
    in finite time, given bounds -delta2 < m < -delta1 on the negative male
    interval (callers normally have delta1 <= delta2)."""
    if delta1 <= 0 or delta2 < 0:
        raise ValueError("need delta1 > 0 and delta2 >= 0")
    num = 0.5 * p.beta * delta2 + 0.5 * p.beta * delta2**2 / p.K + p.delta
    den = 0.5 * p.beta * delta1 / p.K
    return num / den


def threshold_mu(delta2: float, p: DimensionalParams) -> float:
    """Critical constant introduction rate: stocking above this value forces
    finite-time blow-up from any positive data."""
    if delta2 <= 0:
        raise ValueError("delta2 must be positive")
    num = 0.5 * p.beta * delta2 + (p.beta * delta2**2 + p.delta) / (2.0 * p.K)
    den = p.beta * delta2 / (2.0 * p.K * p.delta)
    return num / den


def threshold_mu_pde(delta2: float, p: DimensionalParams) -> float:
    """Spatial counterpart of the critical introduction rate; the algebraic
    form matches the spatially independent one."""
    return threshold_mu(delta2, p)


def threshold_m0(c1: float, delta3: float, p: DimensionalParams) -> float:
    """Initial male magnitude beyond which the male comparison subsolution
    diverges, given the problem-dependent constant c1 and the lower female
    bound delta3 (both are caller-supplied)."""
    if delta3 <= 0:
        raise ValueError("delta3 must be positive")
    return c1 / (0.5 * p.beta * delta3 / p.K)


def mu_kamke_trigger(p: DimensionalParams) -> float:
    """Introduction rate above which the male-face rate G(f, 0, s) turns
    negative for any data (the mu > delta*K trigger)."""
    return p.delta * p.K


@dataclass(frozen=True)
class StabilityReport:
    """Local stability assessment of the trojan equilibrium (0,0,0,mu/delta)
    of the four-species model."""

    applicable: bool
    criterion_value: float
    criterion_stable: Optional[bool]
    extinction_stable: bool
    eigenvalues: np.ndarray
    eigen_stable: bool
    agrees: Optional[bool]


def jacobian_classic4(p: DimensionalParams, x: Sequence[float], step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the four-species reaction rates."""
    x = state_vector(x, ModelKind.CLASSIC4)
    n = 4
    J = np.empty((n, n))
    for j in range(n):
        hj = step * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += hj
        xm[j] -= hj
        J[:, j] = (rhs_classic4(p, xp) - rhs_classic4(p, xm)) / (2.0 * hj)
    return J


def stability_check(p: DimensionalParams) -> StabilityReport:
    """Evaluate the cubic criterion beta*mu^2 - beta*K*delta*mu + K*delta^3
    for local stability of (0,0,0,mu/delta), cross-checked against the
    numerically computed Jacobian eigenvalues at that state.

    The criterion applies when delta/beta < K/16; outside that regime it is
    reported as inapplicable (criterion_stable None).
    """
    applicable = p.beta > 0 and p.delta / p.beta < p.K / 16.0
    crit = p.beta * p.mu**2 - p.beta * p.K * p.delta * p.mu + p.K * p.delta**3
    eq = np.array([0.0, 0.0, 0.0, p.mu / p.delta])
    eigs = np.linalg.eigvals(jacobian_classic4(p, eq))
    eigen_stable = bool(np.max(eigs.real) < 0)
    criterion_stable = (crit > 0) if applicable else None
    return StabilityReport(
        applicable=applicable,
        criterion_value=float(crit),
        criterion_stable=criterion_stable,
        extinction_stable=bool(applicable and p.mu == 0),
        eigenvalues=eigs,
        eigen_stable=eigen_stable,
        agrees=(criterion_stable == eigen_stable) if applicable else None,
    )
