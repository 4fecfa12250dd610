"""Time integration of u_tt - Lap u = -2 omega u_t + F(t, x, u).

Every Fourier mode obeys a damped oscillator v'' + 2 omega v' + |k|^2 v = f.
The linear part is advanced by its exact one-step propagator, so with the
source switched off the scheme reproduces the closed-form solution to
roundoff for any step size.  The forcing is handled by a two-stage
predictor-corrector: the predictor freezes f over the step, the corrector
re-evaluates it at the predicted endpoint and averages, which is second
order in dt.

The nonlinear product may be de-aliased with the standard 2/3-rule mask
before injection; the zero mode is never touched by the mask, so the mean
dynamics are unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from .energy import EnergySample, sample_energies
from .fields import Field, GridSpec, Spectrum, inverse_transform, laplacian_symbol, transform
from .source import (
    BreakdownError,
    ModelParams,
    PreparedSource,
    SourceSpec,
    eval_prepared,
    prepare_source,
)


@dataclass
class SolverState:
    """Instantaneous state (t, u, u_t)."""

    t: float
    u: Field
    ut: Field


@dataclass
class SolverConfig:
    """Discretization parameters.

    ``t_end`` must be an integer number of steps so the final time is hit
    exactly; samples are taken at t = 0, every ``sample_every`` steps, and at
    t_end regardless of divisibility.
    """

    grid: GridSpec
    dt: float
    t_end: float
    sample_every: int = 1
    dealias: bool = True

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not (isinstance(self.sample_every, int) and self.sample_every >= 1):
            raise ValueError(f"sample_every must be a positive integer, got {self.sample_every}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(
                f"t_end = {self.t_end} is not an integer number of steps of dt = {self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class BreakdownInfo:
    """Where and why a run stopped early."""

    t: float
    step: int
    reason: str


@dataclass
class Trajectory:
    """Sampled diagnostics of one run plus enough context to verify it."""

    params: ModelParams
    config: SolverConfig
    samples: list[EnergySample]
    breakdown: BreakdownInfo | None = None
    source_amplitude: float = 0.0
    u1_mean: float = 0.0
    final_state: SolverState | None = None

    def times(self) -> npt.NDArray[np.float64]:
        return np.array([s.t for s in self.samples])

    def series(self, name: str) -> npt.NDArray[np.float64]:
        return np.array([getattr(s, name) for s in self.samples])


@lru_cache(maxsize=None)
def dealias_mask(n: int) -> npt.NDArray[np.bool_]:
    """Keep |k_i| <= n/3 on every axis (the 2/3 rule)."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    keep = np.abs(k) <= n // 3
    return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]


def _propagator_pieces(n_sq, omega: float, dt: float):
    """Entries of the exact propagator and the constant-forcing weights.

    Underdamped modes (|k|^2 > omega^2) use the trigonometric branch,
    overdamped ones (including the zero mode) the hyperbolic branch, and the
    critical case is the shared s -> 0 limit.  All branches are the same
    analytic function of s^2 = omega^2 - |k|^2.
    """
    n_sq = np.asarray(n_sq, dtype=np.float64)
    disc = omega**2 - n_sq
    s = np.sqrt(np.abs(disc))
    arg = s * dt
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_like = np.where(disc < 0.0, np.cos(arg), np.cosh(arg))
        sin_like = np.where(
            s > 0.0,
            np.where(disc < 0.0, np.sin(arg), np.sinh(arg)) / np.where(s > 0.0, s, 1.0),
            dt,
        )
    decay = np.exp(-omega * dt)
    p11 = decay * (cos_like + omega * sin_like)
    p12 = decay * sin_like
    p21 = -n_sq * decay * sin_like
    p22 = decay * (cos_like - omega * sin_like)

    # Forcing weights: the particular solution for f frozen on the step.
    # For n_sq > 0 relax toward f / n_sq; the zero mode integrates directly.
    decay2 = np.exp(-2.0 * omega * dt)
    wv_zero = (1.0 - decay2) / (2.0 * omega)
    wu_zero = (dt - wv_zero) / (2.0 * omega)
    safe = np.where(n_sq > 0.0, n_sq, 1.0)
    wu = np.where(n_sq > 0.0, (1.0 - p11) / safe, wu_zero)
    wv = np.where(n_sq > 0.0, -p21 / safe, wv_zero)
    return p11, p12, p21, p22, wu, wv


def mode_propagator(n_sq, omega: float, dt: float):
    """Exact step map of v'' + 2 omega v' + n_sq v = f with f frozen.

    Returns (matrix, weights) so that [v, v'] advances as
    matrix @ [v, v'] + f * weights.  Accepts scalar or array n_sq; arrays
    yield leading batch dimensions.
    """
    if not omega > 0.0:
        raise ValueError(f"damping rate omega must be positive, got {omega}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if np.any(np.asarray(n_sq) < 0.0):
        raise ValueError("mode symbol n_sq must be nonnegative")
    p11, p12, p21, p22, wu, wv = _propagator_pieces(n_sq, omega, dt)
    matrix = np.stack(
        [np.stack([p11, p12], axis=-1), np.stack([p21, p22], axis=-1)], axis=-2
    )
    weights = np.stack([wu, wv], axis=-1)
    return matrix, weights


class _Stepper:
    """Spectral state advancer; holds everything that is constant per run."""

    def __init__(self, params: ModelParams, prepared: PreparedSource, config: SolverConfig):
        self.params = params
        self.prepared = prepared
        self.config = config
        self.grid = config.grid
        n = self.grid.n
        pieces = _propagator_pieces(laplacian_symbol(n), params.omega, config.dt)
        self.p11, self.p12, self.p21, self.p22, self.wu, self.wv = pieces
        self.mask = dealias_mask(n) if config.dealias else None

    def _force(self, t: float, u_hat: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        u = inverse_transform(Spectrum(self.grid, u_hat))
        f = eval_prepared(t, u, self.params, self.prepared)
        f_hat = transform(f).coeffs
        if self.mask is not None:
            f_hat = np.where(self.mask, f_hat, 0.0)
        return f_hat

    def advance(self, t: float, u_hat, ut_hat):
        f0 = self._force(t, u_hat)
        u_pred = self.p11 * u_hat + self.p12 * ut_hat + self.wu * f0
        ut_pred = self.p21 * u_hat + self.p22 * ut_hat + self.wv * f0
        f1 = self._force(t + self.config.dt, u_pred)
        f_avg = 0.5 * (f0 + f1)
        u_next = self.p11 * u_hat + self.p12 * ut_hat + self.wu * f_avg
        ut_next = self.p21 * u_hat + self.p22 * ut_hat + self.wv * f_avg
        return u_next, ut_next


def _as_prepared(source, grid: GridSpec, m: int) -> PreparedSource:
    if isinstance(source, PreparedSource):
        return source
    if isinstance(source, SourceSpec):
        return prepare_source(source, grid, m)
    raise TypeError(f"source must be a SourceSpec or PreparedSource, got {type(source).__name__}")


def step(state: SolverState, params: ModelParams, source, config: SolverConfig) -> SolverState:
    """Advance one step of size config.dt from an arbitrary state."""
    prepared = _as_prepared(source, config.grid, params.m)
    stepper = _Stepper(params, prepared, config)
    u_hat = transform(state.u).coeffs
    ut_hat = transform(state.ut).coeffs
    u_next, ut_next = stepper.advance(state.t, u_hat, ut_hat)
    return SolverState(
        state.t + config.dt,
        inverse_transform(Spectrum(config.grid, u_next)),
        inverse_transform(Spectrum(config.grid, ut_next)),
    )


def simulate(u0: Field, u1: Field, params: ModelParams, source, config: SolverConfig) -> Trajectory:
    """Run the full time span, sampling diagnostics along the way.

    A positivity or non-finite failure does not raise: the partial
    trajectory is returned with ``breakdown`` filled in.
    """
    if u0.grid != config.grid or u1.grid != config.grid:
        raise ValueError("initial data grids do not match the configured grid")
    prepared = _as_prepared(source, config.grid, params.m)
    stepper = _Stepper(params, prepared, config)

    trajectory = Trajectory(
        params=params,
        config=config,
        samples=[],
        source_amplitude=prepared.spec.amplitude,
        u1_mean=u1.mean(),
    )

    u_hat = transform(u0).coeffs
    ut_hat = transform(u1).coeffs
    dt = config.dt
    n_steps = config.n_steps

    def record(k: int) -> SolverState:
        t = k * dt
        u = inverse_transform(Spectrum(config.grid, u_hat))
        ut = inverse_transform(Spectrum(config.grid, ut_hat))
        f = eval_prepared(t, u, params, prepared)
        trajectory.samples.append(sample_energies(t, u, ut, f, params.omega, params.m))
        return SolverState(t, u, ut)

    state = None
    for k in range(n_steps):
        if k % config.sample_every == 0:
            try:
                state = record(k)
            except BreakdownError as err:
                trajectory.breakdown = BreakdownInfo(err.t, k, err.reason)
                return trajectory
        try:
            u_hat, ut_hat = stepper.advance(k * dt, u_hat, ut_hat)
        except BreakdownError as err:
            trajectory.breakdown = BreakdownInfo(err.t, k, err.reason)
            trajectory.final_state = state
            return trajectory
        if not (np.isfinite(u_hat).all() and np.isfinite(ut_hat).all()):
            t_bad = (k + 1) * dt
            trajectory.breakdown = BreakdownInfo(
                t_bad, k + 1, f"state became non-finite at step {k + 1} (t = {t_bad:.6g})"
            )
            trajectory.final_state = state
            return trajectory
    try:
        trajectory.final_state = record(n_steps)
    except BreakdownError as err:
        trajectory.breakdown = BreakdownInfo(err.t, n_steps, err.reason)
    return trajectory


def mean_mode_free(v0: float, v1: float, omega: float, t) -> npt.NDArray[np.float64]:
    """Zero-mode solution with no forcing: v0 + v1 (1 - exp(-2 omega t)) / 2 omega."""
    t = np.asarray(t, dtype=np.float64)
    return v0 + v1 * (1.0 - np.exp(-2.0 * omega * t)) / (2.0 * omega)


def mean_mode_reference(trajectory: Trajectory, params: ModelParams) -> list[tuple[float, float]]:
    """Duhamel quadrature for the mean: (2 omega)^-1 int (1 - e^{-2 omega (t-s)}) Fbar ds.

    Valid for zero-mean initial data only; the recorded mean of u and the
    stored mean of u_t at t = 0 must both vanish.
    """
    if not trajectory.samples:
        raise ValueError("trajectory has no samples")
    first = trajectory.samples[0]
    tol = 1e-12
    if abs(first.u_mean) > tol or abs(trajectory.u1_mean) > tol:
        raise ValueError(
            f"mean-mode reference needs zero-mean initial data, got means "
            f"({first.u_mean:.3e}, {trajectory.u1_mean:.3e})"
        )
    omega = params.omega
    t = trajectory.times()
    fbar = trajectory.series("f_mean")
    # Outer-product trapezoid of the convolution; the kernel is bounded by 1.
    weight = 1.0 - np.exp(-2.0 * omega * (t[:, None] - t[None, :]))
    out = []
    for i in range(len(t)):
        integrand = weight[i, : i + 1] * fbar[: i + 1]
        value = float(np.trapezoid(integrand, t[: i + 1])) / (2.0 * omega) if i > 0 else 0.0
        out.append((float(t[i]), value))
    return out
