"""Closed-form bounds: Gronwall propagation, composition constants, budgets.

The small-data argument runs through a handful of scalar functions of the
damping rate omega in (0, 1), the bootstrap horizon T1, and the improvement
factor eps_prime in (0, 1):

    h(t)  = (1 - e^{-omega t}) (1 - omega)      admissibility threshold,
    g(t)  = (1 - omega) - eps_prime / (1 - e^{-omega t}),

with eps_prime < h(T1) exactly when g(T1) > 0.  The two source budgets

    eps1 = omega g(T1) E0 / (sqrt(2) C)
    eps2 = (2 omega / C) sqrt(2 (eps_prime - 3/4 eps_prime^2)) E0

bound the forcing amplitudes under which the energy improves by the factor
(1 - eps_prime) and the mean stays pinned near zero.  C is the constant that
converts a forcing-profile norm into a forcing norm; it is assembled from
empirically calibrated product and composition constants, not guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .fields import VOLUME


@dataclass
class BootstrapParams:
    """Resolved quantities steering one bootstrap verification.

    ``e_m0`` is E_m(0) (not squared).  ``delta`` is the small-data radius
    E_m(0) / omega, ``delta_prime`` the sup-norm ceiling fed to the
    composition estimate, ``c_delta`` the profile-to-forcing constant, and
    ``eps1`` / ``eps2`` the resolved budgets.
    """

    e_m0: float
    delta: float
    delta_prime: float
    t1: float
    eps_prime: float
    c_delta: float
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self) -> None:
        if not self.e_m0 > 0.0:
            raise ValueError(f"initial energy must be positive, got {self.e_m0}")
        if not self.t1 > 0.0:
            raise ValueError(f"bootstrap horizon t1 must be positive, got {self.t1}")
        if not 0.0 < self.eps_prime < 1.0:
            raise ValueError(f"improvement factor must lie in (0, 1), got {self.eps_prime}")
        if not self.delta > 0.0:
            raise ValueError(f"small-data radius delta must be positive, got {self.delta}")
        if not 0.0 <= self.delta_prime < 1.0:
            raise ValueError(f"sup-norm ceiling must lie in [0, 1), got {self.delta_prime}")
        if not self.c_delta > 0.0:
            raise ValueError(f"forcing constant must be positive, got {self.c_delta}")


def bootstrap_preconditions(
    params: BootstrapParams, omega: float, u0_norm: float | None = None
) -> list[str]:
    """Conditions the small-data argument assumes; returns the failed ones."""
    failed = []
    if not params.eps_prime < h_threshold(omega, params.t1):
        failed.append(
            f"eps_prime = {params.eps_prime:.6g} is not below the threshold "
            f"h(T1) = {h_threshold(omega, params.t1):.6g}"
        )
    if params.e_m0 > params.delta * omega * (1.0 + 1e-12):
        failed.append(
            f"initial energy {params.e_m0:.6g} exceeds delta * omega = "
            f"{params.delta * omega:.6g}"
        )
    if u0_norm is not None and 0.25 * u0_norm > params.e_m0 * (1.0 + 1e-12):
        failed.append(
            f"initial data norm {u0_norm:.6g} violates ||u0|| / 4 <= E_m(0) = {params.e_m0:.6g}"
        )
    return failed


def gronwall_bound(times, a_values, f_values, g0: float, t0: float | None = None):
    """Propagate g' <= A g + f: the comparison solution on a sample grid.

    Returns the array  e^{int A} g0 + int e^{int A} f  evaluated at every
    sample at or after t0 (entries before t0 are NaN).  Integrals are
    trapezoids, so the bound carries the usual O(h^2) quadrature error.
    """
    times = np.asarray(times, dtype=np.float64)
    a_values = np.asarray(a_values, dtype=np.float64)
    f_values = np.asarray(f_values, dtype=np.float64)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("need a one-dimensional grid with at least two samples")
    if a_values.shape != times.shape or f_values.shape != times.shape:
        raise ValueError(
            f"sample grids disagree: {times.shape}, {a_values.shape}, {f_values.shape}"
        )
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("sample times must be strictly increasing")
    if t0 is None:
        t0 = float(times[0])
    start = int(np.argmin(np.abs(times - t0)))
    if abs(times[start] - t0) > 1e-9 * max(1.0, abs(t0)):
        raise ValueError(f"t0 = {t0} is not a sample time")

    out = np.full(times.shape, np.nan)
    bound = float(g0)
    out[start] = bound
    for i in range(start, times.size - 1):
        h = times[i + 1] - times[i]
        growth = math.exp(0.5 * h * (a_values[i] + a_values[i + 1]))
        bound = bound * growth + 0.5 * h * (f_values[i] * growth + f_values[i + 1])
        out[i + 1] = bound
    return out


def _check_omega_window(omega: float) -> None:
    if not 0.0 < omega < 1.0:
        raise ValueError(f"the threshold algebra needs omega in (0, 1), got {omega}")


def h_threshold(omega: float, t1: float) -> float:
    """Largest admissible improvement factor for horizon t1."""
    _check_omega_window(omega)
    if not t1 > 0.0:
        raise ValueError(f"horizon t1 must be positive, got {t1}")
    return (1.0 - math.exp(-omega * t1)) * (1.0 - omega)


def g_function(t, omega: float, eps_prime: float):
    """g(t) = (1 - omega) - eps_prime / (1 - e^{-omega t}), for t > 0."""
    _check_omega_window(omega)
    if not 0.0 < eps_prime < 1.0:
        raise ValueError(f"improvement factor must lie in (0, 1), got {eps_prime}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0.0):
        raise ValueError("g is only defined for t > 0")
    out = (1.0 - omega) - eps_prime / (1.0 - np.exp(-omega * t))
    return float(out) if out.ndim == 0 else out


def g_function_quotient(t, omega: float, eps_prime: float):
    """Equivalent quotient form [e^{omega t}(1 - eps' - omega) - (1 - omega)] / (e^{omega t} - 1)."""
    _check_omega_window(omega)
    if not 0.0 < eps_prime < 1.0:
        raise ValueError(f"improvement factor must lie in (0, 1), got {eps_prime}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0.0):
        raise ValueError("g is only defined for t > 0")
    growth = np.exp(omega * t)
    out = (growth * (1.0 - eps_prime - omega) - (1.0 - omega)) / (growth - 1.0)
    return float(out) if out.ndim == 0 else out


def epsilon_budgets(params: BootstrapParams, omega: float) -> tuple[float, float]:
    """Source-amplitude budgets (eps1, eps2); negative room clamps to zero."""
    threshold = h_threshold(omega, params.t1)
    if params.eps_prime >= threshold:
        raise ValueError(
            f"improvement factor {params.eps_prime:.6g} reaches the threshold "
            f"h(T1) = {threshold:.6g}; g(T1) <= 0 leaves no budget"
        )
    g_t1 = g_function(params.t1, omega, params.eps_prime)
    eps1 = omega * g_t1 * params.e_m0 / (math.sqrt(2.0) * params.c_delta)
    radicand = 2.0 * (params.eps_prime - 0.75 * params.eps_prime**2)
    eps2 = (2.0 * omega / params.c_delta) * math.sqrt(radicand) * params.e_m0
    return max(eps1, 0.0), max(eps2, 0.0)


def falling_derivative_bound(mu: float, order: int, delta: float) -> float:
    """sup over |x| <= delta of |d^l/dx^l (1 + x)^mu|, the coefficient c_l."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"sup-norm ceiling must lie in [0, 1), got {delta}")
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    coefficient = 1.0
    for j in range(order):
        coefficient *= abs(mu - j)
    if coefficient == 0.0:
        return 0.0
    exponent = mu - order
    edge = (1.0 + delta) if exponent >= 0.0 else (1.0 - delta)
    return coefficient * edge**exponent


def composition_envelope(order: int, mu: float, delta: float) -> float:
    """M_{k, delta} = max_{1 <= l <= k} c_l (1 + delta)^{l - 1}."""
    return max(
        falling_derivative_bound(mu, l, delta) * (1.0 + delta) ** (l - 1)
        for l in range(1, order + 1)
    )


def fractional_constant(
    m: int, mu: float, delta_prime: float, moser: Mapping[int, float]
) -> float:
    """Constant C in ||(1 + u)^mu||_{H^m} <= C ||u||_{H^m} + (2 pi)^{3/2}.

    Assembled from the calibrated per-order composition constants C_k as
    max_k { C_k M_{k, delta'} } against the mean-value constant
    M_mu = sup |mu (1 + x)^{mu - 1}|; valid while ||u||_inf <= delta_prime.
    """
    if m < 1:
        raise ValueError(f"Sobolev order must be >= 1, got {m}")
    if not 0.0 <= delta_prime < 1.0:
        raise ValueError(f"sup-norm ceiling must lie in [0, 1), got {delta_prime}")
    missing = [k for k in range(1, m + 1) if k not in moser]
    if missing:
        raise ValueError(f"no calibrated composition constant for orders {missing}")
    if mu == 0.0:
        return 0.0
    edge = (1.0 + delta_prime) if mu >= 1.0 else (1.0 - delta_prime)
    m_mu = abs(mu) * edge ** (mu - 1.0)
    per_order = max(
        moser[k] * composition_envelope(k, mu, delta_prime) for k in range(1, m + 1)
    )
    return max(per_order, m_mu)


def forcing_constant(
    e_m0: float,
    omega: float,
    mu: float,
    m: int,
    c_sobolev: float,
    c_algebra: float,
    moser: Mapping[int, float],
) -> tuple[float, float, float]:
    """A priori profile-to-forcing constant C and the radii backing it.

    Along any trajectory obeying the bootstrap bound ||u||_{H^m} <= sqrt(2) E0
    the forcing satisfies ||F||_{H^m} <= C e^{-kappa t} * amplitude, with

        C = c_algebra (C_frac sqrt(2) E0 + (2 pi)^{3/2}),

    where C_frac is the composition constant at the sup ceiling
    delta' = c_sobolev sqrt(2) E0.  Returns (C, delta, delta_prime).
    """
    if not e_m0 > 0.0:
        raise ValueError(f"initial energy must be positive, got {e_m0}")
    _check_omega_window(omega)
    delta = e_m0 / omega
    delta_prime = c_sobolev * math.sqrt(2.0) * e_m0
    if delta_prime >= 1.0:
        raise ValueError(
            f"sup ceiling {delta_prime:.6g} >= 1: data too large for the composition estimate"
        )
    c_frac = fractional_constant(m, mu, delta_prime, moser)
    c_delta = c_algebra * (c_frac * math.sqrt(2.0) * e_m0 + VOLUME**0.5)
    return c_delta, delta, delta_prime
