"""Energy functionals for the damped wave flow.

Two families are tracked.  The modified energy couples the field to its
velocity through an omega cross term,

    E^2[v] = 1/2 int (v_t^2 + omega v v_t + 1/2 omega^2 v^2) dx
             + 1/2 int |grad v|^2 dx,

and is positive definite thanks to the completed-square identity

    E^2[v] = 1/2 ||v_t + omega v / 2||^2 + omega^2/8 ||v||^2
             + 1/2 ||grad v||^2.

The order-m version sums E^2 over all derivative multi-indices up to m.  The
standard energy drops the cross term and is the natural quantity for the
late-time decay statements:

    Estd^2 = 1/2 (||u_t||_{H^m}^2 + ||grad u||_{H^m}^2).

All integrals are evaluated spectrally through Parseval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields
from .fields import Field, Spectrum, VOLUME, multi_indices, spectral_derivative, transform

_AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


@dataclass
class EnergySample:
    """Diagnostics recorded at one sample time along a trajectory.

    Both energies are stored squared; norms are plain.  ``u_min`` is the grid
    minimum of u, tracked because the nonlinearity needs 1 + u > 0.
    """

    t: float
    e_m_sq: float
    e_std_sq: float
    u_hm: float
    ut_hm: float
    f_hm: float
    u_mean: float
    f_mean: float
    u_min: float


def _check_pair(u: Field, ut: Field) -> None:
    if u.grid != ut.grid:
        raise ValueError(f"field grids differ: {u.grid.n} vs {ut.grid.n}")


def _check_omega(omega: float) -> None:
    if not omega > 0.0:
        raise ValueError(f"damping rate omega must be positive, got {omega}")


def _l2_sq(spectrum: Spectrum) -> float:
    return float(VOLUME * np.sum(np.abs(spectrum.coeffs) ** 2))


def _cross(u_spec: Spectrum, ut_spec: Spectrum) -> float:
    """int u u_t dx via Parseval; exactly real for real fields."""
    return float(VOLUME * np.sum((u_spec.coeffs * np.conj(ut_spec.coeffs)).real))


def _pair_energy(u_spec: Spectrum, ut_spec: Spectrum, omega: float) -> float:
    """Scalar modified energy of one derivative pair."""
    value = 0.5 * _l2_sq(ut_spec)
    value += 0.5 * omega * _cross(u_spec, ut_spec)
    value += 0.25 * omega**2 * _l2_sq(u_spec)
    for axis in _AXES:
        value += 0.5 * _l2_sq(spectral_derivative(u_spec, axis))
    return value


def modified_energy(u: Field, ut: Field, omega: float, m: int = 0) -> float:
    """Squared modified energy E_m^2, summed over multi-indices up to m."""
    _check_pair(u, ut)
    _check_omega(omega)
    u_spec = transform(u)
    ut_spec = transform(ut)
    total = 0.0
    for alpha in multi_indices(m):
        total += _pair_energy(
            spectral_derivative(u_spec, alpha),
            spectral_derivative(ut_spec, alpha),
            omega,
        )
    return total


def standard_energy(u: Field, ut: Field, m: int = 0) -> float:
    """Squared standard energy 1/2 (||u_t||_{H^m}^2 + ||grad u||_{H^m}^2)."""
    _check_pair(u, ut)
    u_spec = transform(u)
    ut_spec = transform(ut)
    grad_sq = sum(
        fields.sobolev_norm(spectral_derivative(u_spec, axis), m) ** 2 for axis in _AXES
    )
    return 0.5 * (fields.sobolev_norm(ut_spec, m) ** 2 + grad_sq)


def damped_combination_norm(u: Field, ut: Field, omega: float) -> float:
    """L2 norm of u_t + (omega/2) u, the combination the energy controls."""
    _check_pair(u, ut)
    _check_omega(omega)
    combo = Field(u.grid, ut.values + 0.5 * omega * u.values)
    return fields.l2_norm(combo)


def sample_energies(
    t: float, u: Field, ut: Field, f: Field, omega: float, m: int
) -> EnergySample:
    """Evaluate the full diagnostic row for one instant of a trajectory."""
    return EnergySample(
        t=float(t),
        e_m_sq=modified_energy(u, ut, omega, m),
        e_std_sq=standard_energy(u, ut, m),
        u_hm=fields.sobolev_norm(u, m),
        ut_hm=fields.sobolev_norm(ut, m),
        f_hm=fields.sobolev_norm(f, m),
        u_mean=u.mean(),
        f_mean=f.mean(),
        u_min=float(np.min(u.values)),
    )
