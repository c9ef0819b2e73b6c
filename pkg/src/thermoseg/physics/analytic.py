"""Closed-form 1-D conduction responses to an instantaneous surface pulse.

All functions return temperature rise above ambient in kelvin and accept
scalar or array `time`.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .model import MaterialProps


def _check_time(time) -> np.ndarray:
    t = np.asarray(time, dtype=float)
    if np.any(t <= 0):
        raise DomainError("time must be > 0")
    return t


def temperature_at_depth(mat: MaterialProps, energy: float, depth: float, time):
    """Semi-infinite-body temperature rise at depth z after an impulse.

    T(z, t) = Q / sqrt(pi rho c k t) * exp(-z^2 / (4 alpha t)),
    monotonically decreasing in z at fixed t.
    """
    t = _check_time(time)
    if depth < 0:
        raise DomainError("depth must be >= 0")
    surface = energy / np.sqrt(np.pi * mat.density * mat.heat_capacity
                               * mat.conductivity * t)
    value = surface * np.exp(-(depth ** 2) / (4.0 * mat.diffusivity * t))
    return value if value.ndim else float(value)


def defect_contrast(mat: MaterialProps, energy: float, depth: float, time):
    """Surface temperature gap over a defect buried at the given depth.

    delta_T(t) = 2 Q / sqrt(pi rho c k t) * exp(-d^2 / (alpha t)).
    Single-term form; for a fixed d > 0 it peaks at t = 2 d^2 / alpha.
    """
    t = _check_time(time)
    if depth < 0:
        raise DomainError("depth must be >= 0")
    value = (2.0 * energy
             / np.sqrt(np.pi * mat.density * mat.heat_capacity * mat.conductivity * t)
             * np.exp(-(depth ** 2) / (mat.diffusivity * t)))
    return value if value.ndim else float(value)


def peak_contrast_time(mat: MaterialProps, depth: float) -> float:
    """Time of maximum defect contrast for a defect at the given depth: 2 d^2 / alpha."""
    if depth <= 0:
        raise DomainError("depth must be > 0")
    return 2.0 * depth ** 2 / mat.diffusivity


def slab_surface_temperature(mat: MaterialProps, energy: float, thickness: float,
                             time, n_images: int = 64):
    """Exact front-surface response of an insulated slab to a surface impulse.

    Superposes mirror images of the semi-infinite kernel across both
    insulated faces:

        T(0, t) = Q / sqrt(pi rho c k t) * (1 + 2 sum_n exp(-n^2 L^2 / (alpha t)))

    Early on (t << L^2/alpha) this reduces to the semi-infinite form; late
    on it plateaus at Q / (rho c L). Serves as the independent conduction
    oracle for finite-thickness solver validation.
    """
    t = _check_time(time)
    if thickness <= 0:
        raise DomainError("thickness must be > 0")
    base = energy / np.sqrt(np.pi * mat.density * mat.heat_capacity
                            * mat.conductivity * t)
    n = np.arange(1, n_images + 1, dtype=float)
    images = np.exp(-np.multiply.outer(t ** -1.0, n ** 2 * thickness ** 2 / mat.diffusivity))
    value = base * (1.0 + 2.0 * images.sum(axis=-1))
    return value if value.ndim else float(value)
