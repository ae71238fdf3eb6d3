"""Fixed-point check for the integral operator satisfied by the first moment.

N f(r) = integral over u in (0, 1) of g_r(u) f(u), where the kernel g_r is a
probability density in r for every u.  The closed-form first moment must be a
fixed point of N.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from ..engine import BETA_STAR
from .estimators import m1_closed_form


def kernel(r: float, u: float, beta: float = BETA_STAR) -> float:
    c = 2.0 * beta / (beta + 2.0)
    if 0.0 < u < r:
        return ((1.0 - r) / (1.0 - u)) ** (2.0 + beta) * (2.0 / (1.0 - u) - c)
    if r <= u < 1.0:
        return (r / u) ** (2.0 + beta) * (2.0 / u - c)
    return 0.0


def _quad(f, a, b, what):
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        except IntegrationWarning as exc:
            raise RuntimeError(f"quadrature did not converge for {what} on [{a}, {b}]: {exc}") from None
    return val, err


def apply_operator(f, r: float, beta: float = BETA_STAR) -> float:
    """(N f)(r), integrating separately on each side of the kernel break."""
    left, _ = _quad(lambda u: kernel(r, u, beta) * f(u), 0.0, r, f"N f({r})")
    right, _ = _quad(lambda u: kernel(r, u, beta) * f(u), r, 1.0, f"N f({r})")
    return left + right


def kernel_mass(u: float, beta: float = BETA_STAR) -> float:
    """integral over r in (0, 1) of g_r(u); equals 1 for the right beta."""
    below, _ = _quad(lambda r: kernel(r, u, beta), 0.0, u, f"kernel mass at u={u}")
    above, _ = _quad(lambda r: kernel(r, u, beta), u, 1.0, f"kernel mass at u={u}")
    return below + above


@dataclass
class FixedPointReport:
    r: np.ndarray
    image: np.ndarray
    candidate: np.ndarray
    max_residual: float
    kernel_masses: dict[float, float]


def fixed_point_report(grid_size: int = 64, exponent: float = BETA_STAR,
                       beta: float = BETA_STAR) -> FixedPointReport:
    """Residual of the candidate C(b) (r (1 - r))**b with b = exponent."""
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    r = np.union1d(np.arange(1, grid_size) / grid_size, np.round(np.arange(1, 10) / 10, 12))
    cand = lambda u: float(m1_closed_form(u, exponent))
    image = np.array([apply_operator(cand, x, beta) for x in r])
    values = np.array([cand(x) for x in r])
    masses = {u: kernel_mass(u, beta) for u in (0.25, 0.5, 0.75)}
    return FixedPointReport(r, image, values, float(np.max(np.abs(image - values))), masses)


def verify_operator_fixed_point(grid_size: int = 64, exponent: float = BETA_STAR) -> float:
    return fixed_point_report(grid_size, exponent).max_residual


def kernel_normalization_error(beta: float = BETA_STAR, points=(0.25, 0.5, 0.75)) -> float:
    return max(abs(kernel_mass(u, beta) - 1.0) for u in points)


__all__ = ["kernel", "apply_operator", "kernel_mass", "fixed_point_report",
           "verify_operator_fixed_point", "kernel_normalization_error", "FixedPointReport"]
