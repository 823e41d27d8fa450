"""
Bath response functions: resonant rates and dispersive (level-shift) parts.

The one-sided Fourier transforms of the bath two-point correlators split into
a Hermitian part, which enters the dissipator, and an anti-Hermitian part,
which shifts energies.  With the bath reduced to its spectral density
``J(omega)`` and occupation ``p(omega)`` the resonant parts are algebraic,

    gamma1(omega) = J(omega) * p(omega),
    gamma2(omega) = J(omega)^T * (1 - xi * p(omega)),

both zero for ``omega < 0`` because the bath spectrum is non-negative.  The
dispersive parts are Hilbert-transform-like principal-value integrals of the
same integrands,

    s1_jk(omega) = (1/2pi) PV int_0^L J_jk(e) p(e) / (e - omega) de,
    s2_jk(omega) = (1/2pi) PV int_0^L J_kj(e) (1 - xi p(e)) / (omega - e) de,

evaluated here by symmetric-interval subtraction around the pole with
adaptive refinement of every sub-integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import integrate

from .model import BathModel, DomainError, occupation

__all__ = ["RateSample", "QuadratureError", "rates", "lamb_shifts", "pv_integral"]


class QuadratureError(RuntimeError):
    """Principal-value quadrature failed to reach its accuracy target.

    Carries the achieved absolute error estimate in ``estimate``.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


@dataclass(frozen=True, eq=False)
class RateSample:
    """Bath response matrices of one bath at one frequency.

    ``gamma1``/``gamma2`` are the Hermitian PSD resonant rates; ``s1``/``s2``
    are the Hermitian dispersive matrices (``None`` when not requested).
    """

    omega: float
    gamma1: NDArray | None = None
    gamma2: NDArray | None = None
    s1: NDArray | None = None
    s2: NDArray | None = None


def rates(bath: BathModel, omega: float) -> RateSample:
    """Resonant rate matrices ``gamma1``, ``gamma2`` of ``bath`` at ``omega``.

    Both vanish identically for negative frequencies.  For a bosonic bath a
    :class:`~autotherm.model.DomainError` propagates from the occupation when
    ``0 <= omega <= mu``.
    """
    size = bath.J.size
    if omega < 0.0:
        z = np.zeros((size, size), dtype=complex)
        return RateSample(omega=omega, gamma1=z, gamma2=z.copy())
    J = bath.J.matrix(omega)
    if not J.any():
        z = np.zeros((size, size), dtype=complex)
        return RateSample(omega=omega, gamma1=z, gamma2=z.copy())
    p = occupation(bath, omega)
    gamma1 = J * p
    gamma2 = J.T * (1.0 - bath.xi * p)
    return RateSample(omega=omega, gamma1=gamma1, gamma2=gamma2)


def _quad(f, a: float, b: float, epsabs: float, epsrel: float):
    val, err, *rest = integrate.quad(
        f, a, b, epsabs=epsabs, epsrel=epsrel, limit=200, full_output=1
    )
    return val, err


def pv_integral(
    f,
    a: float,
    b: float,
    pole: float,
    epsabs: float = 1e-12,
    epsrel: float = 1e-8,
) -> tuple[float, float]:
    """Cauchy principal value of ``int_a^b f(e) / (e - pole) de``.

    When the pole lies inside ``(a, b)`` the integral is split into a
    symmetric window ``[pole - h, pole + h]``, where the odd part of the
    kernel cancels and the integrand ``(f(pole+t) - f(pole-t)) / t`` is
    regular, plus ordinary adaptive quadrature on the remainder.  Returns
    ``(value, error_estimate)`` and raises :class:`QuadratureError` when the
    estimate exceeds the requested accuracy.
    """
    if not a < b:
        raise ValueError("pv_integral requires a < b")
    span = b - a
    edge = 1e-12 * span
    if a - edge <= pole <= a + edge or b - edge <= pole <= b + edge:
        raise QuadratureError(
            f"principal-value pole {pole:g} sits on an integration boundary", np.inf
        )

    total = 0.0
    total_err = 0.0
    if pole <= a or pole >= b:
        val, err = _quad(lambda e: f(e) / (e - pole), a, b, epsabs, epsrel)
        total, total_err = val, err
    else:
        h = min(pole - a, b - pole)
        val, err = _quad(
            lambda t: (f(pole + t) - f(pole - t)) / t, 0.0, h, epsabs, epsrel
        )
        total += val
        total_err += err
        if pole - h > a:
            val, err = _quad(lambda e: f(e) / (e - pole), a, pole - h, epsabs, epsrel)
            total += val
            total_err += err
        if pole + h < b:
            val, err = _quad(lambda e: f(e) / (e - pole), pole + h, b, epsabs, epsrel)
            total += val
            total_err += err

    if not np.isfinite(total) or total_err > max(epsabs, epsrel * abs(total), 1e-30) * 50:
        raise QuadratureError("principal-value quadrature did not converge", total_err)
    return total, total_err


def _scalar_dispersive(bath: BathModel, omega: float, cutoff: float, which: int,
                       epsrel: float) -> float:
    """PV transform of the scalar profile for separable ``J = profile * M``."""
    prof = bath.J.profile

    if which == 1:
        def f(e: float) -> float:
            return prof(e) * occupation(bath, e)
        sign = 1.0
    else:
        def f(e: float) -> float:
            return prof(e) * (1.0 - bath.xi * occupation(bath, e))
        sign = -1.0  # the l=2 transform carries 1/(omega - e)

    lo = 0.0
    if bath.xi == -1 and bath.mu >= 0.0:
        # Bose occupation diverges at e -> mu+; the dispersive integral is
        # then ill-defined unless the profile vanishes there.
        if prof(bath.mu + 1e-12 * max(cutoff, 1.0)) != 0.0 and which == 1:
            raise QuadratureError(
                "dispersive integral diverges: bosonic bath occupation has a "
                f"non-integrable singularity at omega={bath.mu:g} inside the "
                "spectral support (use mu < 0 or an ohmic profile)",
                np.inf,
            )
    val, _err = pv_integral(f, lo, cutoff, omega, epsrel=epsrel)
    return sign * val / (2.0 * np.pi)


def lamb_shifts(
    bath: BathModel, omega: float, cutoff: float, epsrel: float = 1e-8
) -> RateSample:
    """Dispersive matrices ``s1``, ``s2`` of ``bath`` at ``omega``.

    ``cutoff`` bounds the frequency integration and must extend beyond the
    support of the spectral density.  Negative ``omega`` is supported (the
    pole then lies outside the integration range and the integral is
    regular); it is needed for position-like couplings.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be > 0")
    size = bath.J.size
    if bath.J.is_zero:
        z = np.zeros((size, size), dtype=complex)
        return RateSample(omega=omega, s1=z, s2=z.copy())
    M = bath.J.base_matrix()
    i1 = _scalar_dispersive(bath, omega, cutoff, 1, epsrel)
    i2 = _scalar_dispersive(bath, omega, cutoff, 2, epsrel)
    return RateSample(omega=omega, s1=i1 * M, s2=i2 * M.T)
