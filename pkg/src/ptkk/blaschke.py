"""Blaschke pole factorization and winding-number diagnostics.

A response meromorphic in the upper half-plane splits as R = B * R_reg,
where B carries the UHP poles and has unit modulus on the real axis, and
R_reg is UHP-regular so that the standard dispersion relations apply to
it.  The integer winding number counts how many poles the factorization
had to strip; it jumps by one each time a resonance crosses the real
axis, and is computed here both from closed-form roots and from a
numerical argument-principle contour.

Convention: the factor is built with poles at the response poles z_j and
zeros at their conjugates,

    B(z) = prod_j (z - z_j*) / (z - z_j),

so that dividing the response by B removes its UHP poles.  (The product
written the other way up would square the poles instead of cancelling
them.)

Zero counting: for a response that decays at large |w| (offset 0) the
upper-half-plane zeros of the numerator enter the count, per the argument
principle.  A reflection-type response with a unit high-frequency offset
keeps its zeros in the regular outer part; the winding number then counts
the poles of the resolvent factor alone, which is what jumps at the
exceptional point and what the threshold formulas predict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .response import (
    BOUNDARY_TOL,
    BoundaryPoleError,
    PoleData,
    RationalResponse,
    residues,
    _sort_desc_imag,
    _trim,
)


class ContourError(ArithmeticError):
    """Winding integral did not converge to an integer."""


def _locations(pole_like) -> np.ndarray:
    locs = [p.location if isinstance(p, PoleData) else complex(p) for p in pole_like]
    return np.asarray(locs, dtype=complex)


def blaschke_factor(uhp_pole_locations, z):
    """Evaluate B(z) = prod_j (z - z_j*)/(z - z_j) at z.

    Unit modulus for real z; division of the response by this factor
    removes the poles at z_j.  Accepts PoleData or plain complex pole
    locations, all strictly in the upper half-plane.
    """
    locs = _locations(uhp_pole_locations)
    if locs.size and locs.imag.min() <= BOUNDARY_TOL:
        raise BoundaryPoleError(
            "Blaschke factor needs poles strictly above the real axis"
        )
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for zj in locs:
        out = out * (z - np.conj(zj)) / (z - zj)
    return out if out.ndim else complex(out)


@dataclass
class BlaschkeFactorization:
    """Result of stripping the UHP poles out of a rational response."""

    uhp_poles: list[PoleData]
    uhp_zeros: list[complex]
    winding_number: int
    regular_part: RationalResponse

    def blaschke(self, z):
        """The stripped inner factor B(z)."""
        return blaschke_factor(self.uhp_poles, z)


def factorize(
    response: RationalResponse, boundary_tol: float = BOUNDARY_TOL
) -> BlaschkeFactorization:
    """Split a rational response into Blaschke factor times regular part.

    Identifies UHP poles (with residues) and UHP numerator zeros, builds
    the pole factor, and forms the regular part by reflecting the UHP
    denominator roots to their conjugates.  The regular part is verified
    pole-free in the UHP by re-running root detection on it.

    Raises
    ------
    BoundaryPoleError
        If a pole or zero sits within ``boundary_tol`` of the real axis
        (exceptional-point proximity: the split is ill-conditioned there).
    """
    pole_locs = response.pole_locations()
    if np.any(np.abs(pole_locs.imag) < boundary_tol):
        raise BoundaryPoleError(
            "pole on the real axis within tolerance (exceptional-point "
            "proximity); Blaschke factorization refused"
        )
    uhp_locs = pole_locs[pole_locs.imag > boundary_tol]
    rhos = residues(response, uhp_locs)
    uhp = [
        PoleData(location=complex(z), residue=r, in_uhp=True)
        for z, r in zip(uhp_locs, rhos)
    ]

    if response.offset == 0:
        num = response.numerator
        zero_locs = (
            npoly.polyroots(num) if len(_trim(num)) > 1 else np.empty(0, complex)
        )
        if zero_locs.size and np.any(np.abs(zero_locs.imag) < boundary_tol):
            raise BoundaryPoleError(
                "response zero on the real axis within tolerance; "
                "Blaschke factorization refused"
            )
        uhp_zeros = [complex(z) for z in zero_locs if z.imag > boundary_tol]
    else:
        uhp_zeros = []

    lhp_locs = pole_locs[pole_locs.imag < -boundary_tol]
    reflected = np.concatenate([lhp_locs, np.conj(uhp_locs)])
    den_reg = response.denominator[-1] * npoly.polyfromroots(reflected)
    full_num = npoly.polyadd(response.offset * response.denominator, response.numerator)
    regular = RationalResponse(full_num, den_reg, offset=0.0)

    reg_poles = regular.pole_locations()
    if reg_poles.size and reg_poles.imag.max() > boundary_tol:
        raise ArithmeticError("regular part still has an upper half-plane pole")

    return BlaschkeFactorization(
        uhp_poles=uhp,
        uhp_zeros=uhp_zeros,
        winding_number=len(uhp) - len(uhp_zeros),
        regular_part=regular,
    )


def _contour(half_width: float, n_points: int) -> list[np.ndarray]:
    seg = np.linspace(-half_width, half_width, n_points).astype(complex)
    theta = np.linspace(0.0, np.pi, n_points)
    arc = half_width * np.exp(1j * theta)
    return [seg, arc]


def argument_principle_integral(
    response: RationalResponse, half_width: float = 10.0, n_points: int = 8192
) -> complex:
    """Raw (2 pi i)^-1 contour integral of the logarithmic derivative.

    Contour: the real segment [-R, R] closed by the upper semicircle,
    traversed counterclockwise; trapezoid rule on each piece.  Returns
    approximately Z - P for the factor integrated (see
    ``winding_number_contour`` for which factor that is).
    """
    den = response.denominator
    dden = npoly.polyder(den)
    use_numerator = response.offset == 0 and len(_trim(response.numerator)) > 1
    num = response.numerator
    dnum = npoly.polyder(num) if use_numerator else None

    roots = [response.pole_locations()]
    if use_numerator:
        roots.append(npoly.polyroots(num))
    max_mod = max((float(np.abs(r).max()) for r in roots if r.size), default=0.0)
    if half_width < 2 * max_mod:
        raise ValueError(
            f"contour half-width {half_width} too small; poles/zeros reach "
            f"modulus {max_mod:.3g}, need at least twice that"
        )
    # the real segment is part of the contour: roots hugging the axis make
    # the integral meaningless
    band = max(BOUNDARY_TOL, 1e-9 * half_width)
    for r in roots:
        if r.size and np.any((np.abs(r.imag) < band) & (np.abs(r.real) <= half_width)):
            raise BoundaryPoleError(
                "pole or zero on the real-axis segment of the winding contour"
            )

    total = 0j
    for piece in _contour(half_width, n_points):
        dval = npoly.polyval(piece, den)
        if np.abs(dval).min() == 0:
            raise BoundaryPoleError("pole sits on the winding contour")
        f = -npoly.polyval(piece, dden) / dval
        if use_numerator:
            nval = npoly.polyval(piece, num)
            if np.abs(nval).min() == 0:
                raise BoundaryPoleError("zero sits on the winding contour")
            f = f + npoly.polyval(piece, dnum) / nval
        total += np.sum((f[1:] + f[:-1]) / 2 * np.diff(piece))
    return complex(total / (2j * np.pi))


def winding_number_contour(
    response: RationalResponse,
    half_width: float = 10.0,
    n_points: int = 8192,
    residual_tol: float = 0.01,
    max_refinements: int = 4,
) -> int:
    """UHP pole count minus zero count by the numerical argument principle.

    The counterclockwise integral yields Z - P; the winding number is the
    negation, P - Z, so a single pole crossing into the upper half-plane
    takes the result from 0 to 1.  For offset-carrying reflection
    responses the integral runs over the resolvent pole factor (see module
    docstring), so the count equals the UHP pole count.

    Poles hugging the real axis degrade the trapezoid on the segment; the
    point count is doubled (up to ``max_refinements`` times) until the
    integral sits within ``residual_tol`` of an integer.

    Raises
    ------
    ContourError
        If no refinement brings the integral within ``residual_tol`` of an
        integer (singularity essentially on the contour).
    """
    signed = None
    for level in range(max_refinements + 1):
        raw = argument_principle_integral(response, half_width, n_points << level)
        signed = -raw
        nearest = int(np.round(signed.real))
        if abs(signed - nearest) <= residual_tol:
            return nearest
    raise ContourError(
        f"winding integral {signed} is not within {residual_tol} of an "
        "integer; a pole or zero sits too close to the contour"
    )


def bode_sum(uhp_pole_locations) -> tuple[float, float]:
    """Gain-bandwidth sums over a finite UHP pole set.

    Returns ``(weighted, strip)`` with
        weighted = sum_j Im z_j / (1 + Re z_j^2 + Im z_j^2),
        strip    = sum_j Im z_j  (total gain rate).

    Finiteness of the weighted sum is the admissibility condition for a
    convergent pole factorization; within a bounded strip it reduces to
    finiteness of the total gain rate.
    """
    locs = _locations(uhp_pole_locations)
    if locs.size == 0:
        return 0.0, 0.0
    if locs.imag.min() <= BOUNDARY_TOL:
        raise BoundaryPoleError("bode_sum needs poles strictly in the UHP")
    weighted = float(np.sum(locs.imag / (1.0 + locs.real**2 + locs.imag**2)))
    strip = float(np.sum(locs.imag))
    return weighted, strip
