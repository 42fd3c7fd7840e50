"""Open PT-symmetric gain-loss models and their exact reflection responses.

A dimer (or chain) with balanced gain and loss is coupled to a measurement
port; integrating out the port bus leaves an effective non-Hermitian
Hamiltonian and a rational one-port reflection coefficient

    r(w) = 1 + i * gamma_ex * G_pp(w),   G = (w I - H_eff)^(-1),

whose poles are the resonances of the open system.  Everything downstream
(winding numbers, residue-corrected dispersion relations, scaling scans)
is built from the pole locations and residues computed here.

All frequencies and rates are in units of the inter-site coupling kappa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

SP = "sp"    # port decay on one site only
SYM = "sym"  # identical decay on both sites

# poles closer to the real axis than this are classified "boundary" and
# excluded from UHP counts and residue corrections
BOUNDARY_TOL = 1e-12

# |den'(z)| below this (relative to the polynomial scale) means a repeated
# root: residue extraction is refused
DEGENERACY_TOL = 1e-9


class EPDegenerateError(ValueError):
    """Raised when residues are requested at a (numerically) repeated pole."""


class BoundaryPoleError(ValueError):
    """Raised when an operation requires poles strictly off the real axis."""


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimerParams:
    """Two-site gain-loss dimer coupled to a port.

    Parameters
    ----------
    gamma : float
        Gain-loss rate (site 1 lossy, site 2 gainy), >= 0.
    kappa : float
        Inter-site coupling, > 0.  Default 1 so all rates read dimensionless.
    gamma_ex : float
        Port coupling rate, >= 0.
    convention : str
        ``SP``: port decay -i*gamma_ex/2 on site 1 only.
        ``SYM``: the same decay on both sites (identity shift).
    """

    gamma: float
    kappa: float = 1.0
    gamma_ex: float = 0.0
    convention: str = SP

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.gamma_ex < 0:
            raise ValueError("gamma_ex must be >= 0")
        if self.convention not in (SP, SYM):
            raise ValueError(f"convention must be {SP!r} or {SYM!r}")


@dataclass(frozen=True)
class ChainModel:
    """Tight-binding chain with onsite gain/loss and a single port.

    Sites are numbered from 1.  ``onsite_gain_loss[j]`` > 0 means gain
    (+i g on the diagonal), < 0 means loss.  The port adds -i*gamma_ex/2
    on the diagonal of ``port_site``.

    The chain must be PT symmetric (onsite profile odd under site
    reversal, hoppings palindromic) unless ``allow_non_pt`` is set; the
    dispersion machinery downstream is valid either way, but the models
    studied here all have the symmetry, so violations are rejected loudly
    by default.
    """

    hoppings: tuple[float, ...]
    onsite_gain_loss: tuple[float, ...]
    port_site: int = 1
    gamma_ex: float = 0.0
    allow_non_pt: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hoppings", tuple(float(t) for t in self.hoppings))
        object.__setattr__(
            self, "onsite_gain_loss", tuple(float(g) for g in self.onsite_gain_loss)
        )
        n = len(self.onsite_gain_loss)
        if n < 2:
            raise ValueError("chain needs at least 2 sites")
        if len(self.hoppings) != n - 1:
            raise ValueError("need n_sites - 1 hoppings")
        if not 1 <= self.port_site <= n:
            raise ValueError(f"port_site must be in 1..{n}")
        if self.gamma_ex < 0:
            raise ValueError("gamma_ex must be >= 0")
        if not self.allow_non_pt:
            g = np.array(self.onsite_gain_loss)
            t = np.array(self.hoppings)
            scale = max(1.0, np.abs(g).max(), np.abs(t).max())
            if np.abs(g[::-1] + g).max() > 1e-12 * scale:
                raise ValueError(
                    "onsite gain/loss profile is not PT symmetric "
                    "(reversal must equal negation); pass allow_non_pt=True "
                    "to build it anyway"
                )
            if np.abs(t[::-1] - t).max() > 1e-12 * scale:
                raise ValueError(
                    "hoppings are not palindromic, chain is not PT symmetric; "
                    "pass allow_non_pt=True to build it anyway"
                )

    @property
    def n_sites(self) -> int:
        return len(self.onsite_gain_loss)


Model = DimerParams | ChainModel


def build_effective_hamiltonian(model: Model) -> np.ndarray:
    """Effective non-Hermitian Hamiltonian of the port-coupled model.

    For the dimer: [[-i g, k], [k, i g]] plus -i*gamma_ex/2 on site 1
    (SP) or on the full diagonal (SYM).  For chains the port decay sits
    on the port-site diagonal only.
    """
    if isinstance(model, DimerParams):
        g, k, ge = model.gamma, model.kappa, model.gamma_ex
        h = np.array([[-1j * g, k], [k, 1j * g]], dtype=complex)
        if model.convention == SP:
            h[0, 0] += -0.5j * ge
        else:
            h += -0.5j * ge * np.eye(2)
        return h
    n = model.n_sites
    h = np.zeros((n, n), dtype=complex)
    for i, t in enumerate(model.hoppings):
        h[i, i + 1] = h[i + 1, i] = t
    h += 1j * np.diag(model.onsite_gain_loss)
    h[model.port_site - 1, model.port_site - 1] += -0.5j * model.gamma_ex
    return h


def char_poly(a: np.ndarray) -> np.ndarray:
    """Coefficients (ascending) of det(w I - A) via Faddeev-LeVerrier.

    Polynomial in the matrix entries, hence exact to rounding for the
    small matrices used here; avoids eigenvalue ordering ambiguities.
    """
    n = a.shape[0]
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    m = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        am = a @ m
        ck = -np.trace(am) / k
        c[n - k] = ck
        m = am + ck * np.eye(n)
    return c


# ---------------------------------------------------------------------------
# rational responses
# ---------------------------------------------------------------------------

def _trim(c: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else c[:1]


@dataclass(frozen=True, eq=False)
class RationalResponse:
    """offset + numerator(w)/denominator(w) with ascending coefficients.

    The resolvent part numerator/denominator is strictly proper when an
    offset is present (the response tends to the offset at large |w|).
    """

    numerator: np.ndarray
    denominator: np.ndarray
    offset: complex = 0.0

    def __post_init__(self):
        num = _trim(self.numerator)
        den = _trim(self.denominator)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "offset", complex(self.offset))
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ValueError("polynomial coefficients must be finite")
        if den[-1] == 0:
            raise ValueError("denominator is identically zero")
        deg_n, deg_d = len(num) - 1, len(den) - 1
        if self.offset != 0 and not (deg_n < deg_d or np.all(num == 0)):
            raise ValueError("resolvent part must be strictly proper")
        if self.offset == 0 and deg_n > deg_d:
            raise ValueError("response must be bounded at large |w|")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.offset + npoly.polyval(z, self.numerator) / npoly.polyval(
            z, self.denominator
        )

    def resolvent(self, z):
        """The decaying part, response minus offset."""
        z = np.asarray(z, dtype=complex)
        return npoly.polyval(z, self.numerator) / npoly.polyval(z, self.denominator)

    def normalized(self) -> "RationalResponse":
        """Equivalent response with the large-|w| limit moved into offset.

        Leaves strictly proper responses unchanged; for a degree-matched
        numerator the limit num_lead/den_lead is split off so the
        resolvent part decays (as dispersion integrals require).
        """
        num, den = self.numerator, self.denominator
        if len(num) < len(den):
            return self
        limit = num[-1] / den[-1]
        return RationalResponse(
            npoly.polysub(num, limit * den), den, offset=self.offset + limit
        )

    def pole_locations(self) -> np.ndarray:
        """Denominator roots, descending imaginary part."""
        den = self.denominator
        if len(den) - 1 == 2:
            roots = _quadratic_roots(den)
        else:
            roots = npoly.polyroots(den)
        return _sort_desc_imag(np.asarray(roots, dtype=complex))

    def zero_locations(self) -> np.ndarray:
        """Roots of the full response (offset included), descending Im."""
        full = npoly.polyadd(self.offset * self.denominator, self.numerator)
        full = _trim(full)
        if len(full) == 1:
            return np.empty(0, dtype=complex)
        return _sort_desc_imag(npoly.polyroots(full))


def _quadratic_roots(den: np.ndarray) -> list[complex]:
    """Closed-form roots of c0 + c1 w + c2 w^2, cancellation-safe."""
    c0, c1, c2 = den[0] / den[2], den[1] / den[2], 1.0
    disc = np.sqrt(c1 * c1 - 4 * c0 + 0j)
    if (np.conj(c1) * disc).real >= 0:
        q = -(c1 + disc) / 2
    else:
        q = -(c1 - disc) / 2
    if q == 0:
        return [0j, 0j]
    return [q, c0 / q]


def _sort_desc_imag(zs: np.ndarray) -> np.ndarray:
    order = np.lexsort((zs.real, -zs.imag))
    return zs[order]


def reflection_response(model: Model) -> RationalResponse:
    """Exact one-port reflection coefficient r(w) = 1 + i ge * G_pp(w).

    The resolvent numerator is i*gamma_ex times the characteristic
    polynomial of H_eff with the port row/column deleted; the denominator
    is det(w I - H_eff).  For the SP dimer this reduces to

        num = i ge (w - i g),
        den = w^2 + i (ge/2) w + g^2 + g ge / 2 - k^2.
    """
    if isinstance(model, DimerParams):
        g, k, ge = model.gamma, model.kappa, model.gamma_ex
        if model.convention == SP:
            den = np.array([g * g + g * ge / 2 - k * k, 0.5j * ge, 1.0], dtype=complex)
            num = np.array([ge * g, 1j * ge], dtype=complex)
        else:
            den = np.array([g * g - k * k - ge * ge / 4, 1j * ge, 1.0], dtype=complex)
            num = np.array([ge * (g - ge / 2), 1j * ge], dtype=complex)
        return RationalResponse(num, den, offset=1.0)
    h = build_effective_hamiltonian(model)
    p = model.port_site - 1
    keep = [i for i in range(model.n_sites) if i != p]
    minor = h[np.ix_(keep, keep)]
    den = char_poly(h)
    num = 1j * model.gamma_ex * char_poly(minor)
    return RationalResponse(num, den, offset=1.0)


# ---------------------------------------------------------------------------
# poles and residues
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoleData:
    """One simple pole of the response.

    ``residue`` is the residue of the full response (the offset
    contributes none); it is None when the pole is EP-degenerate.
    ``in_uhp`` is the exact sign test Im > 0; poles within BOUNDARY_TOL of
    the real axis are classified boundary and excluded from UHP counting.
    """

    location: complex
    residue: complex | None
    in_uhp: bool = field(default=False)
    degenerate: bool = False

    @property
    def on_boundary(self) -> bool:
        return abs(self.location.imag) < BOUNDARY_TOL


def uhp_poles(pole_list) -> list[PoleData]:
    """Poles strictly in the upper half-plane (boundary band excluded)."""
    return [p for p in pole_list if p.location.imag > BOUNDARY_TOL]


def _degenerate_mask(zs: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(zs).max())) if zs.size else 1.0
    mask = np.zeros(len(zs), dtype=bool)
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            if abs(zs[i] - zs[j]) < DEGENERACY_TOL * scale:
                mask[i] = mask[j] = True
    return mask


def poles(model: Model) -> list[PoleData]:
    """Response poles with residues, sorted by descending imaginary part.

    Dimer poles come from the closed-form quadratic; chain poles from the
    eigenvalues of H_eff.  Repeated roots (exceptional points) are flagged
    degenerate and carry no residue.
    """
    resp = reflection_response(model)
    if isinstance(model, DimerParams):
        zs = resp.pole_locations()
    else:
        zs = _sort_desc_imag(np.linalg.eigvals(build_effective_hamiltonian(model)))
    degen = _degenerate_mask(zs)
    out = []
    for z, d in zip(zs, degen):
        rho = None if d else _residue_at(resp, complex(z))
        out.append(
            PoleData(
                location=complex(z),
                residue=rho,
                in_uhp=bool(z.imag > 0),
                degenerate=bool(d),
            )
        )
    return out


def _den_scale(den: np.ndarray, z: complex) -> float:
    return float(np.abs(den).max() * max(1.0, abs(z)) ** max(len(den) - 2, 0))


def _residue_at(resp: RationalResponse, z: complex) -> complex:
    dden = npoly.polyder(resp.denominator)
    dval = npoly.polyval(z, dden)
    if abs(dval) < DEGENERACY_TOL * _den_scale(resp.denominator, z):
        raise EPDegenerateError(
            f"denominator derivative vanishes at {z}: repeated pole "
            "(exceptional point), residue undefined"
        )
    return complex(npoly.polyval(z, resp.numerator) / dval)


def residues(resp: RationalResponse, pole_locations) -> list[complex]:
    """Residues num(z_j)/den'(z_j) at the given simple pole locations."""
    return [_residue_at(resp, complex(z)) for z in pole_locations]


def residues_from_eigvectors(model: Model) -> list[tuple[complex, complex]]:
    """(pole, residue) pairs via the spectral decomposition of H_eff.

    Independent cross-check of ``residues``: the residue of G_pp at
    eigenvalue l_j is R[p, j] * R^-1[j, p] with R the right-eigenvector
    matrix, and the response residue is i*gamma_ex times that.
    """
    h = build_effective_hamiltonian(model)
    if isinstance(model, DimerParams):
        p, ge = 0, model.gamma_ex
    else:
        p, ge = model.port_site - 1, model.gamma_ex
    lam, r = np.linalg.eig(h)
    rinv = np.linalg.inv(r)
    pairs = [
        (complex(lam[j]), complex(1j * ge * r[p, j] * rinv[j, p]))
        for j in range(len(lam))
    ]
    pairs.sort(key=lambda t: (-t[0].imag, t[0].real))
    return pairs


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def uhp_threshold(params: DimerParams) -> bool:
    """True iff the upper pole lies strictly in the upper half-plane.

    SP: gamma (gamma + gamma_ex/2) > kappa^2.
    SYM: gamma > kappa and gamma_ex < 2 sqrt(gamma^2 - kappa^2).
    """
    g, k, ge = params.gamma, params.kappa, params.gamma_ex
    if params.convention == SP:
        return bool(g * (g + ge / 2) > k * k)
    return bool(g > k and ge < 2 * np.sqrt(g * g - k * k))


def critical_gamma(gamma_ex: float, kappa: float = 1.0, convention: str = SP) -> float:
    """Gain-loss rate at which the upper pole crosses the real axis."""
    if convention == SP:
        return (-gamma_ex / 2 + np.sqrt(gamma_ex**2 / 4 + 4 * kappa**2)) / 2
    if convention == SYM:
        return np.sqrt(kappa**2 + gamma_ex**2 / 4)
    raise ValueError(f"convention must be {SP!r} or {SYM!r}")


def im_omega_plus_leading(params: DimerParams) -> float:
    """Leading-order Im of the upper pole above the exceptional point.

    SP: sqrt(g^2 - k^2) - ge/4  (an approximation; the exact root differs
    at higher order in ge).  SYM: sqrt(g^2 - k^2) - ge/2, which is exact.
    """
    g, k, ge = params.gamma, params.kappa, params.gamma_ex
    if g <= k:
        raise ValueError("leading-order formula requires gamma > kappa")
    root = np.sqrt(g * g - k * k)
    return root - ge / 4 if params.convention == SP else root - ge / 2
