"""Principal-value Hilbert transform and residue-corrected dispersion checks.

For a causal (UHP-analytic) response the real and imaginary parts are a
Hilbert-transform pair.  When poles sit in the upper half-plane the
standard reconstruction fails by an explicit sum of Lorentzians,

    Re R(w) = H[Im R](w) + 2 sum_j Re[rho_j / (w - z_j)],
    Im R(w) = -H[Re R](w) + 2 sum_j Im[rho_j / (w - z_j)],

with one term per UHP pole.  This module samples rational responses on
uniform frequency grids, evaluates the transform by a deterministic
O(N^2) trapezoid kernel (see _kernels), forms the standard and corrected
residuals, and reads externally measured spectra from CSV.

Windowing: the dispersion integral runs over the whole real line, while
Im(r - 1) of a port-coupled resonator decays only like 1/w.  Norms are
therefore reported on a window of interest while the transform itself is
evaluated on a wider padded grid of the same spacing (``pad_factor``);
the default factor 20 pushes the truncation floor two orders of magnitude
below the window-local one.  Externally measured data cannot be padded,
so its floor is set by the measurement band.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._kernels import pv_hilbert
from .response import (
    BOUNDARY_TOL,
    BoundaryPoleError,
    PoleData,
    RationalResponse,
    residues,
)

DEFAULT_PAD_FACTOR = 20


class CSVFormatError(ValueError):
    """Malformed externally supplied spectrum file."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid symmetric about w = 0 with an odd point count."""

    half_width: float
    n_points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be > 0")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be odd and >= 3 (so w=0 is a point)")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.n_points - 1)

    @property
    def omegas(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    def padded(self, factor: int) -> "FrequencyGrid":
        """Wider grid with identical spacing containing this one."""
        if factor < 1 or factor != int(factor):
            raise ValueError("pad factor must be a positive integer")
        factor = int(factor)
        return FrequencyGrid(self.half_width * factor, (self.n_points - 1) * factor + 1)

    def window_slice(self, half_width: float) -> slice:
        """Slice selecting the central sub-window of the given half-width."""
        if half_width > self.half_width + 1e-12:
            raise ValueError("requested window exceeds the grid")
        k = (self.half_width - half_width) / self.spacing
        ki = int(round(k))
        if abs(k - ki) > 1e-6:
            raise ValueError("window edge does not align with the grid")
        return slice(ki, self.n_points - ki)


DEFAULT_GRID = FrequencyGrid(5.0, 4001)


@dataclass
class SampledResponse:
    """Complex response samples on a grid; offset_removed means the
    high-frequency limit has been subtracted so the data decays."""

    grid: FrequencyGrid
    values: np.ndarray
    offset_removed: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError("sample count does not match the grid")


def sample_response(
    response: RationalResponse, grid: FrequencyGrid, remove_offset: bool = True
) -> SampledResponse:
    """Sample a rational response on a grid (offset subtracted by default)."""
    w = grid.omegas
    vals = response.resolvent(w) if remove_offset else response(w)
    return SampledResponse(grid=grid, values=vals, offset_removed=remove_offset)


def hilbert_transform(values, grid: FrequencyGrid) -> np.ndarray:
    """(1/pi) PV integral of values(w')/(w' - w) over the grid window.

    Trapezoid quadrature with the singular point excluded and a local
    centered-difference correction for the +-dw cell (see
    _kernels.pv_hilbert).  The grid must be uniform, which FrequencyGrid
    guarantees; data on an irregular grid must be resampled first.
    """
    values = np.asarray(values)
    if np.iscomplexobj(values):
        raise TypeError("hilbert_transform expects a real sequence")
    if values.shape != (grid.n_points,):
        raise ValueError("sample count does not match the grid")
    return pv_hilbert(values)


@dataclass
class KKResult:
    """Standard and residue-corrected dispersion residuals on a grid.

    ``standard_residual`` is Re(data) minus the Hilbert reconstruction;
    ``corrected_residual`` subtracts the UHP-pole correction pointwise.
    Norms are spacing-weighted: ||x|| = sqrt(sum x^2 dw).  Fields after
    ``l2_standard`` are None when no correction was requested.
    """

    grid: FrequencyGrid
    hilbert_of_imag: np.ndarray
    standard_residual: np.ndarray
    l2_standard: float
    correction: np.ndarray | None = None
    corrected_residual: np.ndarray | None = None
    l2_corrected: float | None = None
    reduction_factor: float | None = None


def _l2(x: np.ndarray, spacing: float) -> float:
    return float(np.sqrt(np.sum(x * x) * spacing))


def _norm_window(samples: SampledResponse, norm_half_width: float | None):
    if norm_half_width is None:
        sel = slice(None)
        grid = samples.grid
    else:
        sel = samples.grid.window_slice(norm_half_width)
        n = sel.stop - sel.start
        grid = FrequencyGrid(norm_half_width, n)
    return sel, grid


def standard_kk(
    samples: SampledResponse, norm_half_width: float | None = None
) -> KKResult:
    """Residual of the standard real-part dispersion relation.

    The data must have its high-frequency offset removed (the integral
    needs decay).  With ``norm_half_width`` the residual and norms are
    restricted to the central sub-window while the transform still uses
    every sample, which is how padded evaluation grids are consumed.
    """
    if not samples.offset_removed:
        raise ValueError("subtract the high-frequency offset before applying KK")
    h = hilbert_transform(samples.values.imag, samples.grid)
    delta = samples.values.real - h
    sel, grid = _norm_window(samples, norm_half_width)
    return KKResult(
        grid=grid,
        hilbert_of_imag=h[sel],
        standard_residual=delta[sel],
        l2_standard=_l2(delta[sel], grid.spacing),
    )


def _check_uhp(uhp_poles) -> list[PoleData]:
    out = []
    for p in uhp_poles:
        if not isinstance(p, PoleData):
            raise TypeError("residue corrections need PoleData (location + residue)")
        if p.location.imag <= BOUNDARY_TOL:
            raise BoundaryPoleError(
                f"pole {p.location} is not strictly in the upper half-plane"
            )
        if p.residue is None:
            raise ValueError(f"pole {p.location} carries no residue (degenerate?)")
        out.append(p)
    return out


def residue_correction(uhp_poles, grid: FrequencyGrid) -> np.ndarray:
    """Real-part correction 2 sum_j Re[rho_j / (w - z_j)] on the grid."""
    ps = _check_uhp(uhp_poles)
    w = grid.omegas
    out = np.zeros(grid.n_points)
    for p in ps:
        out += 2.0 * (p.residue / (w - p.location)).real
    return out


def residue_correction_imag(uhp_poles, grid: FrequencyGrid) -> np.ndarray:
    """Imag-part correction 2 sum_j Im[rho_j / (w - z_j)] on the grid."""
    ps = _check_uhp(uhp_poles)
    w = grid.omegas
    out = np.zeros(grid.n_points)
    for p in ps:
        out += 2.0 * (p.residue / (w - p.location)).imag
    return out


def corrected_kk(
    samples: SampledResponse,
    uhp_poles,
    norm_half_width: float | None = None,
) -> KKResult:
    """Standard residual minus the UHP-pole correction, with both norms.

    ``reduction_factor`` is l2_standard / l2_corrected; it is 1 for a
    causal response (empty pole set, zero correction).
    """
    res = standard_kk(samples, norm_half_width)
    corr = residue_correction(uhp_poles, res.grid) if uhp_poles else np.zeros(
        res.grid.n_points
    )
    corrected = res.standard_residual - corr
    l2c = _l2(corrected, res.grid.spacing)
    res.correction = corr
    res.corrected_residual = corrected
    res.l2_corrected = l2c
    res.reduction_factor = res.l2_standard / l2c if l2c > 0 else np.inf
    return res


def uhp_pole_data(response: RationalResponse) -> list[PoleData]:
    """UHP poles of a rational response with residues attached."""
    locs = response.pole_locations()
    uhp = [complex(z) for z in locs if z.imag > BOUNDARY_TOL]
    rhos = residues(response, uhp)
    return [PoleData(location=z, residue=r, in_uhp=True) for z, r in zip(uhp, rhos)]


def kk_residual_report(
    response: RationalResponse,
    grid: FrequencyGrid = DEFAULT_GRID,
    pad_factor: int = DEFAULT_PAD_FACTOR,
) -> KKResult:
    """Full dispersion check of a model response on a padded grid.

    Samples the offset-removed response on ``grid.padded(pad_factor)``,
    runs the corrected reconstruction, and reports residuals and norms on
    the original window.
    """
    samples = sample_response(response, grid.padded(pad_factor))
    return corrected_kk(samples, uhp_pole_data(response), norm_half_width=grid.half_width)


# ---------------------------------------------------------------------------
# external spectra
# ---------------------------------------------------------------------------

_CSV_COLUMNS = ("omega", "re", "im")


def read_spectrum_csv(path) -> SampledResponse:
    """Read a measured spectrum: CSV with header columns omega, re, im.

    Comma separated, decimal point, UTF-8.  The frequency column must be
    a uniform ascending grid, symmetric about zero, with an odd number of
    rows.  Returns raw (offset-not-removed) complex samples.

    Raises CSVFormatError with a distinct message for each violation.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError(f"{path}: empty file, expected a header row")
        names = [h.strip().lower() for h in header]
        if not set(_CSV_COLUMNS).issubset(names):
            raise CSVFormatError(
                f"{path}: header must name columns {', '.join(_CSV_COLUMNS)} "
                f"(got {', '.join(names)})"
            )
        idx = [names.index(c) for c in _CSV_COLUMNS]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(names):
                raise CSVFormatError(f"{path}:{lineno}: expected {len(names)} fields")
            try:
                rows.append(tuple(float(row[i]) for i in idx))
            except ValueError:
                raise CSVFormatError(f"{path}:{lineno}: non-numeric value")
    if len(rows) < 3:
        raise CSVFormatError(f"{path}: need at least 3 data rows")

    data = np.asarray(rows)
    omega = data[:, 0]
    steps = np.diff(omega)
    if np.any(steps <= 0):
        raise CSVFormatError(f"{path}: omega column must be strictly ascending")
    mean_step = steps.mean()
    if np.abs(steps - mean_step).max() > 1e-6 * mean_step:
        raise CSVFormatError(f"{path}: omega grid is not uniform")
    if len(omega) % 2 == 0:
        raise CSVFormatError(f"{path}: need an odd number of rows (w=0 on the grid)")
    if abs(omega[0] + omega[-1]) > 1e-9 * max(1.0, abs(omega[-1])):
        raise CSVFormatError(f"{path}: omega grid is not symmetric about zero")

    grid = FrequencyGrid(half_width=float(omega[-1]), n_points=len(omega))
    return SampledResponse(
        grid=grid, values=data[:, 1] + 1j * data[:, 2], offset_removed=False
    )


def remove_offset(samples: SampledResponse, offset: complex) -> SampledResponse:
    """Subtract a known high-frequency offset from raw samples."""
    if samples.offset_removed:
        raise ValueError("offset already removed")
    return SampledResponse(
        grid=samples.grid, values=samples.values - offset, offset_removed=True
    )
