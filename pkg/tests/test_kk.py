import numpy as np
import pytest

from ptkk import (
    SP,
    SYM,
    BoundaryPoleError,
    CSVFormatError,
    DimerParams,
    FrequencyGrid,
    PoleData,
    RationalResponse,
    corrected_kk,
    critical_gamma,
    hilbert_transform,
    kk_residual_report,
    read_spectrum_csv,
    remove_offset,
    residue_correction,
    residue_correction_imag,
    reflection_response,
    sample_response,
    standard_kk,
    uhp_pole_data,
    uhp_threshold,
)

REF = DimerParams(gamma=1.5, kappa=1.0, gamma_ex=0.1, convention=SP)

# cheap grid for the randomized sweeps; same spacing-to-feature ratio story
# as the production default, ~25x faster
SMALL = FrequencyGrid(5.0, 1001)


# ---------------------------------------------------------------------------
# grid plumbing
# ---------------------------------------------------------------------------

def test_grid_validation():
    with pytest.raises(ValueError):
        FrequencyGrid(5.0, 4000)  # even
    with pytest.raises(ValueError):
        FrequencyGrid(-1.0, 11)
    g = FrequencyGrid(5.0, 4001)
    assert g.spacing == pytest.approx(0.0025)
    assert g.omegas[2000] == 0.0


def test_padded_grid_alignment():
    g = FrequencyGrid(5.0, 401)
    p = g.padded(4)
    assert p.half_width == 20.0 and p.n_points == 1601
    sel = p.window_slice(5.0)
    np.testing.assert_allclose(p.omegas[sel], g.omegas, atol=1e-12)


def test_window_slice_rejects_misaligned():
    with pytest.raises(ValueError):
        FrequencyGrid(5.0, 401).window_slice(5.1)
    with pytest.raises(ValueError):
        FrequencyGrid(5.0, 401).window_slice(2.3456)


# ---------------------------------------------------------------------------
# hilbert transform
# ---------------------------------------------------------------------------

def test_hilbert_zero_is_zero():
    g = FrequencyGrid(5.0, 101)
    np.testing.assert_array_equal(hilbert_transform(np.zeros(101), g), np.zeros(101))


def test_hilbert_rejects_complex_and_mismatch():
    g = FrequencyGrid(5.0, 101)
    with pytest.raises(TypeError):
        hilbert_transform(np.zeros(101, dtype=complex), g)
    with pytest.raises(ValueError):
        hilbert_transform(np.zeros(100), g)


def test_hilbert_of_causal_lorentzian():
    # 1/(w - (1 - i/2)) has its pole in the LHP: Re and Im are a Hilbert pair
    g = FrequencyGrid(40.0, 16001)
    w = g.omegas
    vals = 1.0 / (w - (1 - 0.5j))
    h = hilbert_transform(vals.imag, g)
    i2 = np.argmin(np.abs(w - 2.0))
    assert h[i2] == pytest.approx(0.8, abs=5e-4)
    np.testing.assert_allclose(h, vals.real, atol=2e-3)


def test_hilbert_of_acausal_lorentzian():
    # UHP pole: the transform returns the sign-flipped Lorentzian
    g = FrequencyGrid(40.0, 16001)
    w = g.omegas
    vals = 1.0 / (w - (1 + 0.5j))
    h = hilbert_transform(vals.imag, g)
    i2 = np.argmin(np.abs(w - 2.0))
    assert h[i2] == pytest.approx(-0.8, abs=5e-4)


def test_hilbert_involution():
    g = FrequencyGrid(40.0, 16001)
    w = g.omegas
    f = w * np.exp(-(w**2))  # smooth, zero-mean, window-supported
    hh = hilbert_transform(hilbert_transform(f, g), g)
    err = np.linalg.norm(hh + f) / np.linalg.norm(f)
    assert err < 0.01


# ---------------------------------------------------------------------------
# standard and corrected reconstruction
# ---------------------------------------------------------------------------

def test_standard_kk_requires_offset_removed():
    samples = sample_response(reflection_response(REF), SMALL, remove_offset=False)
    with pytest.raises(ValueError, match="offset"):
        standard_kk(samples)


def test_causal_point_sits_at_floor():
    hermitian = reflection_response(DimerParams(gamma=0.0, kappa=1.0, gamma_ex=0.1))
    floor = kk_residual_report(hermitian, grid=SMALL, pad_factor=8).l2_standard
    causal = reflection_response(DimerParams(gamma=0.5, kappa=1.0, gamma_ex=0.1))
    res = kk_residual_report(causal, grid=SMALL, pad_factor=8)
    assert res.l2_standard <= 5.0 * floor
    assert res.reduction_factor == pytest.approx(1.0)
    np.testing.assert_array_equal(res.correction, np.zeros_like(res.correction))


def test_causal_floor_100_random_points():
    rng = np.random.default_rng(101)
    baselines = {}
    count = 0
    while count < 100:
        g = rng.uniform(0.0, 1.2)
        ge = rng.uniform(0.02, 0.3)
        conv = SP if rng.random() < 0.5 else SYM
        m = DimerParams(gamma=g, kappa=1.0, gamma_ex=ge, convention=conv)
        if uhp_threshold(m):
            continue
        top = reflection_response(m).pole_locations().imag.max()
        if top > -0.05:
            continue  # stay off the threshold band where features out-resolve the grid
        key = round(ge, 12)
        if key not in baselines:
            herm = reflection_response(DimerParams(gamma=0.0, kappa=1.0, gamma_ex=ge))
            baselines[key] = kk_residual_report(herm, grid=SMALL, pad_factor=8).l2_standard
        res = kk_residual_report(reflection_response(m), grid=SMALL, pad_factor=8)
        assert res.l2_standard <= 5.0 * baselines[key], (conv, g, ge)
        count += 1


def test_broken_point_residual_is_lorentzian_shaped():
    res = kk_residual_report(reflection_response(REF))
    w = res.grid.omegas
    peak = w[np.argmax(np.abs(res.standard_residual))]
    assert abs(peak) < 0.05  # bump centered at Re z+ = 0
    expected = residue_correction(uhp_pole_data(reflection_response(REF)), res.grid)
    np.testing.assert_allclose(res.standard_residual, expected, atol=6e-3)


def test_reference_reduction_factor():
    res = kk_residual_report(reflection_response(REF))
    assert 17.0 <= res.reduction_factor <= 26.0
    assert res.l2_corrected == pytest.approx(res.l2_standard / res.reduction_factor)
    np.testing.assert_allclose(
        res.corrected_residual, res.standard_residual - res.correction, atol=1e-15
    )


def test_grid_refinement_stability():
    a = kk_residual_report(reflection_response(REF), grid=FrequencyGrid(5.0, 2001))
    b = kk_residual_report(reflection_response(REF), grid=FrequencyGrid(5.0, 4001))
    assert abs(b.l2_standard - a.l2_standard) / a.l2_standard < 0.01


def test_corrected_identity_100_random_broken_points():
    # the corrected residual is window-truncation-limited; deep in the
    # broken phase the Lorentzian signal shrinks like 1/gamma, so the pad
    # factor must keep the floor well below it across the whole draw range
    rng = np.random.default_rng(33)
    count = 0
    while count < 100:
        conv = SP if rng.random() < 0.5 else SYM
        ge = rng.uniform(0.02, 0.3)
        gc = critical_gamma(ge, convention=conv)
        g = rng.uniform(gc + 0.04, 1.8)
        m = DimerParams(gamma=g, kappa=1.0, gamma_ex=ge, convention=conv)
        if not uhp_threshold(m):
            continue
        res = kk_residual_report(reflection_response(m), grid=SMALL, pad_factor=32)
        assert res.reduction_factor >= 15.0, (conv, g, ge, res.reduction_factor)
        count += 1


def test_imag_relation_dual_reduction():
    # Im r reconstruction from -H[Re r] plus its own correction
    rng = np.random.default_rng(55)
    padded = SMALL.padded(32)
    for _ in range(10):
        conv = SP if rng.random() < 0.5 else SYM
        ge = rng.uniform(0.02, 0.3)
        gc = critical_gamma(ge, convention=conv)
        m = DimerParams(gamma=rng.uniform(gc + 0.04, 1.6), kappa=1.0, gamma_ex=ge, convention=conv)
        resp = reflection_response(m)
        samples = sample_response(resp, padded)
        h_re = hilbert_transform(samples.values.real, padded)
        delta = samples.values.imag + h_re
        sel = padded.window_slice(SMALL.half_width)
        corr = residue_correction_imag(uhp_pole_data(resp), padded)
        l2s = np.sqrt(np.sum(delta[sel] ** 2) * padded.spacing)
        l2c = np.sqrt(np.sum((delta - corr)[sel] ** 2) * padded.spacing)
        assert l2s / l2c >= 15.0, (conv, m.gamma, ge)


# ---------------------------------------------------------------------------
# residue corrections
# ---------------------------------------------------------------------------

def test_correction_value_at_two():
    grid = FrequencyGrid(4.0, 5)  # omega = -4,-2,0,2,4
    pole = PoleData(location=1 + 0.5j, residue=1.0 + 0j, in_uhp=True)
    corr = residue_correction([pole], grid)
    assert corr[3] == pytest.approx(1.6)
    corr_im = residue_correction_imag([pole], grid)
    assert corr_im[3] == pytest.approx(0.8)


def test_correction_empty_pole_set():
    np.testing.assert_array_equal(residue_correction([], SMALL), np.zeros(SMALL.n_points))


def test_correction_reference_point_at_zero():
    ps = uhp_pole_data(reflection_response(REF))
    corr = residue_correction(ps, SMALL)
    i0 = SMALL.n_points // 2
    assert corr[i0] == pytest.approx(0.028812, abs=2e-5)


def test_correction_rejects_boundary_pole():
    with pytest.raises(BoundaryPoleError):
        residue_correction([PoleData(location=1.0 + 0j, residue=1.0, in_uhp=False)], SMALL)


def test_sm_counterexample_reconstruction():
    resp = RationalResponse([1.0], [-(1 + 0.5j), 1.0])
    grid = FrequencyGrid(40.0, 16001)
    samples = sample_response(resp, grid)
    res = corrected_kk(samples, uhp_pole_data(resp))
    i2 = np.argmin(np.abs(grid.omegas - 2.0))
    direct = resp(2.0)
    assert direct.real == pytest.approx(0.8)
    # standard reconstruction lands on the sign-flipped value
    assert res.hilbert_of_imag[i2] == pytest.approx(-0.8, abs=5e-4)
    assert res.standard_residual[i2] == pytest.approx(1.6, abs=1e-3)
    # adding the real-part correction recovers the true value
    corrected = res.hilbert_of_imag[i2] + res.correction[i2]
    assert corrected == pytest.approx(0.8, abs=5e-4)
    assert res.corrected_residual[i2] == pytest.approx(0.0, abs=1e-3)


# ---------------------------------------------------------------------------
# measured-spectrum CSV interface
# ---------------------------------------------------------------------------

def _write_csv(tmp_path, text, name="measured.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_csv_roundtrip(tmp_path):
    grid = FrequencyGrid(2.0, 5)
    w = grid.omegas
    vals = 1.0 / (w - (0.5 - 0.25j))
    lines = ["omega,re,im"] + [
        f"{x:.17g},{v.real:.17g},{v.imag:.17g}" for x, v in zip(w, vals)
    ]
    p = _write_csv(tmp_path, "\n".join(lines) + "\n")
    samples = read_spectrum_csv(p)
    assert samples.grid.n_points == 5
    assert samples.grid.half_width == pytest.approx(2.0)
    assert not samples.offset_removed
    np.testing.assert_allclose(samples.values, vals, rtol=1e-15)
    shifted = remove_offset(samples, 0.0 + 0j)
    assert shifted.offset_removed


@pytest.mark.parametrize(
    "text,match",
    [
        ("", "empty file"),
        ("a,b,c\n1,2,3\n", "header must name"),
        ("omega,re,im\n0,1\n", "expected 3 fields"),
        ("omega,re,im\n0,x,1\n", "non-numeric"),
        ("omega,re,im\n-1,0,0\n1,0,0\n", "at least 3"),
        ("omega,re,im\n-1,0,0\n-2,0,0\n1,0,0\n", "ascending"),
        ("omega,re,im\n-1,0,0\n0.5,0,0\n1,0,0\n", "not uniform"),
        ("omega,re,im\n-1,0,0\n-0.5,0,0\n0,0,0\n0.5,0,0\n", "odd number"),
        ("omega,re,im\n-1,0,0\n-0.5,0,0\n0,0,0\n", "symmetric"),
    ],
)
def test_csv_rejections_have_distinct_messages(tmp_path, text, match):
    p = _write_csv(tmp_path, text)
    with pytest.raises(CSVFormatError, match=match):
        read_spectrum_csv(p)
