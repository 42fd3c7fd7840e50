import numpy as np
import pytest

from ptkk import (
    SP,
    SYM,
    DimerParams,
    FitRefusedError,
    FrequencyGrid,
    PeakNotDetectableError,
    chain_critical_gamma,
    critical_gamma,
    fit_power_law,
    fit_uhp_pole,
    phase_diagram,
    pole_trajectory,
    reflection_response,
    scaling_experiment,
    ssh_chain,
    ssh_experiment,
    uhp_threshold,
)

SMALL = FrequencyGrid(5.0, 1001)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

def test_trajectory_crossing_examples():
    traj = pole_trajectory(SP, 0.1, (0.0, 2.0), n_steps=401)
    assert traj.crossing_gamma == pytest.approx(0.97531, abs=5e-3)

    traj = pole_trajectory(SP, 0.0, (0.0, 2.0), n_steps=401)
    assert traj.crossing_gamma == pytest.approx(1.0, abs=5e-3)

    traj = pole_trajectory(SYM, 0.1, (0.0, 2.0), n_steps=401)
    assert traj.crossing_gamma == pytest.approx(1.00125, abs=5e-3)


def test_trajectory_paths_are_continuous():
    traj = pole_trajectory(SP, 0.1, (0.0, 2.0), n_steps=801)
    jumps = np.abs(np.diff(traj.paths, axis=0)).max()
    assert jumps < 0.15  # no label swaps mid-sweep


def test_trajectory_crossing_matches_threshold_random():
    rng = np.random.default_rng(9)
    for _ in range(20):
        conv = SP if rng.random() < 0.5 else SYM
        ge = rng.uniform(0.01, 0.5)
        n_steps = 1001
        traj = pole_trajectory(conv, ge, (0.0, 2.0), n_steps=n_steps)
        gc = critical_gamma(ge, convention=conv)
        resolution = 2.0 / (n_steps - 1)
        assert traj.crossing_gamma == pytest.approx(gc, abs=2 * resolution), (conv, ge)


def test_trajectory_rejects_single_step():
    with pytest.raises(ValueError):
        pole_trajectory(SP, 0.1, (0.0, 2.0), n_steps=1)


# ---------------------------------------------------------------------------
# phase diagram
# ---------------------------------------------------------------------------

def test_phase_map_reference_cells():
    gammas = np.array([0.5, 1.2, 1.5])
    gamma_exs = np.array([0.1, 2.0])
    sp = phase_diagram(SP, gammas, gamma_exs, check_fraction=0.5)
    assert sp.winding[2, 0] == 1  # broken reference
    assert sp.winding[0, 0] == 0  # causal
    sym = phase_diagram(SYM, gammas, gamma_exs, check_fraction=0.5)
    assert sym.winding[1, 0] == 1
    assert sym.winding[1, 1] == 0  # overdamped re-entrant


def test_phase_map_boundary_flagging():
    ge = 0.1
    gc = critical_gamma(ge, convention=SP)
    pmap = phase_diagram(
        SP, np.array([gc + 1e-5, gc + 0.2]), np.array([ge]), check_fraction=0.0
    )
    assert pmap.boundary[0, 0] and not pmap.boundary[1, 0]


def test_phase_map_contour_crosscheck_runs():
    gammas = np.linspace(0.1, 2.0, 8)
    gamma_exs = np.linspace(0.05, 2.5, 8)
    for conv in (SP, SYM):
        pmap = phase_diagram(conv, gammas, gamma_exs, check_fraction=0.25)
        assert set(np.unique(pmap.winding)) <= {0, 1}


# ---------------------------------------------------------------------------
# scaling machinery
# ---------------------------------------------------------------------------

def test_fit_power_law_on_analytic_lorentzian_norms():
    # closed form: || 2 Re[rho/(w - i y)] ||_2 over the real line is
    # |rho| sqrt(2 pi / y); with fixed rho and y = c * delta the log-log
    # slope is exactly -1/2
    deltas = np.geomspace(1e-3, 0.5, 25)
    norms = 0.02 * np.sqrt(2 * np.pi / (1.7 * deltas))
    slope, stderr, r2 = fit_power_law(deltas, norms)
    assert slope == pytest.approx(-0.5, abs=1e-3)
    assert stderr < 1e-6
    assert r2 > 0.999999


def test_fit_power_law_refuses_few_points():
    with pytest.raises(FitRefusedError):
        fit_power_law([0.1, 0.2, 0.3, 0.4], [1, 2, 3, 4])


def test_scaling_rejects_window_below_threshold():
    with pytest.raises(ValueError, match="above the threshold"):
        scaling_experiment(SP, 0.05, window=(0.9, 1.5), grid=SMALL)


def test_scaling_refuses_all_points_in_exclusion_band():
    gc = critical_gamma(0.05, convention=SP)
    with pytest.raises(FitRefusedError):
        scaling_experiment(
            SP, 0.05, window=(gc + 2e-4, gc + 9e-4), n_scan=6, grid=SMALL, pad_factor=4
        )


def test_scaling_quick_scan_behaves():
    fit = scaling_experiment(SP, 0.05, n_scan=9, grid=SMALL, pad_factor=12)
    assert -1.2 < fit.exponent < -0.9
    assert fit.r_squared > 0.99
    assert np.all(np.diff(fit.points[:, 1]) < 0)  # monotonic decay over the window
    assert fit.gamma_c == pytest.approx(0.987578, abs=1e-6)


# ---------------------------------------------------------------------------
# inverse pole fit
# ---------------------------------------------------------------------------

def _lorentzian(w, z0, rho):
    return 2.0 * (rho / (w - z0)).real


def test_fit_pole_roundtrip_reference():
    z0, rho = 1.1264j, -0.0162j
    residual = _lorentzian(SMALL.omegas, z0, rho)
    fit = fit_uhp_pole(residual, SMALL)
    assert fit.converged
    assert abs(fit.location - z0) <= 0.01 * abs(z0)
    assert abs(fit.residue - rho) <= 0.02 * abs(rho)


def test_fit_pole_roundtrip_random():
    # mostly-dispersive phases can fail the 5x-median detectability
    # precondition (their magnitude decays only like 1/w); those draws
    # must raise, the detectable ones must round-trip within 2%
    rng = np.random.default_rng(21)
    grid = FrequencyGrid(20.0, 4001)
    checked = 0
    for _ in range(25):
        z0 = rng.uniform(-2, 2) + 1j * rng.uniform(0.05, 2.0)
        rho = rng.uniform(1e-3, 1.0) * np.exp(2j * np.pi * rng.random())
        residual = _lorentzian(grid.omegas, z0, rho)
        detectable = np.abs(residual).max() > 5.0 * np.median(np.abs(residual))
        if not detectable:
            with pytest.raises(PeakNotDetectableError):
                fit_uhp_pole(residual, grid)
            continue
        fit = fit_uhp_pole(residual, grid)
        assert abs(fit.location - z0) <= 0.02 * abs(z0), (z0, rho)
        assert abs(fit.residue - rho) <= 0.02 * abs(rho), (z0, rho)
        checked += 1
    assert checked >= 15


def test_fit_pole_zero_residual_not_detectable():
    with pytest.raises(PeakNotDetectableError):
        fit_uhp_pole(np.zeros(SMALL.n_points), SMALL)


def test_fit_pole_two_poles_fits_dominant():
    w = SMALL.omegas
    dominant = _lorentzian(w, -1.0 + 0.3j, 0.1j)
    secondary = _lorentzian(w, 3.0 + 0.5j, 0.01j)
    fit = fit_uhp_pole(dominant + secondary, SMALL)
    assert abs(fit.location - (-1.0 + 0.3j)) < 0.05
    rms_secondary = float(np.sqrt(np.mean(secondary**2)))
    assert 0.3 * rms_secondary <= fit.rms_misfit <= 3.0 * rms_secondary


# ---------------------------------------------------------------------------
# chain scans
# ---------------------------------------------------------------------------

def test_chain_critical_gamma_matches_dimer_closed_form():
    def builder(g):
        return ssh_chain(g, gamma_ex=0.05, n_sites=2)

    gc = chain_critical_gamma(builder)
    assert gc == pytest.approx(critical_gamma(0.05, convention=SP), abs=1e-9)


def test_ssh_quick_scan_is_nonmonotonic_with_pole_jumps():
    res = ssh_experiment(n_scan=9, grid=SMALL, pad_factor=12)
    assert res.gamma_c == pytest.approx(0.765, abs=5e-3)
    assert not res.monotonic
    assert res.n_uhp.min() == 1 and res.n_uhp.max() == 2
    assert res.fit is not None and res.fit.r_squared < 0.9


def test_ssh_causal_window_refuses_fit_at_floor():
    res = ssh_experiment(
        window=(0.1, 0.5), n_scan=7, grid=SMALL, pad_factor=8, gamma_ex=0.1
    )
    assert res.fit is None
    assert res.n_uhp.max() == 0
    hermitian = ssh_chain(0.0, gamma_ex=0.1)
    from ptkk import kk_residual_report

    floor = kk_residual_report(
        reflection_response(hermitian), grid=SMALL, pad_factor=8
    ).l2_standard
    assert res.dkk.max() <= 5.0 * floor


def test_dimer_through_chain_pathway_matches_scaling():
    window = (1.02, 1.5)
    direct = scaling_experiment(SP, 0.05, window=window, n_scan=9, grid=SMALL, pad_factor=12)
    via_chain = ssh_experiment(
        gamma_ex=0.05, n_sites=2, window=window, n_scan=9, grid=SMALL, pad_factor=12
    )
    assert via_chain.fit is not None
    assert abs(via_chain.fit.exponent - direct.exponent) < 1e-3


def test_ssh_profile_must_be_pt_symmetric():
    # (-1, 1, 1, -1) is even under site reversal, so it cannot negate
    with pytest.raises(ValueError, match="PT"):
        ssh_experiment(profile=(-1, 1, 1, -1), n_scan=5, grid=SMALL, pad_factor=4)
    # (-1, -1, 1, 1) does negate under reversal and must be accepted
    ssh_chain(0.5, profile=(-1, -1, 1, 1))
