import math

import numpy as np
import pytest

from wsim.dynamics import (
    CorruptedStateError,
    DensityMatrix,
    check_state,
    evolve,
    fidelity,
    liouvillian_supermatrix,
    oracle_propagate,
    resimulate,
)
from wsim.linalg import ModeLayout
from wsim.model import (
    FRAME_LAB,
    FRAME_ROTATING,
    PulseSpec,
    SystemConfig,
    build_channels,
    build_hamiltonian,
    liouvillian_apply,
    number_operator,
)
from wsim.spectral import dark_bright_states, target_dark_state

LAYOUT = ModeLayout.for_n_max(2)


def make_config(eta=(2, -1, -1), tau=1.0, rabi=0.0, t0=math.inf, omega=500.0, **kwargs):
    return SystemConfig(
        eta_sigma=eta[0], eta_a=eta[1], eta_b=eta[2],
        drive=PulseSpec(omega_d=omega, rabi=rabi, t0=t0),
        tau=tau, omega_sigma=omega, omega_a=omega, omega_b=omega, **kwargs,
    )


def mixed_state(p, a, b):
    return p * np.outer(a, a.conj()) + (1 - p) * np.outer(b, b.conj())


class TestCheckState:
    def test_vacuum(self):
        diag = check_state(DensityMatrix.vacuum(LAYOUT))
        assert diag.trace_error == pytest.approx(0.0, abs=1e-15)
        assert diag.min_eigenvalue == pytest.approx(0.0, abs=1e-15)
        assert diag.purity == pytest.approx(1.0)

    def test_maximally_mixed(self):
        diag = check_state(np.eye(18, dtype=complex) / 18)
        assert diag.purity == pytest.approx(1 / 18)

    def test_even_mixture(self):
        d = target_dark_state(make_config()).state
        rho = mixed_state(0.5, d, LAYOUT.basis_state(0, 0, 0))
        assert check_state(rho).purity == pytest.approx(0.5)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        m = np.eye(18, dtype=complex) / 18
        m[0, 1] = 0.5
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(m, LAYOUT)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(18, dtype=complex), LAYOUT)

    def test_rejects_negative_eigenvalue(self):
        m = np.zeros((18, 18), dtype=complex)
        m[0, 0], m[1, 1] = 1.5, -0.5
        with pytest.raises(ValueError, match="eigenvalue"):
            DensityMatrix(m, LAYOUT)

    def test_pure_normalizes(self):
        dm = DensityMatrix.pure(2.0 * LAYOUT.basis_state(1, 0, 0), LAYOUT)
        assert np.trace(dm.matrix) == pytest.approx(1.0)


class TestFidelity:
    def test_pure_target(self):
        d = target_dark_state(make_config()).state
        assert fidelity(np.outer(d, d.conj()), d) == pytest.approx(1.0)

    def test_orthogonal_mixture(self):
        d = target_dark_state(make_config()).state
        rho = mixed_state(0.3, d, LAYOUT.basis_state(0, 0, 0))
        assert fidelity(rho, d) == pytest.approx(0.3)

    def test_vacuum_against_w_state(self):
        d = target_dark_state(make_config()).state
        assert fidelity(DensityMatrix.vacuum(LAYOUT), d) == pytest.approx(0.0, abs=1e-15)

    def test_corrupted_state_raises(self):
        d = target_dark_state(make_config()).state
        rho = np.outer(d, d.conj()) + 1e-6j * np.eye(18)
        with pytest.raises(CorruptedStateError):
            fidelity(rho, d)


class TestEvolve:
    def test_vacuum_is_stationary(self):
        cfg = make_config()
        target = target_dark_state(cfg).state
        traj = evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, np.linspace(0, 5, 20))
        assert np.max(np.abs(traj.fidelity)) < 1e-12
        assert np.max(np.abs(traj.p_g00 - 1)) < 1e-12

    def test_dark_state_is_stationary(self):
        cfg = make_config(eta=(1, 1, 1))
        dec = dark_bright_states(cfg)
        traj = evolve(DensityMatrix.pure(dec.d1, LAYOUT), cfg, dec.d1,
                      np.linspace(0, 5, 50))
        assert np.max(np.abs(traj.fidelity - 1)) < 1e-7

    def test_bright_state_decay_matches_analytic(self):
        # amplitude decays at 3*tau for unit weights, so fidelity goes as
        # exp(-6 tau t); spot value exp(-3) = 0.0498 at tau t = 0.5
        cfg = make_config(eta=(1, 1, 1))
        dec = dark_bright_states(cfg)
        grid = np.linspace(0, 0.5, 26)
        traj = evolve(DensityMatrix.pure(dec.bright, LAYOUT), cfg, dec.bright, grid)
        assert np.max(np.abs(traj.fidelity - np.exp(-6 * grid))) < 1e-6
        assert traj.fidelity[-1] == pytest.approx(0.049787, abs=1e-5)

    def test_single_channel_population_decay(self):
        cfg = make_config(eta=(1, 0, 0))
        e00 = LAYOUT.basis_state(1, 0, 0)
        grid = np.linspace(0, 2, 21)
        traj = evolve(DensityMatrix.pure(e00, LAYOUT), cfg, e00, grid)
        assert np.max(np.abs(traj.p_e00 - np.exp(-2 * grid))) < 1e-7

    def test_grid_must_start_at_zero(self):
        cfg = make_config()
        with pytest.raises(ValueError, match="start at 0"):
            evolve(DensityMatrix.vacuum(LAYOUT), cfg, LAYOUT.basis_state(0, 0, 0),
                   np.array([1.0, 2.0]))

    def test_pulse_edge_lands_between_samples(self):
        # t0 = 3.3 falls between grid points; once the residual bright and
        # two-excitation transients have decayed (rates ~ 12 tau) the
        # lossless fidelity must freeze
        cfg = make_config(rabi=0.05, t0=3.3)
        target = target_dark_state(cfg).state
        traj = evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, np.linspace(0, 40, 81))
        after = traj.fidelity[traj.times >= 10.0]
        assert np.max(after) - np.min(after) < 1e-9
        assert after[0] > 0.005  # the pulse did transfer population

    def test_step_halving_convergence(self):
        cfg = make_config(rabi=0.05)
        target = target_dark_state(cfg).state
        grid = np.linspace(0, 20, 11)
        runs = [
            evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, grid, max_step=h)
            for h in (0.1, 0.05)
        ]
        assert abs(runs[0].fidelity[-1] - runs[1].fidelity[-1]) < 1e-9

    def test_frame_equivalence_of_fidelity(self):
        # the target is an excitation-number eigenstate, so its fidelity is
        # frame independent even though state vectors are not
        cfg = make_config(rabi=0.05, omega=50.0, rtol=1e-10, atol=1e-12)
        target = target_dark_state(cfg).state
        grid = np.linspace(0, 2, 21)
        rot = evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, grid, FRAME_ROTATING)
        lab = evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, grid, FRAME_LAB)
        assert np.max(np.abs(rot.fidelity - lab.fidelity)) < 1e-7

    def test_excitation_monotone_without_drive(self):
        cfg = make_config(eta=(2, -1, -1), gamma_b=0.05)
        n_op = number_operator(LAYOUT)
        e00 = LAYOUT.basis_state(1, 0, 0)
        traj = evolve(DensityMatrix.pure(e00, LAYOUT), cfg, e00,
                      np.linspace(0, 3, 40), store_states=True)
        occupations = [np.trace(n_op @ s).real for s in traj.states]
        diffs = np.diff(occupations)
        assert np.all(diffs <= 1e-9)

    def test_resimulate_matches(self):
        cfg = make_config(rabi=0.02)
        target = target_dark_state(cfg).state
        traj = evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, np.linspace(0, 30, 31))
        again = resimulate(traj.source, np.linspace(0, 30, 31))
        assert np.allclose(traj.fidelity, again.fidelity, atol=1e-12)


class TestSupermatrix:
    def test_matches_direct_application(self):
        rng = np.random.default_rng(5)
        cfg = make_config(eta=(1.2, -0.7 + 0.3j, 0.5), gamma_sigma=0.02,
                          gamma_b=0.06, gamma_phi=0.03, rabi=0.04)
        h = build_hamiltonian(cfg, FRAME_ROTATING, 0.0)
        channels = build_channels(cfg)
        lsup = liouvillian_supermatrix(h, channels)
        m = rng.normal(size=(18, 18)) + 1j * rng.normal(size=(18, 18))
        rho = 0.5 * (m + m.conj().T)
        direct = liouvillian_apply(rho, h, channels)
        via_vec = (lsup @ rho.reshape(-1, order="F")).reshape(18, 18, order="F")
        assert np.max(np.abs(direct - via_vec)) < 1e-12


class TestOracle:
    def test_zero_time_is_identity(self):
        cfg = make_config(rabi=0.01)
        dm = DensityMatrix.vacuum(LAYOUT)
        out = oracle_propagate(dm, cfg, 0.0)
        assert np.allclose(out.matrix, dm.matrix)

    def test_vacuum_stationary_without_drive(self):
        cfg = make_config()
        out = oracle_propagate(DensityMatrix.vacuum(LAYOUT), cfg, 7.3)
        assert np.allclose(out.matrix, DensityMatrix.vacuum(LAYOUT).matrix, atol=1e-12)

    def test_agrees_with_integrator_across_pulse_edge(self):
        cfg = make_config(rabi=0.06, t0=4.0, gamma_b=0.02, rtol=1e-10, atol=1e-12)
        target = target_dark_state(cfg).state
        grid = np.array([0.0, 2.0, 4.0, 9.0])
        traj = evolve(DensityMatrix.vacuum(LAYOUT), cfg, target, grid, store_states=True)
        for t, rho in zip(grid[1:], traj.states[1:]):
            ref = oracle_propagate(DensityMatrix.vacuum(LAYOUT), cfg, t)
            assert np.linalg.norm(rho - ref.matrix) < 1e-8

    def test_refuses_lab_frame(self):
        with pytest.raises(ValueError, match="rotating"):
            oracle_propagate(DensityMatrix.vacuum(LAYOUT), make_config(), 1.0, FRAME_LAB)

    def test_refuses_large_truncation(self):
        cfg = make_config(n_max=5)
        layout = cfg.layout
        with pytest.raises(ValueError, match="refuses"):
            oracle_propagate(DensityMatrix.vacuum(layout), cfg, 1.0)
