"""Particle flow: volume preservation, Jacobian consistency, displacement
statistics, Lyapunov estimate."""

import numpy as np
import pytest

from batchelor_lab import lagrangian as lg
from batchelor_lab.stepping import noise_increments


class TestEnsembleConstruction:
    def test_random_positions_in_unit_cube(self):
        ens = lg.particle_ensemble(2, 100, rng=np.random.default_rng(0))
        assert ens.positions.shape == (100, 2)
        assert np.all((ens.positions >= 0) & (ens.positions < 1))

    def test_explicit_positions_wrapped(self):
        ens = lg.particle_ensemble(2, 2, positions=np.array([[1.25, -0.5],
                                                             [0.0, 0.999]]))
        assert np.allclose(ens.positions, [[0.25, 0.5], [0.0, 0.999]])

    def test_bad_inputs_rejected(self):
        with pytest.raises(ValueError):
            lg.particle_ensemble(4, 10, rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            lg.particle_ensemble(2, 10)  # neither rng nor positions


class TestStep:
    def test_pure_sine_shear_moves_x_by_sin_y(self):
        ens = lg.particle_ensemble(2, 1, positions=np.array([[0.1, 0.25]]))
        # first pass shears x driven by y; sin(2 pi * 0.25) = 1
        lg.particle_step(ens, np.array([0.2, 0.0, 0.0, 0.0]), dt=1e-3)
        assert ens.positions[0, 0] == pytest.approx(0.3)
        assert ens.displacements[0, 0] == pytest.approx(0.2)

    def test_jacobian_matches_finite_differences(self):
        base = np.array([[0.2, 0.3], [0.7, 0.1], [0.33, 0.66]])
        eps = 1e-7
        ensA = lg.particle_ensemble(2, 3, positions=base)
        lg.simulate_particles(ensA, 1e-3, 0.2, seed=5, cadence=1.0)
        J = ensA.det_acc[:, None, None] * ensA.det_window
        num = np.zeros((3, 2, 2))
        for a in range(2):
            pp = base.copy()
            pp[:, a] += eps
            eB = lg.particle_ensemble(2, 3, positions=pp)
            lg.simulate_particles(eB, 1e-3, 0.2, seed=5, cadence=1.0)
            num[:, :, a] = (eB.displacements - ensA.displacements) / eps
        num += np.eye(2)
        assert np.max(np.abs(J - num)) < 1e-3

    def test_inverse_jacobian_inverts_forward(self):
        ens = lg.particle_ensemble(2, 5, rng=np.random.default_rng(1))
        lg.simulate_particles(ens, 1e-3, 0.1, seed=2, cadence=1.0)
        J = ens.det_acc[:, None, None] * ens.det_window
        G = np.exp(ens.log_inv_scale)[:, None, None] * ens.inv_jacobian
        prod = np.einsum("nij,njk->nik", J, G)
        assert np.max(np.abs(prod - np.eye(2))) < 1e-10


class TestVolumePreservation:
    @pytest.mark.parametrize("dimension", [2, 3])
    def test_det_jacobian_unity(self, dimension):
        ens = lg.particle_ensemble(dimension, 50, rng=np.random.default_rng(3))
        lg.simulate_particles(ens, 1e-3, 5.0, seed=4, cadence=1.0)
        assert np.max(np.abs(ens.jacobian_determinant() - 1)) < 1e-9


class TestStatistics:
    def test_one_point_displacement_is_brownian(self):
        # across independent environments the per-coordinate mean squared
        # displacement at time t is t
        n_env, per_env, T = 40, 100, 1.0
        means = []
        for e in range(n_env):
            ens = lg.particle_ensemble(2, per_env, rng=np.random.default_rng(e))
            lg.simulate_particles(ens, 1e-2, T, seed=500 + e, cadence=T)
            means.append((ens.displacements**2).mean(axis=0))
        means = np.array(means)
        stderr = means.std(axis=0, ddof=1) / np.sqrt(n_env)
        assert np.all(np.abs(means.mean(axis=0) - T) < 3 * stderr)

    def test_lyapunov_positive_and_scale_invariant(self):
        ens = lg.particle_ensemble(2, 100, rng=np.random.default_rng(5))
        lg.simulate_particles(ens, 1e-3, 3.0, seed=6, cadence=1.0)
        rates, lam = lg.lyapunov_estimate(ens)
        assert lam > 0
        assert lam == pytest.approx(rates.max())
        assert rates.shape == (100,)

    def test_lyapunov_requires_advancement(self):
        ens = lg.particle_ensemble(2, 3, rng=np.random.default_rng(6))
        with pytest.raises(ValueError):
            lg.lyapunov_estimate(ens)

    def test_deterministic_given_seed(self):
        runs = []
        for _ in range(2):
            ens = lg.particle_ensemble(2, 10,
                                       positions=np.full((10, 2), 0.37))
            lg.simulate_particles(ens, 1e-3, 0.5, seed=9, cadence=1.0)
            runs.append(ens.positions.copy())
        assert np.array_equal(runs[0], runs[1])

    def test_particles_share_environment_noise(self):
        # two particles at the same position follow identical paths
        ens = lg.particle_ensemble(2, 2, positions=np.array([[0.4, 0.6],
                                                             [0.4, 0.6]]))
        lg.simulate_particles(ens, 1e-3, 0.3, seed=10, cadence=1.0)
        assert np.array_equal(ens.positions[0], ens.positions[1])


class TestTrajectoryCsv:
    def test_format(self, tmp_path):
        ens = lg.particle_ensemble(2, 4, rng=np.random.default_rng(7))
        recs = lg.simulate_particles(ens, 1e-3, 0.1, seed=8, cadence=0.05,
                                     tracked=2)
        p = tmp_path / "traj.csv"
        lg.write_trajectory_csv(recs, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "particle,t,x,y,log_inv_jac_norm"
        assert len(lines) - 1 == 2 * len(recs)

    def test_untracked_rejected(self, tmp_path):
        ens = lg.particle_ensemble(2, 4, rng=np.random.default_rng(8))
        recs = lg.simulate_particles(ens, 1e-3, 0.05, seed=9, cadence=0.05)
        with pytest.raises(ValueError):
            lg.write_trajectory_csv(recs, tmp_path / "x.csv")
