import math
import unittest
import warnings

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import IntegrationWarning
from scipy.stats import norm

from gffperc import oracles
from gffperc.limits import (
    DiffusionPath,
    bm_line_hitting_cdf,
    coordinate_change_path,
    cross_ratio,
    crossing_limit,
    diffusion_start,
    elliptic_k_complete,
    half_plane_force_points,
    modulus_for_aspect,
    simulate_sle_diffusion,
    sle_hitting_batch,
    sle_hitting_probability,
)


class TestEllipticK(unittest.TestCase):
    def test_degenerate(self) -> None:
        self.assertAlmostEqual(elliptic_k_complete(0.0), math.pi / 2, places=15)

    def test_matches_quadrature(self) -> None:
        for k in (1 / math.sqrt(2), 0.1, 0.9, 0.999):
            self.assertAlmostEqual(elliptic_k_complete(k), oracles.quadrature_elliptic_k(k), delta=1e-10)

    def test_strictly_increasing(self) -> None:
        values = [elliptic_k_complete(k) for k in np.linspace(0, 0.99, 100)]
        self.assertTrue(all(a < b for a, b in zip(values, values[1:])))

    def test_domain(self) -> None:
        for bad in (1.0, 1.5, -0.1, float("nan")):
            with self.assertRaises(ValueError):
                elliptic_k_complete(bad)


class TestConformalLimit(unittest.TestCase):
    def test_square(self) -> None:
        self.assertAlmostEqual(crossing_limit(1.0), 0.5, delta=1e-10)
        images = modulus_for_aspect(1.0)
        K, K_prime = elliptic_k_complete(images.k), elliptic_k_complete(images.k_prime)
        self.assertAlmostEqual(K_prime / K, 2.0, delta=1e-12)
        self.assertAlmostEqual(images.cross_ratio(), 0.5, delta=1e-10)

    def test_corner_images(self) -> None:
        images = modulus_for_aspect(2.0)
        self.assertTrue(images.ya < images.yb < images.yc < images.yd)
        self.assertEqual((images.yb, images.yc), (-1.0, 1.0))
        self.assertAlmostEqual(images.ya * images.k, -1.0, places=14)
        self.assertAlmostEqual(images.k**2 + images.k_prime**2, 1.0, places=14)

    def test_matches_quadrature_map(self) -> None:
        self.assertAlmostEqual(crossing_limit(2.0), oracles.quadrature_crossing_limit(2.0), delta=1e-8)
        self.assertAlmostEqual(crossing_limit(3.0), oracles.quadrature_crossing_limit(3.0), delta=1e-8)

    def test_closed_form(self) -> None:
        for L in (0.5, 2.0, 5.0):
            images = modulus_for_aspect(L)
            self.assertAlmostEqual(crossing_limit(L), images.cross_ratio(), delta=1e-12)
            self.assertAlmostEqual(crossing_limit(L), ((1 - images.k) / (1 + images.k)) ** 2, delta=1e-12)

    def test_quadrature_oracle_is_quiet(self) -> None:
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            for L in (1.0, 2.0, 3.0):
                self.assertAlmostEqual(oracles.quadrature_crossing_limit(L), crossing_limit(L), delta=1e-8)

    def test_quadrature_oracle_range(self) -> None:
        with self.assertRaisesRegex(ValueError, "too small"):
            oracles.quadrature_crossing_limit(0.1)

    def test_decreasing_in_L(self) -> None:
        values = [crossing_limit(L) for L in (1, 2, 4, 8)]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))
        self.assertGreater(values[-1], 0.0)

    def test_duality(self) -> None:
        for L in (0.25, 0.5, 1.0, 2.0, 4.0):
            self.assertAlmostEqual(crossing_limit(L) + crossing_limit(1 / L), 1.0, delta=1e-9)

    def test_half_plane_reduction(self) -> None:
        for L in (0.5, 1.0, 2.0, 3.0):
            yL, yR = half_plane_force_points(modulus_for_aspect(L))
            self.assertLess(yL, 0)
            self.assertGreater(yR, 0)
            self.assertAlmostEqual(sle_hitting_probability(yL, yR), crossing_limit(L), delta=1e-12)
            x0 = diffusion_start(yL, yR)
            self.assertAlmostEqual((1 + x0) / 2, crossing_limit(L), delta=1e-12)

    def test_validation(self) -> None:
        for bad in (0.0, -1.0, float("inf"), float("nan")):
            with self.assertRaises(ValueError):
                crossing_limit(bad)
            with self.assertRaises(ValueError):
                modulus_for_aspect(bad)
        with self.assertRaises(ValueError):
            cross_ratio(0, 2, 1, 3)


class TestMobiusInvariance(unittest.TestCase):
    @settings(max_examples=100, deadline=None)
    @given(
        scale=st.floats(min_value=0.1, max_value=10),
        shift=st.floats(min_value=-5, max_value=5),
        pole_gap=st.floats(min_value=0.1, max_value=10),
        L=st.sampled_from([0.5, 1.0, 2.0, 3.0]),
    )
    def test_cross_ratio_invariant(self, scale: float, shift: float, pole_gap: float, L: float) -> None:
        images = modulus_for_aspect(L)
        points = [images.ya, images.yb, images.yc, images.yd]
        pole = images.ya - pole_gap
        # increasing on (pole, inf), so the order of the four points is kept
        mapped = [scale * (-1.0 / (y - pole)) + shift for y in points]
        self.assertAlmostEqual(cross_ratio(*mapped), cross_ratio(*points), delta=1e-10)


class TestSleHitting(unittest.TestCase):
    def test_formula(self) -> None:
        self.assertEqual(sle_hitting_probability(-1, 1), 0.5)
        self.assertEqual(sle_hitting_probability(-3, 1), 0.75)
        with self.assertRaises(ValueError):
            sle_hitting_probability(1, 2)
        with self.assertRaises(ValueError):
            diffusion_start(0, 1)

    def test_absorbed_at_start(self) -> None:
        path = simulate_sle_diffusion(1 - 1e-6, 1e-4, 0)
        self.assertEqual(path.absorbed_at, 1)
        self.assertEqual(path.absorption_step, 0)
        self.assertEqual(path.values.size, 1)

    def test_path_stays_in_interval(self) -> None:
        path = simulate_sle_diffusion(0.3, 1e-3, 4)
        self.assertTrue(np.all(np.abs(path.values) <= 1.0))
        self.assertIn(path.absorbed_at, (-1, 1))
        self.assertEqual(path.values[-1], path.absorbed_at)
        self.assertEqual(path.values.size, path.absorption_step + 1)
        self.assertEqual(path.times[-1], path.dt * path.absorption_step)

    def test_step_limit(self) -> None:
        path = simulate_sle_diffusion(0.0, 1e-4, 1, max_steps=10)
        self.assertIsNone(path.absorbed_at)
        self.assertIsNone(path.absorption_step)
        self.assertEqual(path.values.size, 11)

    def test_reproducible(self) -> None:
        a = simulate_sle_diffusion(0.1, 1e-3, 42)
        b = simulate_sle_diffusion(0.1, 1e-3, 42)
        np.testing.assert_array_equal(a.values, b.values)

    def test_validation(self) -> None:
        with self.assertRaises(ValueError):
            simulate_sle_diffusion(1.0, 1e-4)
        with self.assertRaises(ValueError):
            simulate_sle_diffusion(0.0, 1e-2)
        with self.assertRaises(ValueError):
            sle_hitting_batch(0.0, 1e-3, 0)

    def test_hitting_frequency_insensitive_to_eps(self) -> None:
        n, x0 = 4000, 0.5
        expected = (1 + x0) / 2
        stderr = math.sqrt(expected * (1 - expected) / n)
        freq = {}
        for eps in (1e-5, 1e-7):
            sample = sle_hitting_batch(x0, 1e-3, n, 6, eps=eps)
            self.assertEqual(sample.unabsorbed, 0)
            freq[eps] = sample.plus / n
            self.assertLessEqual(abs(freq[eps] - expected), 3.5 * stderr)
        # streams desynchronise after the first differing absorption
        self.assertLessEqual(abs(freq[1e-5] - freq[1e-7]), 4.5 * math.sqrt(2) * stderr)

    def test_martingale_mean_at_fixed_time(self) -> None:
        x0, n = 0.3, 2000
        rng = np.random.default_rng(8)
        finals = np.array([simulate_sle_diffusion(x0, 1e-3, rng, max_steps=100).values[-1] for _ in range(n)])
        stderr = finals.std() / math.sqrt(n)
        self.assertGreater(stderr, 0.0)
        self.assertLessEqual(abs(finals.mean() - x0), 4 * stderr)

    def test_hitting_probability(self) -> None:
        n = 4000
        for x0, seed in ((0.0, 1), (0.5, 2)):
            sample = sle_hitting_batch(x0, 1e-3, n, seed)
            expected = (1 + x0) / 2
            self.assertEqual(sample.n, n)
            self.assertEqual(sample.unabsorbed, 0)
            stderr = math.sqrt(expected * (1 - expected) / n)
            self.assertLessEqual(abs(sample.plus / n - expected), 3.5 * stderr)


class TestCoordinateChange(unittest.TestCase):
    def test_zero_path(self) -> None:
        dt = 1e-3
        path = DiffusionPath(x0=0.0, dt=dt, values=np.zeros(501), absorbed_at=None, absorption_step=None)
        changed = coordinate_change_path(path)
        s = dt * np.arange(501)
        np.testing.assert_allclose(changed.Y, 0.0, atol=1e-15)
        np.testing.assert_allclose(changed.VL, -0.5 - 0.5 * (np.exp(s) - 1), atol=1e-6)
        np.testing.assert_allclose(changed.VR, 0.5 + 0.5 * (np.exp(s) - 1), atol=1e-6)
        np.testing.assert_allclose(changed.t, (np.exp(2 * s) - 1) / 16, atol=1e-6)
        np.testing.assert_allclose(changed.recovered(), 0.0, atol=1e-12)

    def test_initial_values(self) -> None:
        path = simulate_sle_diffusion(0.4, 1e-3, 6)
        changed = coordinate_change_path(path)
        self.assertAlmostEqual(changed.VL[0], -0.7)
        self.assertAlmostEqual(changed.VR[0], 0.3)
        self.assertAlmostEqual(changed.Y[0], 0.0)
        self.assertEqual(changed.t[0], 0.0)

    def test_simulated_paths(self) -> None:
        dt = 1e-3
        rng = np.random.default_rng(10)
        for _ in range(10):
            path = simulate_sle_diffusion(rng.uniform(-0.8, 0.8), dt, rng)
            changed = coordinate_change_path(path)
            self.assertTrue(np.all(np.diff(changed.VL) <= 0))
            self.assertTrue(np.all(np.diff(changed.VR) >= 0))
            self.assertTrue(np.all(np.diff(changed.t) >= 0))
            self.assertTrue(np.all(changed.VL <= changed.Y + 1e-12))
            self.assertTrue(np.all(changed.Y <= changed.VR + 1e-12))
            self.assertLess(np.max(np.abs(changed.recovered() - path.values)), 10 * dt)

    def test_empty_path(self) -> None:
        path = DiffusionPath(x0=0.0, dt=1e-3, values=np.zeros(0), absorbed_at=None, absorption_step=None)
        with self.assertRaises(ValueError):
            coordinate_change_path(path)


class TestLineHitting(unittest.TestCase):
    def test_reflection_principle(self) -> None:
        for b, T in ((1.0, 1.0), (0.5, 3.0), (2.0, 0.5)):
            self.assertAlmostEqual(bm_line_hitting_cdf(0.0, b, T), 2 * norm.sf(b / math.sqrt(T)), delta=1e-14)

    def test_infinite_horizon(self) -> None:
        for m, b in ((-0.3, 1.0), (-1.0, 0.5)):
            self.assertAlmostEqual(bm_line_hitting_cdf(m, b, 1e8), math.exp(2 * b * m), delta=1e-6)
        self.assertAlmostEqual(bm_line_hitting_cdf(0.5, 1.0, 1e8), 1.0, delta=1e-9)

    def test_monotone(self) -> None:
        Ts = [0.1, 0.5, 1, 2, 5, 20]
        ms = [-1, -0.5, 0, 0.3, 1]
        grid = np.array([[bm_line_hitting_cdf(m, 1.0, T) for T in Ts] for m in ms])
        self.assertTrue(np.all(np.diff(grid, axis=1) >= 0))
        self.assertTrue(np.all(np.diff(grid, axis=0) >= 0))
        self.assertTrue(np.all((grid >= 0) & (grid <= 1)))

    def test_large_exponent_does_not_overflow(self) -> None:
        self.assertTrue(math.isfinite(bm_line_hitting_cdf(200.0, 5.0, 1.0)))

    def test_matches_path_simulation(self) -> None:
        dt = 1e-3
        mc = oracles.line_first_passage_probability(0.3, 1.0, 2.0, dt, 10_000, 123)
        exact = bm_line_hitting_cdf(0.3, 1.0, 2.0)
        self.assertTrue(mc.within(exact, 3.0, 1.5 * math.sqrt(dt)))

    def test_validation(self) -> None:
        with self.assertRaises(ValueError):
            bm_line_hitting_cdf(0.0, 0.0, 1.0)
        with self.assertRaises(ValueError):
            bm_line_hitting_cdf(0.0, 1.0, 0.0)


if __name__ == "__main__":
    unittest.main()
