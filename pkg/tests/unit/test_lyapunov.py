import math
import unittest

import numpy as np

from src.baker_map import Params, State4
from src.coupling import make_figure1_coupling, make_probe, random_trig_coupling
from src.errors import ParameterError
from src.lyapunov import (ExponentSpectrum, d1_uncoupled_closed_form, dl_uncoupled_closed_form,
                          entropy_closed_form, kaplan_yorke, lyapunov_exact, lyapunov_numerical,
                          skew_product_dimension, typical_coupled_dimension)

LOG2 = math.log(2.0)


class TestKaplanYorke(unittest.TestCase):
    def test_example(self):
        result = kaplan_yorke([0.5, -0.3, -1.0])
        self.assertAlmostEqual(result.value, 2.2)
        self.assertEqual(result.j_index, 2)

    def test_all_nonnegative(self):
        result = kaplan_yorke([0.2, 0.0])
        self.assertEqual((result.value, result.j_index), (2.0, 2))

    def test_all_negative(self):
        result = kaplan_yorke([-0.5, -1.0])
        self.assertEqual((result.value, result.j_index), (0.0, 0))

    def test_zero_partial_sum_counts(self):
        result = kaplan_yorke([1.0, -1.0, -2.0])
        self.assertEqual((result.value, result.j_index), (2.0, 2))

    def test_rejects_unsorted_and_empty(self):
        with self.assertRaises(ParameterError):
            kaplan_yorke([-1.0, 0.5])
        with self.assertRaises(ParameterError):
            kaplan_yorke([])

    def test_spectrum_validates_order(self):
        with self.assertRaises(ParameterError):
            ExponentSpectrum((-1.0, 0.5))


class TestClosedForms(unittest.TestCase):
    def test_exact_spectrum(self):
        spectrum = lyapunov_exact(Params(0.3, 0.4))
        np.testing.assert_allclose(spectrum.values, [LOG2, LOG2, math.log(0.4), math.log(0.3)])

    def test_seam_at_one_quarter(self):
        self.assertAlmostEqual(dl_uncoupled_closed_form(Params(0.2, 0.25)).value, 3.0, places=12)
        below = dl_uncoupled_closed_form(Params(0.2, 0.25 - 1e-12))
        self.assertEqual(below.j_index, 2)
        self.assertAlmostEqual(below.value, 3.0, places=9)

    def test_kaplan_yorke_matches_closed_form_on_grid(self):
        grid = np.linspace(0.01, 0.49, 20)
        for alpha in grid:
            for beta in grid:
                p = Params(float(alpha), float(beta))
                self.assertAlmostEqual(kaplan_yorke(lyapunov_exact(p)).value, dl_uncoupled_closed_form(p).value,
                                       places=12)
                self.assertAlmostEqual(skew_product_dimension(p), d1_uncoupled_closed_form(p), places=12)

    def test_gap_between_lyapunov_and_information_dimension(self):
        p = Params(0.3, 0.4)
        self.assertGreater(dl_uncoupled_closed_form(p).value - d1_uncoupled_closed_form(p), 0.0)
        q = Params(0.35, 0.35)
        self.assertAlmostEqual(dl_uncoupled_closed_form(q).value, d1_uncoupled_closed_form(q), places=12)

    def test_typical_coupled_dimension(self):
        self.assertEqual(typical_coupled_dimension(Params(0.3, 0.4)), dl_uncoupled_closed_form(Params(0.3, 0.4)).value)
        self.assertEqual(typical_coupled_dimension(Params(0.4, 0.3)), skew_product_dimension(Params(0.4, 0.3)))

    def test_entropy(self):
        self.assertAlmostEqual(entropy_closed_form(), 2 * LOG2)


class TestNumerical(unittest.TestCase):
    def test_matches_exact_for_figure1(self):
        p = Params(0.4, 0.43)
        spectrum = lyapunov_numerical(p, make_figure1_coupling(), State4(0.3, 0.2, 0.6, 0.1), n_iters=2000)
        np.testing.assert_allclose(spectrum.values, lyapunov_exact(p).values, rtol=0, atol=1e-9)
        self.assertTrue(spectrum.converged)
        self.assertEqual(spectrum.orbit_length, 2000)
        self.assertEqual(len(spectrum.convergence_history), 250)

    def test_random_couplings(self):
        rng = np.random.default_rng(12)
        for _ in range(3):
            alpha, beta = rng.uniform(0.05, 0.45, size=2)
            p = Params(float(alpha), float(beta))
            g = random_trig_coupling(rng)
            spectrum = lyapunov_numerical(p, g, State4(0.1, 0.5, 0.7, 0.2), n_iters=500, renorm_every=5, rng=rng)
            np.testing.assert_allclose(spectrum.values, lyapunov_exact(p).values, rtol=0, atol=1e-9)

    def test_drive_coupling_runs(self):
        p = Params(0.3, 0.4)
        spectrum = lyapunov_numerical(p, make_figure1_coupling(), State4(0.1, 0.5, 0.7, 0.2), n_iters=400,
                                      f=make_probe().scaled(0.1))
        self.assertEqual(len(spectrum.values), 4)
        self.assertTrue(all(math.isfinite(v) for v in spectrum.values))
        self.assertAlmostEqual(spectrum.values[0], LOG2, delta=0.2)

    def test_rejects_bad_lengths(self):
        with self.assertRaises(ParameterError):
            lyapunov_numerical(Params(0.3, 0.4), None, State4(0.1, 0.1, 0.1, 0.1), n_iters=0)


if __name__ == "__main__":
    unittest.main()
