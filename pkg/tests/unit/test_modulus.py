import math
import unittest

from src.baker_map import Params
from src.coupling import ZeroCoupling, make_probe
from src.errors import ParameterError
from src.modulus import digit_scales, empirical_modulus, expected_modulus_exponent


class TestModulus(unittest.TestCase):
    def test_expected_exponent(self):
        self.assertAlmostEqual(expected_modulus_exponent(Params(0.2, 0.4)), math.log(0.4) / math.log(0.2))
        self.assertEqual(expected_modulus_exponent(Params(0.4, 0.2)), 1.0)
        self.assertEqual(expected_modulus_exponent(Params(0.3, 0.3)), 1.0)

    def test_digit_scales(self):
        scales = digit_scales(Params(0.1, 0.3), 2.5, k_min=2)
        self.assertEqual(scales, [2, 3, 4, 5])

    def test_zero_coupling_is_degenerate(self):
        table = empirical_modulus(Params(0.3, 0.4), ZeroCoupling(), pairs_per_scale=50, scale_decades=2.0)
        self.assertTrue(table.degenerate)
        self.assertTrue(math.isnan(table.slope))
        self.assertTrue(all(row.max_delta_h == 0.0 for row in table.rows))

    def test_probe_slope_follows_the_hoelder_exponent(self):
        p = Params(0.2, 0.3)
        table = empirical_modulus(p, make_probe(), pairs_per_scale=1000, scale_decades=4.0, seed=1)
        self.assertFalse(table.degenerate)
        self.assertAlmostEqual(expected_modulus_exponent(p), 0.748, places=3)
        self.assertAlmostEqual(table.slope, math.log(0.3) / math.log(0.2), delta=0.05)
        self.assertGreater(table.r_squared, 0.95)

    def test_probe_slope_is_lipschitz_when_alpha_dominates(self):
        table = empirical_modulus(Params(0.45, 0.2), make_probe(), pairs_per_scale=200, scale_decades=3.0, seed=2)
        self.assertAlmostEqual(table.slope, 1.0, delta=0.1)
        table = empirical_modulus(Params(0.3, 0.2), make_probe(), pairs_per_scale=200, scale_decades=4.0, seed=3)
        self.assertGreaterEqual(table.slope, 0.95)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(ParameterError):
            empirical_modulus(Params(0.3, 0.4), make_probe(), pairs_per_scale=1)


if __name__ == "__main__":
    unittest.main()
