import unittest

import numpy as np
from bitarray import bitarray

from src.cantor import CantorPoint, horner_value, random_digits, sample_cantor, suffix_values
from src.errors import ParameterError


class TestCantorPoint(unittest.TestCase):
    def test_value_from_digits(self):
        point = CantorPoint.from_digits(1.0 / 3.0, [1, 0, 0])
        self.assertAlmostEqual(point.value, 2.0 / 3.0, places=15)
        self.assertEqual(point.digits, bitarray("100"))
        self.assertEqual(point.depth, 3)
        self.assertAlmostEqual(point.truncation_error, 1.0 / 27.0)

    def test_all_ones_approaches_one(self):
        point = CantorPoint.from_digits(0.25, [1] * 60)
        self.assertAlmostEqual(point.value, 1.0, places=15)

    def test_rejects_contraction(self):
        with self.assertRaises(ParameterError):
            CantorPoint.from_digits(0.5, [1])


class TestSampleCantor(unittest.TestCase):
    def test_iterable_source(self):
        point = sample_cantor(1.0 / 3.0, iter([0, 1, 1, 0, 1]), 3)
        self.assertEqual(point.digits, bitarray("011"))

    def test_exhausted_source(self):
        with self.assertRaises(ParameterError):
            sample_cantor(0.3, [1, 0], 5)

    def test_depth_must_be_positive(self):
        with self.assertRaises(ParameterError):
            sample_cantor(0.3, np.random.default_rng(0), 0)

    def test_values_lie_in_the_first_level_intervals(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            point = sample_cantor(0.3, rng, 40)
            self.assertTrue(0.0 <= point.value <= 0.3 or 0.7 <= point.value <= 1.0)
            self.assertEqual(point.value >= 0.7, bool(point.digits[0]))


class TestSuffixValues(unittest.TestCase):
    def test_first_column_matches_horner(self):
        digits = random_digits(np.random.default_rng(2), 20, 30)
        values = suffix_values(0.4, digits, 5)
        for row, bits in zip(values, digits):
            self.assertEqual(row[0], horner_value(0.4, bits.tolist()))
            self.assertEqual(row[3], horner_value(0.4, bits[3:].tolist()))

    def test_suffix_recursion(self):
        digits = random_digits(np.random.default_rng(3), 10, 20)
        values = suffix_values(0.35, digits, 21)
        np.testing.assert_array_equal(values[:, 20], 0.0)
        np.testing.assert_allclose(values[:, 0], 0.65 * digits[:, 0] + 0.35 * values[:, 1], atol=1e-15)

    def test_bad_count(self):
        with self.assertRaises(ParameterError):
            suffix_values(0.3, np.zeros((2, 4), dtype=np.uint8), 6)


if __name__ == "__main__":
    unittest.main()
