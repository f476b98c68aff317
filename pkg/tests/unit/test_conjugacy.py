import math
import unittest

import numpy as np

from src.baker_map import Params, State2, State4, baker_step, coupled_step
from src.cantor import DIGIT_MARGIN, horner_value, random_digits
from src.conjugacy import (MAX_DEPTH, PastHistory, conjugacy_inverse, conjugacy_map, conjugacy_shift_batch,
                           history_arrays, past_history, tail_bound, truncation_depth)
from src.coupling import (ZeroCoupling, make_cohomologous_coupling, make_figure1_coupling, make_sin2_tanh_coupling,
                          make_trig_coupling)
from src.errors import ParameterError, SlabEscapeError


class TestTruncationDepth(unittest.TestCase):
    def test_meets_tolerance(self):
        for beta in (0.05, 0.3, 0.49):
            n = truncation_depth(beta, 2.0, 1e-12)
            self.assertLessEqual(tail_bound(beta, 2.0, n), 1e-12)
            self.assertGreater(tail_bound(beta, 2.0, n - 1), 1e-12 * 0.999)

    def test_clamped(self):
        self.assertGreaterEqual(truncation_depth(0.3, 0.0, 1e-12), 1)
        self.assertEqual(truncation_depth(0.3, 1e-30, 1.0), 1)
        self.assertLessEqual(truncation_depth(0.49, 1.0, 1e-300), MAX_DEPTH)

    def test_rejects_nonpositive_tolerance(self):
        with self.assertRaises(ParameterError):
            truncation_depth(0.3, 1.0, 0.0)


class TestPastHistory(unittest.TestCase):
    def setUp(self):
        self.p = Params(0.3, 0.4)

    def test_origin_is_fixed(self):
        history = past_history(self.p, State2(0.0, 0.0), 5)
        self.assertEqual(len(history), 5)
        for entry in history:
            self.assertEqual((entry.x, entry.y), (0.0, 0.0))

    def test_inverse_steps_invert_the_map(self):
        s = State2(0.3, horner_value(0.3, [1, 0, 1, 1, 0]))
        history = past_history(self.p, s, 3)
        forward = baker_step(0.3, history[0])
        self.assertAlmostEqual(forward.x, s.x, places=15)
        self.assertAlmostEqual(forward.y, s.y, places=15)

    def test_slab_escape_carries_partial(self):
        # y = 0.5 sits in the gap between the two slab pieces
        with self.assertRaises(SlabEscapeError) as ctx:
            past_history(self.p, State2(0.2, 0.5), 4)
        self.assertEqual(ctx.exception.index, 0)
        self.assertEqual(len(ctx.exception.partial), 0)

    def test_from_digits_is_a_backward_orbit(self):
        rng = np.random.default_rng(4)
        digits = random_digits(rng, 1, 40)[0].tolist()
        x = 0.8125
        history = PastHistory.from_digits(self.p, x, digits, 20)
        current = State2(x, horner_value(0.3, digits))
        for entry in history:
            image = baker_step(0.3, entry)
            self.assertAlmostEqual(image.x, current.x, places=14)
            self.assertAlmostEqual(image.y, current.y, places=14)
            current = entry

    def test_from_digits_length(self):
        with self.assertRaises(ParameterError):
            PastHistory.from_digits(self.p, 0.1, [1, 0], 3)


class TestConjugacy(unittest.TestCase):
    def setUp(self):
        self.p = Params(0.3, 0.4)
        self.g = make_figure1_coupling()
        self.digits = random_digits(np.random.default_rng(6), 1, 200)[0].tolist()

    def test_zero_coupling_is_identity(self):
        history = PastHistory.from_digits(self.p, 0.2, self.digits)
        s = State4(0.2, horner_value(0.3, self.digits), 0.4, 0.1)
        result = conjugacy_map(self.p, ZeroCoupling(), s, history)
        self.assertEqual(result.image, s)
        self.assertEqual(result.shift, 0.0)

    def test_constant_coupling_shift(self):
        constant = make_trig_coupling([(1.5, 0.0, 0.0)], [(0.0, math.pi / 2)])
        history = past_history(self.p, State2(0.0, 0.0), 60)
        result = conjugacy_map(self.p, constant, State4(0.0, 0.0, 0.0, 0.0), history, depth=60)
        self.assertAlmostEqual(result.shift, 1.5 / 0.6, places=12)

    def test_inverse_round_trip(self):
        history = PastHistory.from_digits(self.p, 0.2, self.digits)
        s = State4(0.2, horner_value(0.3, self.digits), 0.4, 0.1)
        forward = conjugacy_map(self.p, self.g, s, history)
        back = conjugacy_inverse(self.p, self.g, forward.image, history)
        self.assertAlmostEqual(back.image.w, s.w, places=14)
        self.assertLessEqual(forward.tail_bound, 1e-12)

    def test_short_history(self):
        history = PastHistory.from_digits(self.p, 0.2, self.digits[:5])
        with self.assertRaises(ParameterError):
            conjugacy_map(self.p, self.g, State4(0.2, 0.0, 0.4, 0.1), history)

    def test_intertwines_the_dynamics(self):
        # h(F_0(s)) = F_g(h(s)) up to the truncation tail
        x = 0.37
        y_digits = self.digits
        s = State4(x, horner_value(0.3, y_digits), 0.6, horner_value(0.4, [1, 0, 1] * 20))
        history = PastHistory.from_digits(self.p, x, y_digits)
        mapped = conjugacy_map(self.p, self.g, s, history).image

        stepped = coupled_step(self.p, None, None, s)
        bit = 0 if x < 0.5 else 1
        next_digits = [bit] + y_digits
        next_history = PastHistory.from_digits(self.p, stepped.x, next_digits)
        lhs = conjugacy_map(self.p, self.g, stepped, next_history).image
        rhs = coupled_step(self.p, None, self.g, mapped)
        self.assertAlmostEqual(lhs.w, rhs.w, places=10)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(8)
        digits = random_digits(rng, 30, 120)
        x = rng.random(30)
        depth = truncation_depth(0.4, self.g.sup_norm, 1e-12)
        batch = conjugacy_shift_batch(self.p, self.g, x, digits, depth)
        for i in range(30):
            history = PastHistory.from_digits(self.p, float(x[i]), digits[i].tolist(), depth)
            s = State4(float(x[i]), 0.0, 0.1, 0.0)
            scalar = conjugacy_map(self.p, self.g, s, history, depth=depth).shift
            self.assertAlmostEqual(batch[i], scalar, places=12)

    def test_history_arrays(self):
        digits = np.array([[1, 0, 1, 1] + [0] * DIGIT_MARGIN], dtype=np.uint8)
        y, xs, ys = history_arrays(self.p, np.array([0.5]), digits, 3)
        self.assertAlmostEqual(xs[0, 0], 0.75)
        self.assertAlmostEqual(xs[0, 1], 0.375)
        self.assertAlmostEqual(ys[0, 0], horner_value(0.3, [0, 1, 1]))
        self.assertAlmostEqual(y[0], horner_value(0.3, [1, 0, 1, 1]))


class TestTelescoping(unittest.TestCase):
    def test_cohomologous_shift_telescopes(self):
        p = Params(0.3, 0.4)
        gtilde = make_sin2_tanh_coupling()
        g = make_cohomologous_coupling(p, gtilde)
        depth = truncation_depth(p.beta, max(g.sup_norm, gtilde.sup_norm), 1e-11)
        rng = np.random.default_rng(9)
        digits = random_digits(rng, 200, depth + DIGIT_MARGIN)
        x = rng.random(200)
        y, _, _ = history_arrays(p, x, digits, depth)
        shift = conjugacy_shift_batch(p, g, x, digits, depth)
        np.testing.assert_allclose(shift, gtilde.eval(x, y), rtol=0, atol=1e-10)


if __name__ == "__main__":
    unittest.main()
