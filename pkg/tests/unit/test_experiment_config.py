import os
import tempfile
import unittest

from src.baker_map import Params
from src.errors import ConfigError
from src.experiment_config import ExperimentConfigFile, validate_config
from src.lyapunov import d1_uncoupled_closed_form, dl_uncoupled_closed_form


def _values(**overrides):
    values = {"schema_version": "1", "scenario": "dimension"}
    values.update(overrides)
    return values


class TestValidateConfig(unittest.TestCase):
    def test_defaults(self):
        config = validate_config(_values())
        self.assertEqual(config.alpha, 0.4)
        self.assertEqual(config.beta, 0.43)
        self.assertEqual(config.dimension_tolerance, 0.08)
        self.assertEqual(config.exponent_tolerance_nats, 1e-6)
        self.assertEqual(config.tolerance_telescoping, 1e-10)
        self.assertEqual(config.window(), [2.0 ** -k for k in range(2, 8)])

    def test_string_values_are_coerced(self):
        config = validate_config(_values(alpha="0.25", samples="1000", estimate_pointwise="true",
                                         probe_lambdas="0, 0.25, 1"))
        self.assertEqual(config.alpha, 0.25)
        self.assertEqual(config.samples, 1000)
        self.assertTrue(config.estimate_pointwise)
        self.assertEqual(config.probe_lambdas, [0.0, 0.25, 1.0])

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            validate_config(_values(colour="blue"))
        self.assertIn("colour", str(ctx.exception))

    def test_schema_version(self):
        with self.assertRaises(ConfigError):
            validate_config(_values(schema_version="2"))
        with self.assertRaises(ConfigError):
            validate_config({"scenario": "dimension"})

    def test_ranges(self):
        for bad in ({"alpha": "0.5"}, {"beta": "0"}, {"samples": "0"}, {"seed": "-1"},
                    {"window_min_exponent": "7", "window_max_exponent": "7"}, {"window_width": "0"},
                    {"cross_section_x": "0.99"}, {"beta_min": "0.3", "beta_max": "0.2"},
                    {"scenario": "unknown"}, {"coupling": "cubic"}):
            with self.subTest(bad=bad):
                with self.assertRaises(ConfigError):
                    validate_config(_values(**bad))

    def test_scenario_requirements(self):
        with self.assertRaises(ConfigError):
            validate_config(_values(scenario="prevalence", alpha="0.43", beta="0.4"))
        with self.assertRaises(ConfigError):
            validate_config(_values(scenario="counterexample", alpha="0.4", beta="0.4"))
        with self.assertRaises(ConfigError):
            validate_config(_values(scenario="prevalence", alpha="0.3", beta="0.4", ensemble_size="5"))
        validate_config(_values(scenario="prevalence", alpha="0.3", beta="0.4"))

    def test_overrides(self):
        config = validate_config(_values(seed="3"))
        changed = config.with_overrides(seed=9, output_dir="elsewhere", threads=4)
        self.assertEqual((changed.seed, changed.output_dir, changed.threads), (9, "elsewhere", 4))
        self.assertEqual(config.with_overrides().seed, 3)
        with self.assertRaises(ConfigError):
            config.with_overrides(threads=0)


class TestExperimentConfigFile(unittest.TestCase):
    def test_parse(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "lyapunov.cfg")
            with open(path, "w") as f:
                f.write("schema_version = 1\nscenario = lyapunov\nalpha = 0.3\nbeta = 0.4\n")
            config_file = ExperimentConfigFile(path)
            config = config_file.parse()
        self.assertEqual(config.scenario, "lyapunov")
        self.assertEqual(config_file.values["alpha"], "0.3")
        self.assertIs(config_file.config, config)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            ExperimentConfigFile("/nonexistent/run.cfg").parse()


class TestShippedConfigs(unittest.TestCase):
    CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..", "configs")

    def _parse(self, name):
        return ExperimentConfigFile(os.path.join(self.CONFIG_DIR, name)).parse()

    def test_every_config_parses(self):
        names = sorted(n for n in os.listdir(self.CONFIG_DIR) if n.endswith(".cfg"))
        self.assertGreaterEqual(len(names), 6)
        for name in names:
            with self.subTest(config=name):
                self.assertEqual(self._parse(name).scenario, name[:-len(".cfg")])

    def test_gap_scenarios_leave_room_below_d_l(self):
        for name in ("counterexample.cfg", "prevalence.cfg"):
            config = self._parse(name)
            p = Params(config.alpha, config.beta)
            d1, dl = d1_uncoupled_closed_form(p), dl_uncoupled_closed_form(p).value
            with self.subTest(config=name):
                self.assertLess(d1, dl - config.gap_margin)
                self.assertLessEqual(dl, 4.0)

    def test_prevalence_gap_exceeds_the_tolerance(self):
        config = self._parse("prevalence.cfg")
        p = Params(config.alpha, config.beta)
        self.assertGreater(dl_uncoupled_closed_form(p).value - d1_uncoupled_closed_form(p),
                           config.dimension_tolerance)


if __name__ == "__main__":
    unittest.main()
