import json
import math
import os
import tempfile
import unittest

import numpy as np

from src.results import ResultManifest, ResultStorage, dumps_json, format_float


class TestFormatting(unittest.TestCase):
    def test_format_float(self):
        self.assertEqual(format_float(0.1), "0.10000000000000001")
        self.assertEqual(float(format_float(1 / 3)), 1 / 3)

    def test_dumps_json(self):
        text = dumps_json({"b": 0.1, "a": [np.float64(1.5), np.int64(3), math.nan], "c": "0.1"})
        self.assertIn('"b": 0.10000000000000001', text)
        self.assertIn('"c": "0.1"', text)
        parsed = json.loads(text)
        self.assertEqual(parsed["a"], [1.5, 3, None])
        self.assertLess(text.index('"a"'), text.index('"b"'))


class TestResultManifest(unittest.TestCase):
    def setUp(self):
        self.manifest = ResultManifest(scenario="dimension", config={"seed": 0})

    def test_verdicts(self):
        self.assertEqual(self.manifest.check_close("D2", 3.01, 3.0, 0.08).verdict, "pass")
        self.assertTrue(self.manifest.passed)
        self.assertEqual(self.manifest.check_below("gap", 0.2, 0.1).verdict, "fail")
        self.assertFalse(self.manifest.passed)

    def test_report_never_fails(self):
        record = self.manifest.report("box", math.nan, note="empty")
        self.assertEqual(record.verdict, "report")
        self.assertIsNone(record.value)
        self.assertTrue(self.manifest.passed)

    def test_non_finite_fails_checks(self):
        self.assertEqual(self.manifest.check_at_least("fraction", math.nan, 0.9).verdict, "fail")
        self.assertEqual(self.manifest.check_close("D2", None, 3.0, 0.1).verdict, "fail")

    def test_note(self):
        self.manifest.note("too few survivors")
        self.assertEqual(self.manifest.notes, ["too few survivors"])


class TestResultStorage(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.storage = ResultStorage(os.path.join(self.tmp.name, "run"))

    def tearDown(self):
        self.tmp.cleanup()

    def test_write_csv(self):
        path = self.storage.write_csv("table.csv", ["k", "value", "note"], [[1, 0.1, None], [2, 1.0, "x"]])
        with open(path) as f:
            self.assertEqual(f.read(), "k,value,note\n1,0.10000000000000001,\n2,1,x\n")
        self.assertFalse(os.path.exists(str(path) + ".part"))

    def test_manifest_lists_files_sorted_without_wall_clock(self):
        self.storage.write_text("b.csv", "x\n")
        self.storage.write_text("a.csv", "x\n")
        manifest = ResultManifest(scenario="sweep", config={}, failures=["z", "a"])
        self.storage.write_manifest(manifest, wall_clock=1.5)

        with open(self.storage.path("manifest.json")) as f:
            data = json.load(f)
        self.assertEqual(data["files"], ["a.csv", "b.csv"])
        self.assertEqual(data["failures"], ["a", "z"])
        with open(self.storage.path("timing.json")) as f:
            self.assertEqual(json.load(f), {"wall_clock_seconds": 1.5})

    def test_manifest_is_byte_identical_across_writes(self):
        manifest = ResultManifest(scenario="sweep", config={"alpha": 0.3})
        manifest.check_close("D", 1.0 / 3.0, 0.3333, 0.01)
        self.storage.write_manifest(manifest, wall_clock=1.0)
        with open(self.storage.path("manifest.json"), "rb") as f:
            first = f.read()
        self.storage.write_manifest(manifest, wall_clock=2.0)
        with open(self.storage.path("manifest.json"), "rb") as f:
            self.assertEqual(f.read(), first)

    def test_cleanup_removes_part_files(self):
        leftover = self.storage.path("half.csv.part")
        with open(leftover, "w") as f:
            f.write("1,2")
        self.storage.cleanup()
        self.assertFalse(os.path.exists(leftover))


if __name__ == "__main__":
    unittest.main()
