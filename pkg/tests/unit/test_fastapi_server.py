import json
import os
import tempfile
import unittest
from unittest.mock import patch

from fastapi import HTTPException

from src import fastapi_server
from src.experiments import ExperimentRunner
from src.fastapi_server import RunActionRequest, RunRecord


class TestRunService(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.runs_file = os.path.join(self.tmp.name, "runs.json")
        for patcher in (patch.object(fastapi_server, "RUNS_FILE", self.runs_file),
                        patch.object(fastapi_server, "runs", [])):
            patcher.start()
            self.addCleanup(patcher.stop)
        start_patcher = patch.object(RunRecord, "start")
        self.mock_start = start_patcher.start()
        self.addCleanup(start_patcher.stop)

    def tearDown(self):
        self.tmp.cleanup()

    def _values(self, **overrides):
        values = {"schema_version": 1, "scenario": "lyapunov", "alpha": 0.3, "beta": 0.4,
                  "output_dir": os.path.join(self.tmp.name, "run")}
        values.update(overrides)
        return values

    def test_submit_run(self):
        response = fastapi_server.submit_run(self._values())
        self.assertEqual(response["status"], "started")
        self.assertEqual(response["id"], 0)
        self.mock_start.assert_called_once()

        with open(self.runs_file) as f:
            saved = json.load(f)
        self.assertEqual(saved[0]["config"]["scenario"], "lyapunov")
        self.assertEqual(saved[0]["status"], "queued")

    def test_submit_invalid_config(self):
        with self.assertRaises(HTTPException) as ctx:
            fastapi_server.submit_run(self._values(alpha=0.7))
        self.assertEqual(ctx.exception.status_code, 422)
        self.assertEqual(fastapi_server.runs, [])

    def test_status(self):
        fastapi_server.submit_run(self._values())
        info = fastapi_server.get_status()["runs"][0]
        self.assertEqual((info["id"], info["scenario"], info["status"]), (0, "lyapunov", "queued"))
        self.assertIsNone(info["passed"])
        self.assertIsNone(info["started_on"])

    def test_get_run(self):
        fastapi_server.submit_run(self._values())
        self.assertEqual(fastapi_server.get_run(0), {"status": "queued", "manifest": None, "error": None})
        with self.assertRaises(HTTPException) as ctx:
            fastapi_server.get_run(3)
        self.assertEqual(ctx.exception.status_code, 404)

    def test_run_in_background_records_the_manifest(self):
        fastapi_server.submit_run(self._values(lyapunov_iterations=200))
        record = fastapi_server.runs[0]
        record._run()
        self.assertEqual(record.status, "done")
        result = fastapi_server.get_run(0)
        self.assertEqual(result["manifest"]["scenario"], "lyapunov")
        self.assertTrue(fastapi_server.get_status()["runs"][0]["passed"])

    def test_remove(self):
        fastapi_server.submit_run(self._values())
        self.assertEqual(fastapi_server.remove_run(RunActionRequest(id=5))["status"], "error")
        self.assertEqual(fastapi_server.remove_run(RunActionRequest(id=0)), {"status": "removed"})
        self.assertEqual(fastapi_server.runs, [])
        with open(self.runs_file) as f:
            self.assertEqual(json.load(f), [])

    def test_load_runs(self):
        entries = [
            {"config": self._values(), "status": "done", "added_on": 1.0, "error": None},
            {"config": self._values(scenario="sweep"), "status": "running", "added_on": 2.0, "error": None},
            {"config": self._values(alpha=0.9), "status": "queued", "added_on": 3.0, "error": None},
        ]
        with open(self.runs_file, "w") as f:
            json.dump(entries, f)

        fastapi_server.load_runs()
        self.assertEqual([r.status for r in fastapi_server.runs], ["done", "queued"])
        self.assertEqual(fastapi_server.runs[0].added_on, 1.0)
        self.mock_start.assert_called_once()

    def test_load_runs_without_file(self):
        fastapi_server.load_runs()
        self.assertEqual(fastapi_server.runs, [])

    def test_run_crash_is_recorded(self):
        fastapi_server.submit_run(self._values())
        record = fastapi_server.runs[0]
        with patch.object(ExperimentRunner, "run_lyapunov", side_effect=OSError("disk full")):
            record._run()
        self.assertEqual(record.status, "failed")
        self.assertIn("OSError", record.error)
        with open(self.runs_file) as f:
            saved = json.load(f)
        self.assertEqual(saved[0]["status"], "failed")
        self.assertIn("disk full", saved[0]["error"])

    def test_submit_rejects_a_busy_output_dir(self):
        fastapi_server.submit_run(self._values())
        with self.assertRaises(HTTPException) as ctx:
            fastapi_server.submit_run(self._values(scenario="sweep"))
        self.assertEqual(ctx.exception.status_code, 409)
        self.assertEqual(len(fastapi_server.runs), 1)

        fastapi_server.runs[0].runner.status = "done"
        self.assertEqual(fastapi_server.submit_run(self._values(scenario="sweep"))["id"], 1)

    def test_load_runs_with_corrupt_file(self):
        with open(self.runs_file, "w") as f:
            f.write("[{\"config\": ")
        fastapi_server.load_runs()
        self.assertEqual(fastapi_server.runs, [])
        self.mock_start.assert_not_called()


if __name__ == "__main__":
    unittest.main()
