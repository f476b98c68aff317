import json
import os
import threading
import time
from datetime import datetime
from typing import Any, Dict, List, Optional

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from loguru import logger
from pydantic import BaseModel

from .errors import BakerDimError, ConfigError
from .experiment_config import validate_config
from .experiments import ExperimentRunner

RUNS_FILE = "./runs.json"

app = FastAPI()
runs: List["RunRecord"] = []
_runs_lock = threading.Lock()

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class RunRecord:
    """
    one submitted experiment run

    Attributes:
        values: config values as submitted
        runner: ExperimentRunner for the run
        added_on: unix time of submission
        error: message of a hard failure, None otherwise
    """

    def __init__(self, values: Dict[str, Any], added_on: Optional[float] = None) -> None:
        self.values = values
        self.runner = ExperimentRunner(validate_config(values))
        self.added_on: float = added_on if added_on is not None else time.time()
        self.error: Optional[str] = None

    @property
    def status(self) -> str:
        return self.runner.status

    def start(self) -> None:
        threading.Thread(target=self._run, daemon=True).start()

    def _run(self) -> None:
        try:
            self.runner.run()
        except BakerDimError as e:
            self.error = str(e)
            logger.error(f"[runs] run in {self.runner.storage.output_dir} failed: {e}")
        except Exception as e:
            self.error = f"{type(e).__name__}: {e}"
            logger.exception(f"[runs] run in {self.runner.storage.output_dir} crashed")
        finally:
            save_runs()


def save_runs() -> None:
    """saves the submitted runs to disk"""
    with _runs_lock:
        data = [{
            "config": record.values,
            "status": record.status,
            "added_on": record.added_on,
            "error": record.error,
        } for record in runs]
    with open(RUNS_FILE, "w") as f:
        json.dump(data, f, indent=2)
    logger.debug(f"[runs] saved {len(data)} runs to {RUNS_FILE}")


def load_runs() -> None:
    """restores runs from disk, restarting the ones that never finished"""
    if not os.path.exists(RUNS_FILE):
        logger.info("[runs] no runs file found, skipping")
        return

    try:
        with open(RUNS_FILE, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"[runs] could not read {RUNS_FILE}: {e}")
        return

    logger.info(f"[runs] loading {len(data)} runs from {RUNS_FILE}")
    for entry in data:
        try:
            record = RunRecord(entry["config"], added_on=entry.get("added_on"))
        except (BakerDimError, KeyError, TypeError, OSError) as e:
            logger.warning(f"[runs] failed to restore a run: {e}")
            continue

        record.error = entry.get("error")
        with _runs_lock:
            runs.append(record)
        if entry.get("status") == "done":
            record.runner.status = "done"
        elif entry.get("status") == "failed":
            record.runner.status = "failed"
        else:
            logger.info(f"[runs] restarting unfinished run in {record.runner.storage.output_dir}")
            record.start()


def _format_time(stamp: Optional[float]) -> Optional[str]:
    return datetime.fromtimestamp(stamp).strftime("%Y-%m-%d %H:%M:%S") if stamp else None


def _read_manifest(record: RunRecord) -> Optional[Dict[str, Any]]:
    path = record.runner.storage.path("manifest.json")
    if not path.exists():
        return None
    with open(path, "r") as f:
        return json.load(f)


class RunActionRequest(BaseModel):
    id: int


@app.post("/runs")
def submit_run(values: Dict[str, Any] = Body(...)):
    """validates a config given as json and starts the run in the background"""
    try:
        config = validate_config(values)
    except ConfigError as e:
        raise HTTPException(422, str(e))

    output_dir = os.path.abspath(config.output_dir)
    with _runs_lock:
        # runs sharing a directory would remove each other's .part files
        busy = any(r.status in ("queued", "running")
                   and os.path.abspath(r.runner.config.output_dir) == output_dir for r in runs)
        if busy:
            raise HTTPException(409, f"output_dir {config.output_dir} is in use by an unfinished run")
        try:
            record = RunRecord(values)
        except (ConfigError, OSError) as e:
            raise HTTPException(422, str(e))
        runs.append(record)
        run_id = len(runs) - 1
    record.start()
    save_runs()
    return {"status": "started", "id": run_id, "output_dir": str(record.runner.storage.output_dir)}


@app.get("/status")
def get_status():
    """summary of every submitted run"""
    with _runs_lock:
        snapshot = list(enumerate(runs))

    infos = []
    for idx, record in snapshot:
        runner = record.runner
        infos.append({
            "id": idx,
            "scenario": runner.config.scenario,
            "status": record.status,
            "alpha": runner.config.alpha,
            "beta": runner.config.beta,
            "coupling": runner.config.coupling,
            "output_dir": str(runner.storage.output_dir),
            "added_on": _format_time(record.added_on),
            "started_on": _format_time(runner.started_on),
            "finished_on": _format_time(runner.finished_on),
            "passed": runner.manifest.passed if record.status == "done" else None,
            "error": record.error,
        })
    return {"runs": infos}


@app.get("/runs/{run_id}")
def get_run(run_id: int):
    """the manifest of a finished run"""
    with _runs_lock:
        if not 0 <= run_id < len(runs):
            raise HTTPException(404, f"run id {run_id} not found")
        record = runs[run_id]

    manifest = _read_manifest(record)
    return {"status": record.status, "manifest": manifest, "error": record.error}


@app.post("/remove")
def remove_run(req: RunActionRequest):
    """forgets a run; its output directory stays on disk"""
    with _runs_lock:
        if not 0 <= req.id < len(runs):
            return {"status": "error", "detail": "Invalid run ID"}
        record = runs.pop(req.id)

    logger.info(f"[remove] removed run in {record.runner.storage.output_dir}")
    save_runs()
    return {"status": "removed"}


@app.on_event("startup")
def on_startup():
    """restores runs from the previous session"""
    load_runs()


@app.on_event("shutdown")
def on_shutdown():
    """saves runs on shutdown"""
    save_runs()
