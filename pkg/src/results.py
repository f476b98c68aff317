from __future__ import annotations

import json
import math
import os
import pathlib
import shutil
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

Verdict = Literal["pass", "fail", "report"]

_FLOAT_MARK = "\u0000f{}\u0000"


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip any double"""
    return format(float(value), ".17g")


def dumps_json(record: Any) -> str:
    """
    json text with every float written to 17 significant digits

    non-finite floats become null
    """
    floats: List[str] = []

    def mark(value: Any) -> Any:
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                return None
            floats.append(format_float(value))
            return _FLOAT_MARK.format(len(floats) - 1)
        if isinstance(value, (np.integer,)):
            return int(value)
        if isinstance(value, dict):
            return {str(k): mark(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [mark(v) for v in value]
        return value

    text = json.dumps(mark(record), indent=2, sort_keys=True)
    for index, rendered in enumerate(floats):
        text = text.replace(json.dumps(_FLOAT_MARK.format(index)), rendered, 1)
    return text + "\n"


class EstimateRecord(BaseModel):
    """
    one reported quantity with its reference and verdict

    Attributes:
        quantity: name, e.g. "D2(mu_g)"
        value: estimate
        stderr: standard error if known
        reference: closed-form or conjectured value compared against
        tolerance: allowed deviation
        verdict: pass, fail, or report when nothing is asserted
        details: extra fields (fit window, r^2, ...)
    """
    quantity: str
    value: Optional[float] = None
    stderr: Optional[float] = None
    reference: Optional[float] = None
    tolerance: Optional[float] = None
    verdict: Verdict = "report"
    details: Dict[str, Any] = Field(default_factory=dict)


class ResultManifest(BaseModel):
    """
    machine-readable summary of one run, free of wall-clock values

    Attributes:
        scenario: scenario name
        config: the validated config
        estimates: every reported quantity
        references: closed-form values used by the run
        couplings: descriptors of the coupling functions used
        files: artifacts written next to the manifest
        notes: warnings raised during the run
        failures: per-item failures that did not abort the run
    """
    scenario: str
    config: Dict[str, Any]
    estimates: List[EstimateRecord] = Field(default_factory=list)
    references: Dict[str, float] = Field(default_factory=dict)
    couplings: Dict[str, Any] = Field(default_factory=dict)
    files: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.verdict != "fail" for e in self.estimates)

    def report(self, quantity: str, value: Optional[float], stderr: Optional[float] = None,
               **details: Any) -> EstimateRecord:
        record = EstimateRecord(quantity=quantity, value=_finite_or_none(value), stderr=_finite_or_none(stderr),
                                details=details)
        self.estimates.append(record)
        return record

    def check_close(self, quantity: str, value: Optional[float], reference: float, tolerance: float,
                    stderr: Optional[float] = None, **details: Any) -> EstimateRecord:
        """passes when |value - reference| <= tolerance"""
        ok = value is not None and math.isfinite(value) and abs(value - reference) <= tolerance
        return self._checked(quantity, value, reference, tolerance, stderr, ok, details)

    def check_at_least(self, quantity: str, value: Optional[float], reference: float,
                       **details: Any) -> EstimateRecord:
        ok = value is not None and math.isfinite(value) and value >= reference
        return self._checked(quantity, value, reference, None, None, ok, details)

    def check_below(self, quantity: str, value: Optional[float], reference: float,
                    **details: Any) -> EstimateRecord:
        ok = value is not None and math.isfinite(value) and value < reference
        return self._checked(quantity, value, reference, None, None, ok, details)

    def _checked(self, quantity, value, reference, tolerance, stderr, ok, details) -> EstimateRecord:
        record = EstimateRecord(quantity=quantity, value=_finite_or_none(value), stderr=_finite_or_none(stderr),
                                reference=reference, tolerance=tolerance, verdict="pass" if ok else "fail",
                                details=details)
        self.estimates.append(record)
        if not ok:
            logger.warning(f"[verdict] {quantity}: {value} vs reference {reference} failed")
        return record

    def note(self, message: str) -> None:
        logger.warning(f"[{self.scenario}] {message}")
        self.notes.append(message)


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class ResultStorage:
    """
    handles all disk writes for one run

    every file is written to a .part sibling first and moved into place once complete,
    so an interrupted run never leaves a truncated artifact under its final name

    Attributes:
        output_dir: directory holding the run's artifacts
        written: names of the files written so far, in order
    """

    def __init__(self, output_dir: str) -> None:
        self.output_dir = pathlib.Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.written: List[str] = []

    def path(self, name: str) -> pathlib.Path:
        return self.output_dir / name

    def write_bytes(self, name: str, data: bytes) -> pathlib.Path:
        final_path = self.path(name)
        part_path = self.output_dir / (name + ".part")
        with open(part_path, "wb") as f:
            f.write(data)
        shutil.move(part_path, final_path)
        if name not in self.written:
            self.written.append(name)
        return final_path

    def write_text(self, name: str, text: str) -> pathlib.Path:
        return self.write_bytes(name, text.encode("utf-8"))

    def write_json(self, name: str, record: Any) -> pathlib.Path:
        return self.write_text(name, dumps_json(record))

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> pathlib.Path:
        """comma-separated table, floats at 17 significant digits"""
        def cell(value: Any) -> str:
            if isinstance(value, (float, np.floating)):
                return format_float(value)
            if value is None:
                return ""
            return str(value)

        lines = [",".join(header)]
        lines.extend(",".join(cell(v) for v in row) for row in rows)
        return self.write_text(name, "\n".join(lines) + "\n")

    def write_points(self, name: str, points: np.ndarray, columns: Sequence[str]) -> pathlib.Path:
        return self.write_csv(name, columns, np.asarray(points, dtype=float).tolist())

    def write_manifest(self, manifest: ResultManifest, wall_clock: Optional[float] = None) -> pathlib.Path:
        """manifest.json plus, when timed, a timing.json sidecar kept out of the manifest"""
        if wall_clock is not None:
            self.write_json("timing.json", {"wall_clock_seconds": wall_clock})
        manifest.files = sorted(n for n in self.written if n not in ("manifest.json", "timing.json"))
        manifest.failures = sorted(manifest.failures)
        return self.write_json("manifest.json", manifest.model_dump())

    def cleanup(self) -> None:
        """removes .part files left by an interrupted run"""
        for leftover in self.output_dir.glob("*.part"):
            try:
                os.remove(leftover)
            except OSError as e:
                logger.warning(f"[storage] could not remove {leftover}: {e}")
