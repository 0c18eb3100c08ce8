"""
Data layer: calibration profile persistence and local diagnostic files.

The calibration profile is a JSON document holding exactly the
OverheadParams fields; bench subcommands refuse to run without one.
"""

import json
import logging
from dataclasses import fields
from datetime import datetime
from pathlib import Path

from parkernels.errors import CalibrationFileError
from parkernels.overhead import OverheadParams

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent.parent / "data"

_PROFILE_KEYS = [f.name for f in fields(OverheadParams)]
_INT_KEYS = {"c_fork_ns", "c_sync_ns", "workers"}


def _data_dir(kind: str) -> Path:
    path = DATA_DIR / kind
    path.mkdir(parents=True, exist_ok=True)
    return path


# --- Calibration profile ---


def save_calibration(params: OverheadParams, path: Path) -> Path:
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(params.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def _check_profile(raw: object, path: Path) -> dict:
    if not isinstance(raw, dict):
        raise CalibrationFileError(f"{path}: profile must be a JSON object.")

    missing = [key for key in _PROFILE_KEYS if key not in raw]
    unknown = sorted(set(raw) - set(_PROFILE_KEYS))
    if missing or unknown:
        raise CalibrationFileError(
            f"{path}: profile keys do not match (missing={missing}, unknown={unknown})."
        )

    for key in _INT_KEYS:
        if not isinstance(raw[key], int) or isinstance(raw[key], bool):
            raise CalibrationFileError(f"{path}: {key} must be an integer.")
    if not isinstance(raw["c_dispatch_ns_per_elem"], (int, float)):
        raise CalibrationFileError(f"{path}: c_dispatch_ns_per_elem must be a number.")

    try:
        datetime.fromisoformat(raw["calibrated_at"])
    except (TypeError, ValueError):
        raise CalibrationFileError(f"{path}: calibrated_at must be an ISO-8601 timestamp.")

    rates = raw["serial_rate"]
    if not isinstance(rates, dict) or not all(
        isinstance(value, (int, float)) for value in rates.values()
    ):
        raise CalibrationFileError(f"{path}: serial_rate must map workloads to numbers.")
    if not isinstance(raw["warnings"], list):
        raise CalibrationFileError(f"{path}: warnings must be a list.")
    return raw


def load_calibration(path: Path) -> OverheadParams:
    """Read a profile back; any defect surfaces as CalibrationFileError."""
    path = Path(path)
    if not path.exists():
        raise CalibrationFileError(
            f"No calibration profile at {path}. Run `calibrate` first or pass --calib."
        )
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CalibrationFileError(f"{path}: cannot read calibration profile ({exc}).")

    profile = _check_profile(raw, path)
    try:
        return OverheadParams(
            c_fork_ns=profile["c_fork_ns"],
            c_sync_ns=profile["c_sync_ns"],
            c_dispatch_ns_per_elem=float(profile["c_dispatch_ns_per_elem"]),
            workers=profile["workers"],
            calibrated_at=profile["calibrated_at"],
            serial_rate={str(k): float(v) for k, v in profile["serial_rate"].items()},
            warnings=[str(message) for message in profile["warnings"]],
        )
    except ValueError as exc:
        raise CalibrationFileError(f"{path}: {exc}")


# --- Incident reports ---


def save_incident_report(data: dict) -> Path:
    """Keep a local timestamped copy of a correctness incident."""
    ts = datetime.now().strftime("%Y%m%d_%H%M%S")
    suffix = str(data.get("incident_id", ""))[:8]
    path = _data_dir("incidents") / f"error_report_{ts}_{suffix}.json"
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return path
