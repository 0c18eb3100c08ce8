"""Diagnostic incident reports for kernels that fail output verification."""

import hashlib
import logging
from datetime import datetime, timezone
from uuid import uuid4

from parkernels.data import save_incident_report

logger = logging.getLogger(__name__)

INCIDENT_SCHEMA_VERSION = 1
ERROR_CATEGORIES = {
    "unsorted_output",
    "permutation_violation",
    "parallel_mismatch",
    "oracle_mismatch",
    "unknown",
}


def sanitize_error_message(message: str, max_length: int = 1200) -> str:
    """Cap stored error detail; reports never carry array contents."""
    return str(message)[:max_length]


def classify_error(message: str) -> str:
    """Map a verification failure to a small triage category."""
    normalized = message.lower()
    if "not sorted" in normalized:
        return "unsorted_output"
    if "permutation" in normalized or "multiset" in normalized:
        return "permutation_violation"
    if "bit-identical" in normalized or "differs from serial" in normalized:
        return "parallel_mismatch"
    if "oracle" in normalized:
        return "oracle_mismatch"
    return "unknown"


def build_incident_report(
    *,
    workload: str,
    variant: str,
    n: int,
    seed: int,
    error_message: str,
) -> dict:
    """Build a diagnostic-only report: identifiers, never the data."""
    sanitized_message = sanitize_error_message(error_message)
    category = classify_error(sanitized_message)
    fingerprint_source = "|".join(
        (workload, variant, str(n), str(seed), category, sanitized_message)
    )

    return {
        "schema_version": INCIDENT_SCHEMA_VERSION,
        "incident_id": str(uuid4()),
        "fingerprint": hashlib.sha256(fingerprint_source.encode()).hexdigest()[:20],
        "status": "new",
        "reported_at": datetime.now(timezone.utc).isoformat(),
        "workload": workload,
        "variant": variant,
        "n": n,
        "seed": seed,
        "error_category": category,
        "error_message": sanitized_message,
    }


def report_incident(**kwargs) -> dict:
    """Persist an incident locally and return it with its save status."""
    report = build_incident_report(**kwargs)
    try:
        path = save_incident_report(report)
        saved = True
        logger.warning("correctness incident %s saved to %s", report["fingerprint"], path)
    except OSError as exc:
        logger.error("save failed for incident %s: %s", report["incident_id"], exc)
        saved = False
    return {**report, "saved": saved}
