import unittest
from unittest.mock import patch

from parkernels import incidents


class IncidentClassificationTests(unittest.TestCase):
    def test_categories(self):
        cases = {
            "left pivot output on random#3 (n=12) is not sorted": "unsorted_output",
            "sort output is not a permutation of the input": "permutation_violation",
            "parallel product is not bit-identical to the serial product": "parallel_mismatch",
            "serial product differs from the oracle at 8x8 (pair 0)": "oracle_mismatch",
            "segmentation fault": "unknown",
        }

        for message, category in cases.items():
            with self.subTest(message=message):
                self.assertEqual(incidents.classify_error(message), category)

    def test_long_messages_are_capped(self):
        self.assertEqual(len(incidents.sanitize_error_message("x" * 5000)), 1200)

    def test_report_carries_identifiers_only(self):
        report = incidents.build_incident_report(
            workload="sort",
            variant="parallel random pivot",
            n=1000,
            seed=42,
            error_message="sort output is not sorted",
        )

        self.assertEqual(report["error_category"], "unsorted_output")
        self.assertEqual(report["n"], 1000)
        self.assertEqual(report["seed"], 42)
        self.assertEqual(len(report["fingerprint"]), 20)
        self.assertNotIn("elems", report)

    def test_fingerprint_is_stable_for_the_same_failure(self):
        first = incidents.build_incident_report(
            workload="matmul", variant="parallel", n=64, seed=1, error_message="oracle"
        )
        second = incidents.build_incident_report(
            workload="matmul", variant="parallel", n=64, seed=1, error_message="oracle"
        )

        self.assertEqual(first["fingerprint"], second["fingerprint"])
        self.assertNotEqual(first["incident_id"], second["incident_id"])


class IncidentDeliveryTests(unittest.TestCase):
    def test_save_status_is_returned(self):
        with patch.object(incidents, "save_incident_report", return_value="local-path") as save:
            report = incidents.report_incident(
                workload="sort",
                variant="serial",
                n=10,
                seed=0,
                error_message="sort output is not sorted",
            )

        self.assertTrue(report["saved"])
        save.assert_called_once()

    def test_write_failure_is_not_fatal(self):
        with patch.object(incidents, "save_incident_report", side_effect=OSError("read-only")):
            report = incidents.report_incident(
                workload="sort",
                variant="serial",
                n=10,
                seed=0,
                error_message="sort output is not sorted",
            )

        self.assertFalse(report["saved"])


if __name__ == "__main__":
    unittest.main()
