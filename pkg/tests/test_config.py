import os
import unittest
from unittest.mock import patch

from parkernels import config
from parkernels.errors import ConfigError


class WorkerResolutionTests(unittest.TestCase):
    def test_flag_wins(self):
        with patch.dict(os.environ, {"PARKERNELS_THREADS": "3"}):
            self.assertEqual(config.resolve_workers(6, 4), 6)

    def test_profile_beats_environment(self):
        with patch.dict(os.environ, {"PARKERNELS_THREADS": "3"}):
            self.assertEqual(config.resolve_workers(None, 4), 4)

    def test_environment_beats_detection(self):
        with patch.dict(os.environ, {"PARKERNELS_THREADS": "3"}):
            with patch.object(config, "detect_workers", return_value=16):
                self.assertEqual(config.resolve_workers(), 3)

    def test_detection_is_the_fallback(self):
        with patch.dict(os.environ, {}, clear=True):
            with patch.object(config, "detect_workers", return_value=16):
                self.assertEqual(config.resolve_workers(), 16)

    def test_bad_environment_value(self):
        for raw in ("zero", "0", "-2"):
            with self.subTest(raw=raw):
                with patch.dict(os.environ, {"PARKERNELS_THREADS": raw}):
                    with self.assertRaises(ConfigError):
                        config.resolve_workers()

    def test_detected_workers_is_positive(self):
        self.assertGreaterEqual(config.detect_workers(), 1)


if __name__ == "__main__":
    unittest.main()
