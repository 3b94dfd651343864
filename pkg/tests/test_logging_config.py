"""Tests for structlog configuration."""

import json
import logging

import structlog

from bilinorm.logging_config import setup_logging


class TestSetupLogging:
    def test_console_only(self):
        setup_logging("DEBUG")
        root = logging.getLogger()
        assert root.level == logging.DEBUG
        assert len(root.handlers) == 1

    def test_unknown_level_falls_back_to_warning(self):
        setup_logging("chatty")
        assert logging.getLogger().level == logging.WARNING

    def test_json_file(self, tmp_path):
        setup_logging("INFO", tmp_path / "logs")
        structlog.get_logger("bilinorm.test").info("suite_finished", suite="definitions")
        for handler in logging.getLogger().handlers:
            handler.close()

        lines = (tmp_path / "logs" / "app.log").read_text().splitlines()
        entry = json.loads(lines[-1])
        assert entry["event"] == "suite_finished"
        assert entry["suite"] == "definitions"
        assert entry["level"] == "info"
        assert "timestamp" in entry

    def test_level_filters_file(self, tmp_path):
        setup_logging("WARNING", tmp_path)
        structlog.get_logger("bilinorm.test").info("check_finished")
        for handler in logging.getLogger().handlers:
            handler.close()
        assert (tmp_path / "app.log").read_text() == ""
