"""Unit tests for structlog setup."""

import json

import structlog

from ambiset.config.logging import bind_run, configure_logging


class TestConfigureLogging:
    """Test cases for configure_logging and bind_run."""

    def test_json_lines_go_to_stderr(self, capsys):
        """Test that events render as JSON on stderr with the bound run context."""
        configure_logging("INFO", json_logs=True)
        run_id = bind_run("dist")

        structlog.get_logger("ambiset.test").info("lp_solved", value=1.5)

        captured = capsys.readouterr()
        assert captured.out == ""
        event = json.loads(captured.err.strip().splitlines()[-1])
        assert event["event"] == "lp_solved"
        assert event["value"] == 1.5
        assert event["level"] == "info"
        assert event["run_id"] == run_id
        assert event["command"] == "dist"
        assert "timestamp" in event

    def test_level_filters_events(self, capsys):
        """Test that events below the configured level are dropped."""
        configure_logging("WARNING")

        structlog.get_logger("ambiset.test").info("hidden_event")
        structlog.get_logger("ambiset.test").warning("shown_event")

        err = capsys.readouterr().err
        assert "hidden_event" not in err
        assert "shown_event" in err

    def test_unknown_level_falls_back_to_info(self, capsys):
        """Test that an unknown level name behaves like INFO."""
        configure_logging("LOUD")

        structlog.get_logger("ambiset.test").debug("debug_event")
        structlog.get_logger("ambiset.test").info("info_event")

        err = capsys.readouterr().err
        assert "debug_event" not in err
        assert "info_event" in err

    def test_bind_run_replaces_context(self):
        """Test that each run gets a fresh eight-character id and drops earlier bindings."""
        structlog.contextvars.bind_contextvars(stale="yes")
        first = bind_run("validate")
        second = bind_run("tail")

        context = structlog.contextvars.get_contextvars()
        assert len(first) == 8
        assert first != second
        assert context == {"run_id": second, "command": "tail"}
