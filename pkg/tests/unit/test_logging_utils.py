"""
Test suite for structured logging and context propagation.
"""

import asyncio
import io
import json
import logging
import sys

import pytest

from src.hypoagents.logging_utils import (
    LogComponent,
    StructuredFormatter,
    async_logging_context,
    current_context,
    get_logger,
    logging_context,
    set_log_level,
)


def capture(logger):
    stream = io.StringIO()
    handler = logger.logger.handlers[0]
    previous = handler.setStream(stream)
    return stream, lambda: handler.setStream(previous)


def records(stream):
    return [json.loads(line) for line in stream.getvalue().splitlines()]


class TestStructuredLogging:
    def test_records_carry_context_and_fields(self, monkeypatch):
        monkeypatch.setenv("HYPOAGENTS_LOG_LEVEL", "INFO")
        logger = get_logger("formatting", LogComponent.ORCHESTRATOR)
        set_log_level("INFO")
        stream, restore = capture(logger)
        try:
            with logging_context(run_id="run-1", iteration=2, stage="critic"):
                logger.info("Stage finished", operation="critic", extra_fields={"rejected": 1})
        finally:
            restore()
        (record,) = records(stream)
        assert record["message"] == "Stage finished"
        assert record["level"] == "INFO"
        assert record["logger"] == "hypoagents.orchestrator.formatting"
        assert record["context"] == {"run_id": "run-1", "iteration": 2, "stage": "critic"}
        assert record["component"] == "orchestrator"
        assert record["operation"] == "critic"
        assert record["rejected"] == 1

    def test_level_filters_records(self, monkeypatch):
        monkeypatch.setenv("HYPOAGENTS_LOG_LEVEL", "INFO")
        logger = get_logger("levels", LogComponent.GATEWAY)
        set_log_level("WARNING")
        stream, restore = capture(logger)
        try:
            logger.info("hidden")
            logger.warning("shown")
        finally:
            restore()
        assert [r["message"] for r in records(stream)] == ["shown"]

    def test_performance_context_reports_duration(self, monkeypatch):
        monkeypatch.setenv("HYPOAGENTS_LOG_LEVEL", "INFO")
        logger = get_logger("timing", LogComponent.CONTEXT)
        set_log_level("INFO")
        stream, restore = capture(logger)
        try:
            with logger.performance_context("prepare_inputs", extra_fields={"documents": 2}):
                pass
        finally:
            restore()
        (record,) = records(stream)
        assert record["operation"] == "prepare_inputs"
        assert record["documents"] == 2
        assert record["duration_ms"] >= 0


class TestContext:
    def test_nested_contexts_restore(self):
        with logging_context(run_id="outer", iteration=1):
            with logging_context(stage="planner"):
                assert current_context().to_dict() == {"run_id": "outer", "iteration": 1, "stage": "planner"}
            assert current_context().stage is None
        assert current_context().to_dict() == {}

    @pytest.mark.asyncio
    async def test_tasks_see_their_own_stage(self):
        async def stage(name):
            async with async_logging_context(stage=name):
                await asyncio.sleep(0)
                return current_context().stage

        async with async_logging_context(run_id="run-2"):
            assert await asyncio.gather(stage("a"), stage("b")) == ["a", "b"]

    def test_exceptions_are_formatted(self):
        formatter = StructuredFormatter()
        try:
            raise ValueError("boom")
        except ValueError:
            record = logging.LogRecord("x", logging.ERROR, __file__, 1, "failed", None, sys.exc_info())
        payload = json.loads(formatter.format(record))
        assert "ValueError: boom" in payload["exception"]
