"""
Unit tests for the logging setup
"""

import logging

import pytest

from src.utils.logger import LOGGER_NAME, get_logger, log_banner, setup_logger


def test_child_loggers_hang_off_the_package_logger():
    """Test module names are reduced to their last part under fraclap."""
    assert get_logger().name == LOGGER_NAME
    assert get_logger("src.operators.singular").name == "fraclap.singular"
    assert get_logger("src.operators.singular").parent is get_logger()


def test_setup_does_not_stack_handlers(tmp_path):
    """Test repeated setup keeps one console and one file handler."""
    log_file = tmp_path / "logs" / "fraclap.log"
    setup_logger(level="DEBUG", log_file=str(log_file))
    logger = setup_logger(level="debug", log_file=str(log_file))
    assert len(logger.handlers) == 2
    assert logger.level == logging.DEBUG

    get_logger("src.montecarlo.exit").info("written through the child")
    for handler in logger.handlers:
        handler.flush()
    assert "fraclap.exit - INFO - written through the child" in log_file.read_text(encoding="utf-8")

    setup_logger(level="INFO", log_to_file=False)


def test_log_banner(caplog):
    """Test the banner is a title between two rules."""
    logger = get_logger("tests")
    with caplog.at_level(logging.INFO, logger=LOGGER_NAME):
        log_banner(logger, "PHASE 1")
    messages = [record.getMessage() for record in caplog.records]
    assert messages == ["=" * 60, "PHASE 1", "=" * 60]


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
