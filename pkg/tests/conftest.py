"""Shared fixtures for the relbox test suite."""

import logging

import pytest

from relbox import Settings


@pytest.fixture
def settings() -> Settings:
    """Default geometry: Alice at the origin, Bob one unit away, c = 1."""
    return Settings()


@pytest.fixture
def wilson() -> Settings:
    """Wilson intervals at 99.9 % so seeded Monte Carlo checks practically never miss."""
    return Settings(interval="wilson", confidence=0.999)


@pytest.fixture(autouse=True)
def _quiet_relbox_logger():
    """Keep INFO chatter of the package logger out of the test output."""
    logger = logging.getLogger("relbox")
    level = logger.level
    logger.setLevel(logging.WARNING)
    yield
    logger.setLevel(level)
