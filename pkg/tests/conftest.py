"""Pytest configuration and fixtures."""

import logging
import os
from typing import Generator

import pytest
from click.testing import CliRunner

# Keep developer .env files and BB_* variables out of the tests
for _key in [k for k in os.environ if k.startswith("BB_")]:
    del os.environ[_key]

from bilinorm.bilinear import BilinearOperator, builtin_operator  # noqa: E402
from bilinorm.config import DEFAULT_TOLERANCES, RunConfig, Tolerances, get_settings  # noqa: E402
from bilinorm.spaces import L1Space, LinfSpace, LpSpace, PolyhedralSpace  # noqa: E402


@pytest.fixture(autouse=True)
def clear_settings_cache() -> Generator[None, None, None]:
    """Settings are cached per process; reset around every test."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(autouse=True)
def reset_root_handlers() -> Generator[None, None, None]:
    """CLI invocations point the root handler at a captured stream; drop it afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers = handlers
    root.setLevel(level)


@pytest.fixture
def tol() -> Tolerances:
    return DEFAULT_TOLERANCES


@pytest.fixture
def l1() -> L1Space:
    return L1Space(2)


@pytest.fixture
def l2() -> LpSpace:
    return LpSpace(2.0, 2)


@pytest.fixture
def linf() -> LinfSpace:
    return LinfSpace(2)


@pytest.fixture
def hexagon() -> PolyhedralSpace:
    """Unit ball cut out by |x1| <= 1, |x2| <= 1 and |x1 + x2| <= 1."""
    return PolyhedralSpace.from_facets([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def smooth_example() -> BilinearOperator:
    return builtin_operator("smooth-example")


@pytest.fixture
def coordinate_product() -> BilinearOperator:
    return builtin_operator("coordinate-product")


@pytest.fixture
def first_coordinates() -> BilinearOperator:
    return builtin_operator("first-coordinates")


@pytest.fixture
def run_config() -> RunConfig:
    """Small multi-start count to keep ascent-based tests quick."""
    return RunConfig(seed=0, starts=16, timestamps=False)


@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()
