"""Shared fixtures: seeded RD samples and a loguru capture sink."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Generator, List

import numpy as np
import pandas as pd
import pytest
from loguru import logger

from rd_lasso.kernelfit import Sample

TRUE_JUMP = 0.5


@pytest.fixture(autouse=True)
def log_records() -> Generator[List[Dict[str, Any]], None, None]:
    """Enable package logging and capture every record for the test."""
    records: List[Dict[str, Any]] = []
    logger.enable("rd_lasso")
    logger.add(lambda message: records.append(message.record), level="DEBUG", format="{message}")
    yield records
    # setup_logging() may have replaced the handlers; start the next test clean
    logger.remove()
    logger.disable("rd_lasso")


def make_sharp_sample(
    n: int = 1000,
    p: int = 3,
    seed: int = 11,
    jump: float = TRUE_JUMP,
    signal: float = 0.8,
    noise: float = 0.2,
) -> Sample:
    """Sharp design whose first covariate drives the outcome; the rest are noise."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, n)
    z = rng.standard_normal((n, p))
    t = (x >= 0.0).astype(float)
    y = 0.5 + 0.3 * x + jump * t + 0.2 * x**2 + noise * rng.standard_normal(n)
    if p > 0:
        y = y + signal * z[:, 0]
    names = tuple(f"z{j}" for j in range(p))
    return Sample(x=x, y=y, z=z if p > 0 else None, cutoff=0.0, covariate_names=names)


@pytest.fixture
def sharp_sample() -> Sample:
    return make_sharp_sample()


@pytest.fixture
def plain_sample() -> Sample:
    """No covariates."""
    return make_sharp_sample(p=0)


def write_sample_csv(sample: Sample, path: Path) -> Path:
    frame = pd.DataFrame({"x": sample.x, "y": sample.y})
    for j, name in enumerate(sample.covariate_names):
        frame[name] = sample.covariates[:, j]
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


@pytest.fixture
def sample_csv(tmp_path: Path, sharp_sample: Sample) -> Path:
    return write_sample_csv(sharp_sample, tmp_path / "sample.csv")
