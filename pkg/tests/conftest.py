from importlib.resources import files
from pathlib import Path

import pytest

GOLDEN_DIR = Path(__file__).parent / "golden"


def bundled(name: str) -> Path:
    return Path(str(files("metaplot") / "data" / name))


@pytest.fixture
def null_csv() -> Path:
    return bundled("null_27.csv")


@pytest.fixture
def effect_csv() -> Path:
    return bundled("effect_icc.csv")


@pytest.fixture
def demo_config() -> Path:
    return bundled("demo_cohort.json")


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN_DIR
