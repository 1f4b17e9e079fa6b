from pathlib import Path

import pytest

import sfpc.evaluator  # noqa: F401  (raises the recursion limit once, at import)
from sfpc.surface import compile_sfpc

ROOT = Path(__file__).resolve().parents[1]
PROGRAMS = ROOT / "programs"


def core(src: str):
    return compile_sfpc(src)


@pytest.fixture(scope="session")
def regression():
    return compile_sfpc((PROGRAMS / "regression.sfpc").read_text())


@pytest.fixture(scope="session")
def regression_run(regression):
    from sfpc.inference import run_importance

    return run_importance(regression, 100_000, seed=2024)
