import numpy as np
import pytest

from dferclip.data import SyntheticSpec, generate_synthetic
from dferclip.model import DFERCLIP, ModelConfig
from dferclip.numerics import get_tape
from dferclip.textpipe import PromptSpec, expression_classes


@pytest.fixture(autouse=True)
def _clean_tape():
    get_tape().reset()
    yield
    get_tape().reset()


@pytest.fixture
def micro_cfg():
    return ModelConfig.micro(C=3)


@pytest.fixture
def micro_model(micro_cfg):
    return DFERCLIP(micro_cfg, PromptSpec(context_len=2), list(expression_classes(3)), seed=0)


@pytest.fixture
def micro_clips():
    rng = np.random.default_rng(123)
    return rng.uniform(0, 1, size=(2, 4, 3, 16, 16)), np.array([0, 2])


@pytest.fixture(scope="session")
def tiny_dataset():
    """3 classes, 10 clips each, noise 0.05."""
    return generate_synthetic(SyntheticSpec(C=3, clips_per_class=10, raw_frames_per_clip=8, noise=0.05, seed=0))


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"AC{n:<2} {'PASS' if ok else 'FAIL'}  {detail}")
