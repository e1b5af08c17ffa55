import sys
from pathlib import Path

import numpy as np
import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

from tsdsm.corpus import build_database, default_config, generate_corpus  # noqa: E402
from tsdsm.corpus.config import trim_menus  # noqa: E402

torch.set_num_threads(1)


@pytest.fixture(scope="session")
def corpus_config():
    return trim_menus(default_config(), 12)


@pytest.fixture(scope="session")
def database(corpus_config):
    return build_database(corpus_config, 0)


@pytest.fixture(scope="session")
def bedrooms(corpus_config, database):
    return generate_corpus(corpus_config, "bedroom", 60, database, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
