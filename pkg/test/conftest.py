import logging
import sys
from os.path import join, dirname, normpath

import pytest

sys.path.append(join(dirname(normpath(__file__)), ".."))

from lexclass.config import config_from_dict
from lexclass.logger import logger
from lexclass.pipeline import load_resources, prepare_corpus
from lexclass.synth import generate_corpus
from lexclass.utils import BUNDLED_LEXICA

logger.setLevel(logging.DEBUG)

# Small, fast settings shared by the pipeline-level tests.
SMALL_CONFIG = {
    "folds": 3,
    "hyperparams": {"n_estimators": 10},
    "selection": {"importance_estimators": 5},
    "explain": {"n_samples": 60},
}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Run slow benchmarks.")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def resources():
    return load_resources(BUNDLED_LEXICA)


@pytest.fixture(scope="session")
def small_config():
    return config_from_dict(SMALL_CONFIG)


@pytest.fixture(scope="session")
def synthetic_corpus():
    return generate_corpus(n_docs=150, n_classes=4, noise=0.1, seed=3)


@pytest.fixture(scope="session")
def prepared(synthetic_corpus, resources, small_config):
    return prepare_corpus(synthetic_corpus, resources, small_config)


@pytest.fixture(scope="session")
def legal(resources):
    return resources.legal


@pytest.fixture(scope="session")
def anonymiser_lexica(resources):
    return resources.anonymiser
