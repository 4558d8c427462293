import pytest

from config import TestConfig
from fairbandits import create_app
from fairbandits.models import Rng


@pytest.fixture
def app(tmp_path):
    class LocalConfig(TestConfig):
        OUTPUT_DIR = str(tmp_path / 'results')

    return create_app(LocalConfig)


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def make_rng():
    def factory(seed=0, *key):
        return Rng(seed, key)
    return factory
