import numpy as np
import pytest
from synthsrc import synth_rf_block

from entroflow.generator import generate_stream, seed_cost
from entroflow.nnet import TrainingConfig, new_inner_network, train_inner
from entroflow.seedsrc import load_rf_wav, samples_to_sequences, write_rf_wav

GEN_COUNT = 80

# one line per shipped guarantee, appended by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rf_wav_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixtures") / "synth_rf.wav"
    write_rf_wav(path, synth_rf_block(70_000, seed=20260815))
    return path


@pytest.fixture(scope="session")
def raw_corpus(rf_wav_path):
    return samples_to_sequences(load_rf_wav(rf_wav_path))


@pytest.fixture(scope="session")
def train_corpus(raw_corpus):
    return raw_corpus[:300]


@pytest.fixture(scope="session")
def seed_corpus(raw_corpus):
    return raw_corpus[300:]


@pytest.fixture(scope="session")
def inner_net(train_corpus):
    net = new_inner_network(rng_seed=11)
    train_inner(net, train_corpus, TrainingConfig(rng_seed=11))
    return net


@pytest.fixture(scope="session")
def gen_corpus(inner_net, seed_corpus):
    assert len(seed_corpus) >= seed_cost(GEN_COUNT)
    return generate_stream(inner_net, seed_corpus, GEN_COUNT)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
