"""Shared fixtures.

Corpus generation and model training are slow enough to matter, so the
widely shared artifacts are session-scoped and deliberately small.  The
acceptance module builds its own full-size corpus.
"""

from pathlib import Path

import pytest

from guirepair.calibrate import (
    MappingProtocol,
    build_mapping_set,
    fit_calibration,
    preset_calibration,
)
from guirepair.graph import build_graph
from guirepair.layout import parse_hierarchy
from guirepair.rgcn import TrainConfig, train
from guirepair.synth import SynthConfig, generate_corpus
from guirepair.wireframe import wireframe_from_tree

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def login_doc():
    raw = (FIXTURES / "login.xml").read_text()
    return parse_hierarchy(raw, "xml-dump")


@pytest.fixture(scope="session")
def tiny_screens():
    return generate_corpus(SynthConfig(count=6, seed=5))


@pytest.fixture(scope="session")
def tiny_graphs(tiny_screens):
    return [build_graph(wireframe_from_tree(s.clean, s.meta)) for s in tiny_screens]


@pytest.fixture(scope="session")
def tiny_model(tiny_graphs):
    return train(tiny_graphs, TrainConfig(dim=16, epochs=60, seed=0))


@pytest.fixture(scope="session")
def preset_cal():
    return preset_calibration()


@pytest.fixture(scope="session")
def fitted_cal(tiny_screens, tiny_model):
    wfs = [wireframe_from_tree(s.clean, s.meta) for s in tiny_screens]
    mapping = build_mapping_set(tiny_model, wfs, MappingProtocol(k=3, seed=0))
    return fit_calibration(mapping)
