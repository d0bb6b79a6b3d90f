"""Defines fixtures that can be used to streamline tests and / or define dependencies"""
import pytest

import gt_core


@pytest.fixture
def experiment_settings():
    """A small average-tests experiment, written with the camelCase keys configuration files use"""
    return {
        "experiment": "avg_tests",
        "families": 5,
        "familySize": 4,
        "p": 0.5,
        "q": 0.3,
        "trials": 3,
        "seed": 1,
    }


@pytest.fixture
def config_file(tmp_path, experiment_settings):
    """Writes experiment_settings to a JSON file, returning its path"""
    path = tmp_path / "experiment.json"
    path.write_bytes(gt_core.output_format.json(experiment_settings))
    return path


@pytest.fixture
def community():
    """Three families of unequal size"""
    return gt_core.model.CommunityStructure([3, 3, 2])
