"""tests/test_config.py.

Tests the loading and validation of experiment and design configurations


Copyright (C) 2016 Timothy Edmund Crosley

Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
documentation files (the "Software"), to deal in the Software without restriction, including without limitation
the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software, and
to permit persons to whom the Software is furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all copies or
substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED
TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF
CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR
OTHER DEALINGS IN THE SOFTWARE.

"""
from io import BytesIO

import pytest

import gt_core
from gt_core.exceptions import InvalidConfig


def test_load_experiment(experiment_settings):
    """Tests that a camelCase mapping loads into a fully defaulted experiment configuration"""
    cfg = gt_core.config.load_experiment(experiment_settings)
    assert cfg.experiment == "avg_tests"
    assert cfg.name == "avg_tests"
    assert cfg.family_size == 4
    assert cfg.structure().members == 20
    assert cfg.methods == ["alg1_r1", "alg1_rm", "bsa", "two_stage"]
    assert cfg.sweep_param == "none"
    assert cfg.sweep_values == [0.0]
    assert cfg.iterations == gt_core.defaults.lbp_iterations
    assert cfg.positive_branch == "label"
    assert cfg.trials == 3
    assert "avg_tests" in repr(cfg)


def test_load_experiment_sources(experiment_settings, config_file):
    """Tests that configurations load from paths and open files alike"""
    from_path = gt_core.config.load_experiment(str(config_file))
    assert from_path.families == 5

    with open(config_file, "rb") as source:
        assert gt_core.config.load_experiment(source).q == pytest.approx(0.3)

    with pytest.raises(InvalidConfig):
        gt_core.config.load_experiment(str(config_file.parent / "missing.json"))
    with pytest.raises(InvalidConfig):
        gt_core.config.load_experiment(BytesIO(b"{not json"))
    with pytest.raises(InvalidConfig):
        gt_core.config.load_experiment(BytesIO(b"[1, 2]"))


def test_sweeps(experiment_settings):
    """Tests that sweep points copy the configuration with the swept parameter replaced"""
    experiment_settings["sweep"] = {"param": "k_f", "values": [1, 2]}
    experiment_settings["methods"] = ["BSA", "hgbsa"]
    cfg = gt_core.config.load_experiment(experiment_settings)
    assert cfg.methods == ["bsa", "hgbsa"]
    assert cfg.sweep_values == [1.0, 2.0]

    point = cfg.at("k_f", 2.0)
    assert point.k_f == 2
    assert isinstance(point.k_f, int)
    assert cfg.k_f is None

    assert cfg.at("p", 0.7).p == pytest.approx(0.7)
    assert cfg.p == pytest.approx(0.5)
    assert cfg.at("none", 0.0).p == pytest.approx(0.5)


def test_infection_model(experiment_settings):
    """Tests that q is taken as given or derived from the sparse and linear regimes"""
    cfg = gt_core.config.load_experiment(experiment_settings)
    infection = cfg.infection_model(cfg.structure())
    assert isinstance(infection, gt_core.model.Probabilistic)
    assert infection.q == pytest.approx(0.3)

    del experiment_settings["q"]
    experiment_settings["expectedInfected"] = 4
    sparse = gt_core.config.load_experiment(experiment_settings)
    assert sparse.infection_q(sparse.structure()) == pytest.approx(4 / (20 * 0.5))

    experiment_settings["regime"] = "linear"
    experiment_settings["ratio"] = 0.1
    linear = gt_core.config.load_experiment(experiment_settings)
    assert linear.infection_q(linear.structure()) == pytest.approx(0.2)

    experiment_settings["regime"] = "sparse"
    experiment_settings["expectedInfected"] = 32
    too_many = gt_core.config.load_experiment(experiment_settings)
    with pytest.raises(InvalidConfig):
        too_many.infection_q(too_many.structure())

    combinatorial = gt_core.config.load_experiment(
        {"experiment": "avg_tests", "familySizes": [4, 4, 2], "model": "combinatorial", "kF": 2, "kM": 1}
    )
    infection = combinatorial.infection_model(combinatorial.structure())
    assert isinstance(infection, gt_core.model.Combinatorial)
    assert (infection.k_f, infection.k_m) == (2, 1)
    assert combinatorial.structure().family_sizes == (4, 4, 2)


@pytest.mark.parametrize(
    "changes",
    [
        {"experiment": "unknown"},
        {"families": None},
        {"p": 1.5},
        {"p": None},
        {"model": "combinatorial"},
        {"methods": ["comp_c"]},
        {"z": 0.8, "delta": 0.5},
        {"trials": 0},
        {"sweep": {"param": "families", "values": [1]}},
    ],
)
def test_invalid_experiments(experiment_settings, changes):
    """Tests that inconsistent configurations are refused as InvalidConfig"""
    experiment_settings.update(changes)
    settings = {key: value for key, value in experiment_settings.items() if value is not None}
    with pytest.raises(InvalidConfig):
        gt_core.config.load_experiment(settings)


def test_unknown_settings():
    """Tests that experiment configurations refuse settings they don't know"""
    with pytest.raises(InvalidConfig):
        gt_core.config.ExperimentConfig(experiment="avg_tests", bogus=1)


def test_load_design():
    """Tests that design configurations validate and carry the community structure they describe"""
    settings = gt_core.config.load_design(
        {"design": "bernoulli", "families": 2, "familySize": 3, "tests": 4, "theta": 0.5}
    )
    assert settings["structure"].members == 6
    assert settings["seed"] == gt_core.defaults.seed
    assert gt_core.designs.design_from_settings(settings).tests == 4

    with pytest.raises(InvalidConfig):
        gt_core.config.load_design({"design": "bernoulli", "families": 2, "familySize": 3, "tests": 4})
    with pytest.raises(InvalidConfig):
        gt_core.config.load_design({"design": "g2", "familySizes": [2, 2]})
    with pytest.raises(InvalidConfig):
        gt_core.config.load_design({"design": "hypercube", "familySizes": [2, 2]})


def test_noise_defaults(experiment_settings):
    """Tests that only noisy experiments default to a noisy channel"""
    assert gt_core.config.load_experiment(experiment_settings).z == 0.0
    noisy = dict(experiment_settings, experiment="noisy", positiveBranch="auto")
    cfg = gt_core.config.load_experiment(noisy)
    assert cfg.z == pytest.approx(gt_core.defaults.z)
    assert cfg.positive_branch == "auto"
    assert cfg.methods == ["repetition", "constant_weight", "two_stage"]
