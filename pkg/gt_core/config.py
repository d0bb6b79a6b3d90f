"""gt_core/config.py

Defines the marshmallow schemas that validate experiment and design configuration files

Copyright (C) 2016  Timothy Edmund Crosley

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
from __future__ import absolute_import

import re

from marshmallow import (
    EXCLUDE,
    Schema,
    ValidationError,
    fields,
    post_load,
    pre_load,
    validate,
    validates_schema,
)

from gt_core import defaults, input_format, types
from gt_core.exceptions import InvalidConfig
from gt_core.model import Combinatorial, CommunityStructure, Probabilistic

EXPERIMENTS = ("avg_tests", "error_rate", "asymmetric", "noisy")
MODELS = ("combinatorial", "probabilistic")
REGIMES = ("sparse", "linear")
SWEEP_PARAMS = ("none", "p", "q", "k_f", "k_m", "tests", "z", "delta")
ADAPTIVE_METHODS = re.compile(r"^(bsa|hgbsa|two_stage|alg1(_hgbsa)?_r(\d+|m))$")
METHODS = {
    "avg_tests": ADAPTIVE_METHODS,
    "asymmetric": ADAPTIVE_METHODS,
    "error_rate": re.compile(r"^(comp_c|comp_nc|c_lbp|nc_lbp)$"),
    "noisy": re.compile(r"^(repetition|constant_weight|bernoulli|two_stage)$"),
}
DEFAULT_METHODS = {
    "avg_tests": ["alg1_r1", "alg1_rm", "bsa", "two_stage"],
    "asymmetric": ["bsa", "alg1_r1", "alg1_rm"],
    "error_rate": ["comp_c", "c_lbp", "comp_nc"],
    "noisy": ["repetition", "constant_weight", "two_stage"],
}
DESIGNS = ("community", "g1", "g2", "bernoulli", "constant_weight", "repetition")
POSITIVE_BRANCHES = ("label", "individual", "auto")

probability = validate.Range(min=0, max=1)
positive = validate.Range(min=1)
non_negative = validate.Range(min=0)
seed_range = validate.Range(min=0, max=2 ** 64 - 1)


class ExperimentConfig(object):
    """Every parameter of one Monte Carlo experiment; sweep_param / sweep_values name the swept axis"""

    __slots__ = (
        "experiment",
        "name",
        "families",
        "family_size",
        "family_sizes",
        "size_range",
        "p_range",
        "model",
        "p",
        "q",
        "k_f",
        "k_m",
        "regime",
        "expected_infected",
        "ratio",
        "sweep_param",
        "sweep_values",
        "methods",
        "tests",
        "stage1_tests",
        "column_weight",
        "theta",
        "z",
        "delta",
        "iterations",
        "positive_branch",
        "trials",
        "seed",
        "workers",
        "out",
    )

    def __init__(self, **settings):
        for name in self.__slots__:
            setattr(self, name, settings.pop(name, None))
        if settings:
            raise InvalidConfig("Unknown experiment settings", {"unknown": sorted(settings)})

    def at(self, param, value):
        """Returns a copy of this configuration with the swept parameter set to value"""
        point = ExperimentConfig(**{name: getattr(self, name) for name in self.__slots__})
        if param != "none":
            setattr(point, param, int(value) if param in ("k_f", "k_m", "tests") else value)
        return point

    def structure(self):
        """Returns the community of a symmetric or explicitly sized experiment"""
        if self.family_sizes:
            return CommunityStructure(self.family_sizes)
        return CommunityStructure([self.family_size] * self.families)

    def infection_model(self, structure):
        """Returns the infection model, deriving q from the regime when it isn't given"""
        if self.model == "combinatorial":
            return Combinatorial(self.k_f, self.k_m)
        return Probabilistic(self.infection_q(structure), self.p)

    def infection_q(self, structure):
        if self.q is not None:
            return self.q
        if self.p is None or self.p <= 0:
            raise InvalidConfig("p must be positive to derive q", {"p": self.p})
        if self.regime == "linear":
            q = self.ratio / self.p
        else:
            q = self.expected_infected / (structure.members * self.p)
        if q > 1:
            raise InvalidConfig("Derived q exceeds 1", {"q": q, "p": self.p, "regime": self.regime})
        return q

    def __repr__(self):
        return "ExperimentConfig({0}, trials={1}, seed={2})".format(
            self.experiment, self.trials, self.seed
        )


class SweepSchema(Schema):
    param = fields.String(load_default="none", validate=validate.OneOf(SWEEP_PARAMS))
    values = fields.List(fields.Float(allow_nan=False), load_default=lambda: [0.0])


class ExperimentSchema(Schema):
    """An experiment configuration file"""

    class Meta:
        unknown = EXCLUDE

    experiment = fields.String(required=True, validate=validate.OneOf(EXPERIMENTS))
    name = fields.String(load_default=None)
    families = fields.Integer(load_default=None, validate=positive)
    family_size = fields.Integer(load_default=None, validate=positive)
    family_sizes = fields.List(fields.Integer(validate=positive), load_default=None)
    size_range = fields.Tuple(
        (fields.Integer(validate=positive), fields.Integer(validate=positive)),
        load_default=defaults.asymmetric_size_range,
    )
    p_range = fields.Tuple(
        (fields.Float(validate=probability), fields.Float(validate=probability)),
        load_default=defaults.asymmetric_p_range,
    )
    model = fields.String(load_default="probabilistic", validate=validate.OneOf(MODELS))
    p = fields.Float(load_default=None, validate=probability)
    q = fields.Float(load_default=None, validate=probability)
    k_f = fields.Integer(load_default=None, validate=non_negative)
    k_m = fields.Integer(load_default=None, validate=non_negative)
    regime = fields.String(load_default="sparse", validate=validate.OneOf(REGIMES))
    expected_infected = fields.Float(
        load_default=defaults.expected_infected, validate=validate.Range(min=0)
    )
    ratio = fields.Float(load_default=defaults.linear_ratio, validate=probability)
    sweep = fields.Nested(SweepSchema, load_default=lambda: {"param": "none", "values": [0.0]})
    methods = fields.List(fields.String(), load_default=None)
    tests = fields.Integer(load_default=None, validate=positive)
    stage1_tests = fields.Integer(load_default=None, validate=positive)
    column_weight = fields.Integer(load_default=None, validate=positive)
    theta = fields.Float(load_default=None, validate=probability)
    z = fields.Float(load_default=None, validate=probability)
    delta = fields.Float(load_default=defaults.delta, validate=validate.Range(min=0))
    iterations = fields.Integer(load_default=defaults.lbp_iterations, validate=positive)
    positive_branch = fields.String(
        load_default="label", validate=validate.OneOf(POSITIVE_BRANCHES)
    )
    trials = fields.Integer(load_default=defaults.trials, validate=positive)
    seed = fields.Integer(load_default=defaults.seed, validate=seed_range)
    workers = fields.Integer(load_default=defaults.workers, validate=positive)
    out = fields.String(load_default=None)

    @pre_load
    def underscore_keys(self, data, **kwargs):
        return input_format.underscore_dict(data) if isinstance(data, dict) else data

    @validates_schema
    def check_consistency(self, data, **kwargs):
        experiment = data.get("experiment")
        if experiment == "asymmetric":
            if not data.get("families"):
                raise ValidationError("The asymmetric experiment needs families", "families")
        elif not data.get("family_sizes") and not (
            data.get("families") and data.get("family_size")
        ):
            raise ValidationError("Give family_sizes or both families and family_size", "families")

        if data.get("model") == "combinatorial":
            if data.get("k_f") is None or data.get("k_m") is None:
                raise ValidationError("The combinatorial model needs k_f and k_m", "model")
        elif data.get("p") is None and experiment != "asymmetric":
            raise ValidationError("The probabilistic model needs p", "p")

        if (data.get("z") or 0.0) * (1 + data.get("delta", 0.0)) > 1:
            raise ValidationError("z(1 + delta) must not exceed 1", "delta")

        pattern = METHODS.get(experiment)
        for method in data.get("methods") or ():
            if pattern is not None and not pattern.match(method.lower()):
                raise ValidationError(
                    "Unknown method {0} for {1}".format(method, experiment), "methods"
                )

    @post_load
    def make_config(self, data, **kwargs):
        sweep = data.pop("sweep")
        data["sweep_param"] = sweep["param"]
        data["sweep_values"] = list(sweep["values"])
        methods = data["methods"] or DEFAULT_METHODS[data["experiment"]]
        data["methods"] = [method.lower() for method in methods]
        data["name"] = data["name"] or data["experiment"]
        if data["z"] is None:
            data["z"] = defaults.z if data["experiment"] == "noisy" else 0.0
        return ExperimentConfig(**data)


class DesignSchema(Schema):
    """A test design configuration file"""

    class Meta:
        unknown = EXCLUDE

    design = fields.String(required=True, validate=validate.OneOf(DESIGNS))
    families = fields.Integer(load_default=None, validate=positive)
    family_size = fields.Integer(load_default=None, validate=positive)
    family_sizes = fields.List(fields.Integer(validate=positive), load_default=None)
    tests = fields.Integer(load_default=None, validate=positive)
    theta = fields.Float(load_default=None, validate=probability)
    column_weight = fields.Integer(load_default=None, validate=non_negative)
    repetitions = fields.Integer(load_default=None, validate=positive)
    block_rows = fields.Integer(load_default=None, validate=positive)
    representatives = fields.Raw(load_default=None)
    canonical = fields.Boolean(load_default=False)
    seed = fields.Integer(load_default=defaults.seed, validate=seed_range)

    @pre_load
    def underscore_keys(self, data, **kwargs):
        return input_format.underscore_dict(data) if isinstance(data, dict) else data

    @validates_schema
    def check_community(self, data, **kwargs):
        if not data.get("family_sizes") and not (data.get("families") and data.get("family_size")):
            raise ValidationError("Give family_sizes or both families and family_size", "families")
        needs = {
            "bernoulli": ("tests", "theta"),
            "constant_weight": ("tests", "column_weight"),
            "repetition": ("repetitions",),
            "g2": ("block_rows",),
            "community": ("block_rows",),
        }
        for name in needs.get(data.get("design"), ()):
            if data.get(name) is None:
                raise ValidationError("The {0} design needs {1}".format(data["design"], name), name)

    @post_load
    def make_structure(self, data, **kwargs):
        sizes = data.get("family_sizes") or [data["family_size"]] * data["families"]
        data["structure"] = CommunityStructure(sizes)
        return data


experiment_config = types.MarshmallowInputSchema(ExperimentSchema())
design_config = types.MarshmallowInputSchema(DesignSchema())


def _load(kind, source):
    if isinstance(source, dict):
        return kind(source)
    try:
        if hasattr(source, "read"):
            content = input_format.json_underscore(source)
        else:
            with open(source, "rb") as config_file:
                content = input_format.json_underscore(config_file)
    except OSError as exception:
        raise InvalidConfig(
            "Unable to read configuration", {"source": str(source), "reason": str(exception)}
        )
    except ValueError as exception:
        raise InvalidConfig("Configuration is not valid JSON", {"reason": str(exception)})
    if not isinstance(content, dict):
        raise InvalidConfig("Configuration must be a JSON object", {"type": type(content).__name__})
    return kind(content)


def load_experiment(source):
    """Returns the ExperimentConfig held by a mapping, an open file or a JSON file path"""
    return _load(experiment_config, source)


def load_design(source):
    """Returns the validated design settings held by a mapping, an open file or a JSON file path"""
    return _load(design_config, source)
