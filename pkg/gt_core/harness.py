"""gt_core/harness.py

Defines the Monte Carlo experiment runners that measure test counts and error rates of the community-aware
algorithms and emit them as metrics records

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

import csv
import io
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor

import numpy

from gt_core import bounds, defaults
from gt_core.adaptive import adaptive_community, binary_splitting, hgbsa, two_stage
from gt_core.channel import RepresentativeRule, TestOracle
from gt_core.decoders import (
    LbpConfig,
    ThresholdConfig,
    community_comp,
    comp,
    lbp_decode,
    repetition_decode,
    threshold_decode,
)
from gt_core.designs import (
    BlockDesignSpec,
    OnePerFamily,
    Sparse,
    bernoulli_matrix,
    community_g1,
    community_g2,
    constant_column_weight_matrix,
    repetition_matrix,
    stack,
)
from gt_core.directives import Timer
from gt_core.exceptions import InvalidConfig
from gt_core.model import Combinatorial, Probabilistic, Seed, random_asymmetric_community
from gt_core.output_format import METRICS_HEADER

LOGGER = logging.getLogger(__name__)

STATE, DESIGN, NOISE = 0, 1, 2
ALG1 = re.compile(r"^alg1(_hgbsa)?_r(\d+|m)$")
ALGORITHM_METHODS = {
    "bsa": "bsa",
    "hgbsa": "hgbsa",
    "two-stage": "two_stage",
    "two_stage": "two_stage",
}


class MetricsRecord(object):
    """One aggregated metric of one sweep point"""

    __slots__ = METRICS_HEADER

    def __init__(self, experiment, sweep_param, value, metric, mean, stderr, trials, seed):
        self.experiment = experiment
        self.sweep_param = sweep_param
        self.value = float(value)
        self.metric = metric
        self.mean = float(mean)
        self.stderr = float(stderr)
        self.trials = int(trials)
        self.seed = int(seed)

    def __eq__(self, other):
        return isinstance(other, MetricsRecord) and all(
            getattr(self, name) == getattr(other, name) for name in self.__slots__
        )

    def __repr__(self):
        return "MetricsRecord({0}, {1}={2}, {3}={4}±{5})".format(
            self.experiment, self.sweep_param, self.value, self.metric, self.mean, self.stderr
        )


def stderr(samples):
    """The normal-approximation standard error of the mean of samples"""
    samples = numpy.asarray(samples, dtype=float)
    if samples.size < 2:
        return 0.0
    return float(samples.std(ddof=1) / math.sqrt(samples.size))


def rate(errors, totals):
    """Returns the error rate pooled over trials and the standard error of the per-trial rates.

       Members of one trial share a design and a decoder run, so the trial is the sampling unit; trials
       with nothing to get wrong carry no rate.
    """
    errors = numpy.asarray(errors, dtype=float).ravel()
    totals = numpy.asarray(totals, dtype=float).ravel()
    counted = totals > 0
    if not counted.any():
        return 0.0, 0.0
    return float(errors.sum() / totals.sum()), stderr(errors[counted] / totals[counted])


def map_trials(function, cfg):
    """Runs function(trial) for every trial on cfg.workers threads, returning results in trial order"""
    if cfg.workers == 1:
        return [function(trial) for trial in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
        return list(executor.map(function, range(cfg.trials)))


def _record(point, value, metric, mean, error=0.0):
    return MetricsRecord(
        point.name, point.sweep_param, value, metric, mean, error, point.trials, point.seed
    )


def run_adaptive(method, structure, state, infection, seed, index=0):
    """Runs one zero-error adaptive method on state and returns its AdaptiveResult"""
    oracle = TestOracle(state, None, seed.generator(NOISE, index))
    members = range(structure.members)
    if method == "bsa":
        return binary_splitting(members, oracle)
    if method == "hgbsa":
        return hgbsa(members, None, oracle)
    if method == "two_stage":
        design_seed = seed.generator(DESIGN, index)
        return two_stage(structure, None, OnePerFamily(), None, state, None, design_seed)

    match = ALG1.match(method)
    if not match:
        raise InvalidConfig("Unknown adaptive method", {"method": method})
    algorithm = "hgbsa" if match.group(1) else "bsa"
    return adaptive_community(
        structure,
        RepresentativeRule.from_value(match.group(2)),
        algorithm,
        oracle,
        model=infection,
        seed=seed.generator(DESIGN, index),
    )


def _expected_tests(method, structure, infection):
    match = ALG1.match(method)
    if not match or not structure.symmetric:
        return None
    size = structure.family_size
    count = size if match.group(2) == "m" else int(match.group(2))
    if count > size:
        return None
    if isinstance(infection, Combinatorial):
        if isinstance(infection.k_m, tuple):
            return None
        variant = "hgbsa" if match.group(1) else "bsa"
        return bounds.expected_tests_combinatorial(
            structure.families, size, infection.k_f, infection.k_m, count, variant
        )
    if match.group(1) or isinstance(infection.p, tuple):
        return None
    return bounds.expected_tests_probabilistic(
        structure.families, size, infection.q, infection.p, count
    )


def _lower_bounds(structure, infection):
    if isinstance(infection, Combinatorial):
        return {
            "bound.counting": bounds.counting_bound(
                structure.members, int(round(infection.expected_infected(structure)))
            ),
            "bound.community": bounds.combinatorial_community_bound(
                structure, infection.k_f, infection.k_m
            ),
        }
    return {
        "bound.counting": bounds.counting_bound_probabilistic(
            structure.members, infection.expected_infected(structure) / structure.members
        ),
        "bound.community": bounds.probabilistic_community_bound(
            structure, infection.q, infection.p
        ),
    }


def _points(cfg):
    for value in cfg.sweep_values:
        yield value, cfg.at(cfg.sweep_param, value)


def run_avg_tests_experiment(cfg):
    """Measures the mean number of tests each zero-error adaptive method needs at every sweep point"""
    structure = cfg.structure()
    records = []
    for value, point in _points(cfg):
        timer = Timer(point.trials)
        infection = point.infection_model(structure)

        def trial(number, point=point, infection=infection):
            seed = Seed(point.seed, number)
            state = infection.sample(structure, seed.generator(STATE))
            row = {}
            for index, method in enumerate(point.methods):
                result = run_adaptive(method, structure, state, infection, seed, index)
                row[method] = (result.tests_used,) + result.errors(state) + (state.k,)
            return row

        rows = map_trials(trial, point)
        records.extend(_error_records(point, value, rows, point.methods, structure.members))
        for method in point.methods:
            expected = _expected_tests(method, structure, infection)
            if expected is not None:
                records.append(_record(point, value, method + ".bound", expected))
        for metric, bound in _lower_bounds(structure, infection).items():
            records.append(_record(point, value, metric, bound))
        LOGGER.info(
            "%s %s=%s: %d trials in %s (%.1f trials/s)",
            point.name,
            point.sweep_param,
            value,
            point.trials,
            timer,
            timer.throughput,
        )
    return records


def calibrate_tests(cfg):
    """The mean test count, rounded up, of the zero-error two-stage run with one test per family"""
    structure = cfg.structure()
    infection = cfg.infection_model(structure)

    def trial(number):
        seed = Seed(cfg.seed, number)
        state = infection.sample(structure, seed.generator(STATE))
        return run_adaptive("two_stage", structure, state, infection, seed).tests_used

    tests = int(math.ceil(numpy.mean(map_trials(trial, cfg))))
    LOGGER.info("%s: calibrated to %d tests", cfg.name, tests)
    return tests


def priors(infection, structure):
    """Returns the (q, per-family p) priors decoders use for an infection model"""
    if isinstance(infection, Combinatorial):
        infected = numpy.asarray(infection.per_family(structure), dtype=float)
        return infection.k_f / structure.families, tuple((infected / structure.sizes).tolist())
    return infection.q, tuple(infection.per_family(structure))


def column_weight(tests, expected_infected):
    """The constant column weight round(T ln 2 / k), kept within 1..T"""
    weight = int(round(tests * math.log(2) / max(expected_infected, 1.0)))
    return min(max(weight, 1), tests)


def run_nonadaptive(method, point, structure, state, tests, seed, index=0):
    """Runs one non-adaptive encoder / decoder pair with T tests; returns (DecodeResult, tests used)"""
    infection = point.infection_model(structure)
    random = seed.generator(DESIGN, index)
    oracle = TestOracle(state, point.z, seed.generator(NOISE, index))
    threshold = ThresholdConfig(point.z, point.delta) if point.z else None

    if method == "comp_c":
        size, families = structure.family_size, structure.families
        rows = min(max((tests - families) // size, 1), families)
        g1 = community_g1(structure, OnePerFamily(), None, random)
        g2 = community_g2(structure, BlockDesignSpec.balanced(families, rows), random)
        outcomes = oracle.run(stack(g1, g2))
        split = g1.tests
        result = community_comp(g1, g2, outcomes[:split], outcomes[split:], structure, threshold)
        return result, oracle.tests

    weight = point.column_weight or column_weight(tests, infection.expected_infected(structure))
    design = constant_column_weight_matrix(tests, structure.members, weight, random)
    outcomes = oracle.run(design)
    if method == "comp_nc":
        if threshold is None:
            return comp(design, outcomes, structure), oracle.tests
        return threshold_decode(design, outcomes, threshold, structure), oracle.tests

    q, p = priors(infection, structure)
    lbp = LbpConfig(q, p, point.z, point.iterations, community_aware=method == "c_lbp")
    return lbp_decode(design, structure, lbp, outcomes), oracle.tests


def _error_records(point, value, rows, methods, members):
    records = []
    for method in methods:
        tests, false_negatives, false_positives, infected = numpy.array(
            [row[method] for row in rows], dtype=float
        ).reshape(-1, 4).T
        records.append(_record(point, value, method + ".tests", tests.mean(), stderr(tests)))
        fn_rate = rate(false_negatives, infected)
        records.append(_record(point, value, method + ".fn_rate", *fn_rate))
        fp_rate = rate(false_positives, members - infected)
        records.append(_record(point, value, method + ".fp_rate", *fp_rate))
    return records


def run_error_rate_experiment(cfg):
    """Measures the FN / FP rates of the non-adaptive encoders and decoders at a fixed number of tests"""
    structure = cfg.structure()
    records = []
    for value, point in _points(cfg):
        timer = Timer(point.trials)
        tests = point.tests or calibrate_tests(point)
        infection = point.infection_model(structure)

        def trial(number, point=point, infection=infection, tests=tests):
            seed = Seed(point.seed, number)
            state = infection.sample(structure, seed.generator(STATE))
            row = {}
            for index, method in enumerate(point.methods):
                result, used = run_nonadaptive(method, point, structure, state, tests, seed, index)
                row[method] = (used,) + result.errors(state) + (state.k,)
            return row

        rows = map_trials(trial, point)
        records.extend(_error_records(point, value, rows, point.methods, structure.members))
        LOGGER.info(
            "%s %s=%s: T=%d, %d trials in %s (%.1f per second)",
            point.name,
            point.sweep_param,
            value,
            tests,
            point.trials,
            timer,
            timer.throughput,
        )
    return records


def run_asymmetric_experiment(cfg):
    """Measures, over random asymmetric communities, the ratio of each method's tests to the probabilistic
       community bound
    """
    records = []
    for value, point in _points(cfg):
        timer = Timer(point.trials)
        q = defaults.asymmetric_q if point.q is None else point.q
        if q <= 0:
            raise InvalidConfig("The asymmetric experiment needs q > 0", {"q": q})

        def trial(number, point=point, q=q):
            seed = Seed(point.seed, number)
            structure, p = random_asymmetric_community(
                point.families, point.size_range, point.p_range, seed.generator(STATE, 0)
            )
            infection = Probabilistic(q, p)
            state = infection.sample(structure, seed.generator(STATE, 1))
            bound = bounds.probabilistic_community_bound(structure, q, p)
            return {
                method: run_adaptive(method, structure, state, infection, seed, index).tests_used
                / bound
                for index, method in enumerate(point.methods)
            }

        rows = map_trials(trial, point)
        for method in point.methods:
            ratios = numpy.asarray([row[method] for row in rows])
            records.append(_record(point, value, method + ".ratio", ratios.mean(), stderr(ratios)))
            first, median, third = numpy.percentile(ratios, (25, 50, 75))
            records.append(_record(point, value, method + ".ratio_q1", first))
            records.append(_record(point, value, method + ".ratio_median", median))
            records.append(_record(point, value, method + ".ratio_q3", third))
        LOGGER.info(
            "%s %s=%s: %d instances in %s (%.1f per second)",
            point.name,
            point.sweep_param,
            value,
            point.trials,
            timer,
            timer.throughput,
        )
    return records


def run_noisy_scheme(method, point, structure, state, tests, seed, index=0):
    """Runs one noisy threshold-decoded scheme; returns (result, tests used, {"fn": bound, "fp": bound})"""
    infection = point.infection_model(structure)
    expected = max(infection.expected_infected(structure), 1.0)
    threshold = ThresholdConfig(point.z, point.delta)
    random = seed.generator(DESIGN, index)
    oracle = TestOracle(state, point.z, seed.generator(NOISE, index))
    n = structure.members
    slack = dict(z=point.z, delta=point.delta)

    if method == "repetition":
        repetitions = max(tests // n, 1)
        outcomes = oracle.run(repetition_matrix(n, repetitions))
        result = repetition_decode(outcomes, n, repetitions, threshold)
        limits = {
            error: bounds.noisy_bound("repetition", error, T=repetitions * n, n=n, **slack)
            for error in bounds.ERRORS
        }
    elif method == "constant_weight":
        weight = point.column_weight or column_weight(tests, expected)
        design = constant_column_weight_matrix(tests, n, weight, random)
        result = threshold_decode(design, oracle.run(design), threshold, structure)
        limits = {
            error: bounds.noisy_bound("constant_weight", error, L=weight, **slack)
            for error in bounds.ERRORS
        }
    elif method == "bernoulli":
        theta = point.theta or min(1.0 / expected, 1.0)
        design = bernoulli_matrix(tests, n, theta, random)
        result = threshold_decode(design, oracle.run(design), threshold, structure)
        limits = {
            error: bounds.noisy_bound(
                "bernoulli", error, T=tests, theta=theta, k=int(round(expected)), **slack
            )
            for error in bounds.ERRORS
        }
    else:
        stage_tests = point.stage1_tests or tests
        q, p = priors(infection, structure)
        families = max(int(round(q * structure.families)), 1)
        mode = Sparse(stage_tests, column_weight(stage_tests, families))
        branch = point.positive_branch
        if branch == "auto":
            branch = "label" if numpy.mean(p) > defaults.heavy_infection_threshold else "individual"
        result = two_stage(structure, None, mode, None, state, point.z, random, threshold, branch)
        limits = {
            "fn": bounds.noisy_bound("two_stage", "fn", T1=stage_tests, k_f=families, **slack)
        }
        return result, result.tests_used, limits
    return result, oracle.tests, limits


def run_noisy_experiment(cfg):
    """Measures threshold-decoded FN / FP rates of noisy designs next to their Chernoff bounds"""
    structure = cfg.structure()
    records = []
    for value, point in _points(cfg):
        timer = Timer(point.trials)
        tests = point.tests or calibrate_tests(point)
        limits = {}

        def trial(number, point=point, tests=tests):
            seed = Seed(point.seed, number)
            infection = point.infection_model(structure)
            state = infection.sample(structure, seed.generator(STATE))
            row = {}
            for index, method in enumerate(point.methods):
                result, used, limits[method] = run_noisy_scheme(
                    method, point, structure, state, tests, seed, index
                )
                row[method] = (used,) + result.errors(state) + (state.k,)
            return row

        rows = map_trials(trial, point)
        records.extend(_error_records(point, value, rows, point.methods, structure.members))
        for method in point.methods:
            for error, limit in sorted(limits[method].items()):
                records.append(_record(point, value, "{0}.{1}_bound".format(method, error), limit))
        LOGGER.info(
            "%s %s=%s: T=%d, %d trials in %s (%.1f per second)",
            point.name,
            point.sweep_param,
            value,
            tests,
            point.trials,
            timer,
            timer.throughput,
        )
    return records


EXPERIMENTS = {
    "avg_tests": run_avg_tests_experiment,
    "error_rate": run_error_rate_experiment,
    "asymmetric": run_asymmetric_experiment,
    "noisy": run_noisy_experiment,
}


def run_experiment(cfg):
    """Runs the experiment cfg names and returns its metrics records"""
    LOGGER.info(
        "Starting %s (%s) with %d trials, seed %d", cfg.name, cfg.experiment, cfg.trials, cfg.seed
    )
    return EXPERIMENTS[cfg.experiment](cfg)


def simulate_trials(cfg, algorithm, representatives="M"):
    """Returns (trial, tests_used, fn, fp) rows of one algorithm over cfg.trials sampled states"""
    if algorithm == "alg1":
        rule = RepresentativeRule.from_value(representatives)
        method = "alg1_r{0}".format("m" if rule.count is None else rule.count)
    elif algorithm in ALGORITHM_METHODS:
        method = ALGORITHM_METHODS[algorithm]
    else:
        raise InvalidConfig("Unknown algorithm", {"algorithm": algorithm})
    structure = cfg.structure()
    infection = cfg.infection_model(structure)

    def trial(number):
        seed = Seed(cfg.seed, number)
        state = infection.sample(structure, seed.generator(STATE))
        result = run_adaptive(method, structure, state, infection, seed)
        return (number, result.tests_used) + result.errors(state)

    return map_trials(trial, cfg)


def write_records(records, path=None, output_format=None):
    """Renders records with output_format (the metrics CSV by default), writing them to path when given"""
    output_format = output_format or defaults.output_format
    content = output_format(records)
    if path is not None:
        with open(path, "wb") as output:
            output.write(content)
    return content


def read_records(source):
    """Reads metrics records back from CSV text, bytes, an open file or a path"""
    if isinstance(source, bytes):
        source = source.decode("utf8")
    if isinstance(source, str) and "\n" not in source:
        with open(source, encoding="utf-8") as records_file:
            source = records_file.read()
    elif hasattr(source, "read"):
        source = source.read()
        source = source.decode("utf8") if isinstance(source, bytes) else source

    reader = csv.DictReader(io.StringIO(source))
    if tuple(reader.fieldnames or ()) != METRICS_HEADER:
        raise InvalidConfig("Unexpected metrics header", {"header": reader.fieldnames})
    return [MetricsRecord(**row) for row in reader]
