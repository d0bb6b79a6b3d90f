"""gt_core/adaptive.py

Defines the adaptive identification algorithms: binary splitting, Hwang's generalized binary splitting, the
two-part adaptive community algorithm driven by family mixed samples, and the two-stage variant

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

import logging
import math

import numpy

from gt_core import bounds, types
from gt_core.channel import Pool, RepresentativeRule, TestOracle
from gt_core.decoders import comp, threshold_decode
from gt_core.designs import TestMatrix, community_g1, family_matrix, individual_matrix
from gt_core.exceptions import InvalidArgument
from gt_core.model import Combinatorial, generator

LOGGER = logging.getLogger(__name__)

ALGORITHMS = ("bsa", "hgbsa")
POSITIVE_BRANCHES = ("individual", "label")


class AdaptiveResult(object):
    """The estimated bits of the identified items and the number of tests the run spent"""

    __slots__ = ("estimates", "tests_used", "items", "family_estimates")

    def __init__(self, estimates, tests_used, items, family_estimates=None):
        self.estimates = numpy.asarray(estimates, dtype=numpy.uint8)
        self.tests_used = int(tests_used)
        self.items = numpy.asarray(items, dtype=numpy.int64)
        self.family_estimates = (
            None if family_estimates is None else numpy.asarray(family_estimates, numpy.uint8)
        )

    @property
    def infected(self):
        """The items estimated infected"""
        return self.items[self.estimates.astype(bool)]

    def errors(self, state):
        """Returns the (false negative, false positive) member counts of a whole-population run"""
        truth = state.member_bits[self.items].astype(bool)
        calls = self.estimates.astype(bool)
        return int(numpy.sum(truth & ~calls)), int(numpy.sum(~truth & calls))

    def __repr__(self):
        return "AdaptiveResult(infected={0}, tests_used={1})".format(
            int(self.estimates.sum()), self.tests_used
        )


def _items(items):
    return [int(item) for item in numpy.asarray(items, dtype=numpy.int64).ravel()]


def _pool_test(oracle, pools):
    if pools is None:
        return lambda group: oracle.pool_result(Pool(group, oracle.members))
    return lambda group: oracle.pool_result(Pool.union([pools[item] for item in group]))


def _isolate(group, is_positive):
    """Halves a positive group down to one infected item, returning it plus every item shown healthy"""
    cleared = []
    while len(group) > 1:
        half = (len(group) + 1) // 2
        if is_positive(group[:half]):
            group = group[:half]
        else:
            cleared.extend(group[:half])
            group = group[half:]
    return group[0], cleared


def _result(items, infected, tests_used):
    infected = set(infected)
    return AdaptiveResult([item in infected for item in items], tests_used, items)


def binary_splitting(items, oracle, pools=None):
    """Identifies the infected items by testing the unresolved set and halving every positive group.

       Every round opens with a test of the whole unresolved set, so k infected among n items take up to
       k * ceil(log2 n) + k + 1 tests: one infected among 8 items costs 5, one more than the k log2 n + k
       estimate, which leaves out the final all-clear test.

       pools maps an item to the pool that stands for it; by default item i is member i.
    """
    items = _items(items)
    is_positive = _pool_test(oracle, pools)
    start = oracle.tests

    infected = []
    remaining = items
    while remaining and is_positive(remaining):
        found, cleared = _isolate(remaining, is_positive)
        infected.append(found)
        resolved = set(cleared)
        resolved.add(found)
        remaining = [item for item in remaining if item not in resolved]
    return _result(items, infected, oracle.tests - start)


def _true_count(oracle, items, pools):
    bits = oracle.state.member_bits
    if pools is None:
        return int(bits[items].sum()) if items else 0
    return sum(1 for item in items if bits[pools[item].members].any())


def hgbsa(items, k_known, oracle, pools=None, estimated=False):
    """Hwang's generalized binary splitting for a known number of infected items.

       A group of 2^alpha items, alpha = floor(log2((n - k) / k)), is tested; a negative group is cleared and a
       positive one is binary searched for one infected item. Once n < 2k the rest is tested individually.
       Without k_known the count is read from the oracle's ground truth.

       With estimated=True k_known is only a guess: no item is called infected without a positive test, and
       the items left once the guess is used up go through binary splitting, so the calls stay exact.
    """
    items = _items(items)
    if k_known is None:
        k_known = _true_count(oracle, items, pools)
        estimated = False
    k = types.check(types.count, k_known, "k")
    if k > len(items):
        raise InvalidArgument("More infected than items", {"k": k, "items": len(items)})
    is_positive = _pool_test(oracle, pools)
    start = oracle.tests

    infected = []
    remaining = items
    while remaining and k:
        n = len(remaining)
        if n - k < k:
            tested = n
            for position, item in enumerate(remaining):
                if not estimated and n - position == k:
                    infected.extend(remaining[position:])
                    break
                if is_positive([item]):
                    infected.append(item)
                    k -= 1
                    if not k:
                        tested = position + 1
                        break
            remaining = remaining[tested:]
            break

        size = 2 ** int(math.floor(math.log2((n - k) / k)))
        group = remaining[:size]
        if not is_positive(group):
            remaining = remaining[size:]
            continue
        found, cleared = _isolate(group, is_positive)
        infected.append(found)
        resolved = set(cleared)
        resolved.add(found)
        remaining = [item for item in remaining if item not in resolved]
        k -= 1

    if estimated and remaining:
        infected.extend(binary_splitting(remaining, oracle, pools).infected.tolist())
    return _result(items, infected, oracle.tests - start)


def _run(algorithm, items, oracle, pools, count):
    if algorithm == "bsa":
        return binary_splitting(items, oracle, pools)
    if count is None:
        return hgbsa(items, None, oracle, pools)
    return hgbsa(items, min(count, len(items)), oracle, pools, estimated=True)


def expected_counts(structure, representatives, model):
    """Returns the rounded expected number of positive mixed samples and of infected members outside them"""
    positives = residual = 0.0
    sizes = structure.family_sizes
    if isinstance(model, Combinatorial):
        share = model.k_f / structure.families
        for size, infected, chosen in zip(sizes, model.per_family(structure), representatives):
            phi = bounds.phi_c(size, infected, len(chosen))
            positives += share * phi
            residual += share * (1 - phi) * infected
    else:
        for size, p, chosen in zip(sizes, model.per_family(structure), representatives):
            clean = (1 - p) ** len(chosen)
            positives += model.q * (1 - clean)
            residual += model.q * clean * (size - len(chosen)) * p
    return int(round(positives)), int(round(residual))


def adaptive_community(structure, rule, algorithm, oracle, counts=None, model=None, seed=None):
    """Identifies every member in two parts.

       Part 1 runs the algorithm over the F family mixed samples. Members of families whose mixed sample is
       positive are then tested individually, and the members of every other family are pooled into one set
       identified by a single run of the algorithm.
    """
    algorithm = types.check(types.OneOf(ALGORITHMS), algorithm, "algorithm")
    rule = RepresentativeRule.from_value(rule)
    representatives = rule.select(structure, seed)
    pools = [Pool(chosen) for chosen in representatives]
    if algorithm == "hgbsa" and counts is None and model is not None:
        counts = expected_counts(structure, representatives, model)
    first_count, second_count = (None, None) if counts is None else counts
    start = oracle.tests

    sampled = _run(algorithm, range(structure.families), oracle, pools, first_count)
    estimates = numpy.zeros(structure.members, dtype=numpy.uint8)
    positive = sampled.estimates.astype(bool)
    for family in numpy.flatnonzero(positive):
        for member in structure.members_of(family):
            estimates[member] = oracle.pool_result(Pool([member]))

    remainder = numpy.flatnonzero(~positive[structure.member_families])
    pooled = _run(algorithm, remainder, oracle, None, second_count)
    estimates[remainder] = pooled.estimates
    LOGGER.debug(
        "%s: %d positive mixed samples, %d members pooled",
        algorithm,
        int(positive.sum()),
        remainder.size,
    )
    return AdaptiveResult(
        estimates, oracle.tests - start, numpy.arange(structure.members), sampled.estimates
    )


def _stage_two_design(stage2, width, random):
    if stage2 is None or not width:
        return None
    design = stage2(width, random) if callable(stage2) else stage2
    if not isinstance(design, TestMatrix) or design.members != width:
        raise InvalidArgument(
            "Stage two design doesn't match the remaining members",
            {"width": getattr(design, "members", None), "remaining": width},
        )
    return design


def two_stage(
    structure,
    rule,
    stage1=None,
    stage2=None,
    state=None,
    noise=None,
    seed=None,
    threshold=None,
    positive_branch="individual",
):
    """Runs one non-adaptive round over the family mixed samples and, after decoding the family statuses,
       one round over the members.

       Members of positive families are tested individually (or, with positive_branch="label", called
       infected outright). The remaining members are tested with stage2, a TestMatrix of matching width or a
       callable (width, rng) -> TestMatrix, and decoded with COMP, or with the threshold rule when threshold
       is given.
    """
    positive_branch = types.check(
        types.OneOf(POSITIVE_BRANCHES), positive_branch, "positive_branch"
    )
    random = generator(seed)
    oracle = TestOracle(state, noise, random)
    n = structure.members

    g1 = community_g1(structure, stage1, rule, random)
    families = family_matrix(g1, structure)
    outcomes = oracle.run(g1)
    if threshold is None:
        family_calls = comp(families, outcomes).hard_calls
    else:
        family_calls = threshold_decode(families, outcomes, threshold).hard_calls

    estimates = numpy.zeros(n, dtype=numpy.uint8)
    flagged = family_calls[structure.member_families].astype(bool)
    positive_members = numpy.flatnonzero(flagged)
    if positive_branch == "label":
        estimates[positive_members] = 1
    elif positive_members.size:
        estimates[positive_members] = oracle.run(individual_matrix(positive_members, n))

    remainder = numpy.flatnonzero(~flagged)
    design = _stage_two_design(stage2, remainder.size, random)
    if design is not None:
        observed = oracle.run(design.embed(remainder, n))
        if threshold is None:
            estimates[remainder] = comp(design, observed).hard_calls
        else:
            estimates[remainder] = threshold_decode(design, observed, threshold).hard_calls
    return AdaptiveResult(estimates, oracle.tests, numpy.arange(n), family_calls)
