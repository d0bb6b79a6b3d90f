"""gt_core/decoders.py

Defines the decoders that recover member and family statuses from the outcomes of non-adaptive designs:
COMP, the community COMP of the G1 / G2 design, threshold rules for noisy tests, and loopy belief propagation

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
import numbers

import numpy
from scipy import special

from gt_core import defaults, types
from gt_core.designs import family_matrix
from gt_core.exceptions import InvalidArgument, NumericDegeneracy

LOGGER = logging.getLogger(__name__)


class DecodeResult(object):
    """Hard per-member calls, optionally with family calls and posterior marginals"""

    __slots__ = ("hard_calls", "family_calls", "posteriors", "family_posteriors")

    def __init__(self, hard_calls, family_calls=None, posteriors=None, family_posteriors=None):
        self.hard_calls = numpy.asarray(hard_calls, dtype=numpy.uint8)
        self.family_calls = (
            None if family_calls is None else numpy.asarray(family_calls, numpy.uint8)
        )
        self.posteriors = None if posteriors is None else numpy.asarray(posteriors, dtype=float)
        self.family_posteriors = (
            None if family_posteriors is None else numpy.asarray(family_posteriors, dtype=float)
        )

    def errors(self, state):
        """Returns the (false negative, false positive) member counts against the true state"""
        truth = state.member_bits.astype(bool)
        calls = self.hard_calls.astype(bool)
        return int(numpy.sum(truth & ~calls)), int(numpy.sum(~truth & calls))

    def __repr__(self):
        return "DecodeResult(positives={0})".format(int(self.hard_calls.sum()))


class ThresholdConfig(object):
    """The flip probability z and slack delta of the threshold decision rules"""

    __slots__ = ("z", "delta")

    def __init__(self, z=0.0, delta=0.0):
        self.z = types.check(types.probability, z, "z")
        self.delta = types.check(types.non_negative, delta, "delta")
        if self.z * (1 + self.delta) > 1:
            raise InvalidArgument(
                "z(1 + delta) must not exceed 1", {"z": self.z, "delta": self.delta}
            )

    @property
    def fraction(self):
        """z(1 + delta), the tolerated fraction of negative outcomes"""
        return self.z * (1 + self.delta)

    def __repr__(self):
        return "ThresholdConfig(z={0}, delta={1})".format(self.z, self.delta)


class LbpConfig(object):
    """Settings of the loopy belief propagation decoder"""

    __slots__ = ("iterations", "z", "q", "p", "community_aware")

    def __init__(self, q, p, z=0.0, iterations=defaults.lbp_iterations, community_aware=True):
        self.iterations = types.check(types.positive_count, iterations, "iterations")
        self.z = types.check(types.probability, z, "z")
        self.q = types.check(types.probability, q, "q")
        if isinstance(p, (numbers.Number, str)):
            self.p = types.check(types.probability, p, "p")
        else:
            self.p = tuple(types.check(types.probability, value, "p") for value in p)
        self.community_aware = bool(community_aware)

    def family_p(self, structure):
        """Returns p_j for every family"""
        if isinstance(self.p, tuple):
            if len(self.p) != structure.families:
                raise InvalidArgument(
                    "Expected one p per family", {"p": len(self.p), "F": structure.families}
                )
            return numpy.asarray(self.p, dtype=float)
        return numpy.full(structure.families, self.p, dtype=float)

    def __repr__(self):
        return "LbpConfig(iterations={0}, z={1}, q={2}, community_aware={3})".format(
            self.iterations, self.z, self.q, self.community_aware
        )


def _outcomes(matrix, outcomes):
    outcomes = numpy.asarray(outcomes, dtype=numpy.uint8).ravel()
    if outcomes.size != matrix.tests:
        raise InvalidArgument(
            "Outcome vector doesn't match the design",
            {"outcomes": outcomes.size, "T": matrix.tests},
        )
    return outcomes


def _negative_counts(matrix, outcomes):
    negative_rows = matrix.csr[numpy.flatnonzero(outcomes == 0)]
    return numpy.bincount(negative_rows.indices, minlength=matrix.members)


def _family_calls(structure, hard_calls):
    if structure is None:
        return None
    return structure.family_totals(hard_calls) > 0


def comp(matrix, outcomes, structure=None):
    """Clears every member included in a negative test and calls every other member infected"""
    outcomes = _outcomes(matrix, outcomes)
    hard_calls = (_negative_counts(matrix, outcomes) == 0).astype(numpy.uint8)
    return DecodeResult(hard_calls, _family_calls(structure, hard_calls))


def threshold_calls(negatives, weights, cfg):
    """Returns the threshold decision for members with the given negative and total test counts"""
    # the positive branch is the complement, so ties resolve to the negative call
    limit = cfg.fraction * numpy.asarray(weights, dtype=float)
    return numpy.where(numpy.asarray(negatives) > limit, 0, 1).astype(numpy.uint8)


def threshold_decode(matrix, outcomes, cfg, structure=None):
    """Calls a member healthy when more than z(1 + delta) of its tests are negative"""
    outcomes = _outcomes(matrix, outcomes)
    hard_calls = threshold_calls(
        _negative_counts(matrix, outcomes), matrix.column_weights(), cfg
    )
    return DecodeResult(hard_calls, _family_calls(structure, hard_calls))


def repetition_decode(outcomes, n, repetitions, cfg):
    """Applies the threshold rule to the repetition design, whose member i owns tests i, i+n, ..."""
    n = types.check(types.positive_count, n, "n")
    repetitions = types.check(types.positive_count, repetitions, "ell")
    outcomes = numpy.asarray(outcomes, dtype=numpy.uint8).ravel()
    if outcomes.size != n * repetitions:
        raise InvalidArgument(
            "Outcome vector doesn't match n * ell",
            {"outcomes": outcomes.size, "n * ell": n * repetitions},
        )
    negatives = repetitions - outcomes.reshape(repetitions, n).sum(axis=0)
    return DecodeResult(threshold_calls(negatives, numpy.full(n, repetitions), cfg))


def community_comp(g1, g2, outcomes1, outcomes2, structure, cfg=None):
    """Decodes the stacked community design: families cleared by G1 force their members healthy, the
       surviving members are decoded from G2

       With cfg the threshold rule replaces COMP in both stages, for noisy tests.
    """
    families = family_matrix(g1, structure)
    if cfg is None:
        family_calls = comp(families, outcomes1).hard_calls
        member_calls = comp(g2, outcomes2).hard_calls
    else:
        family_calls = threshold_decode(families, outcomes1, cfg).hard_calls
        member_calls = threshold_decode(g2, outcomes2, cfg).hard_calls
    if g2.members != structure.members:
        raise InvalidArgument(
            "G2 width doesn't match the population", {"width": g2.members, "n": structure.members}
        )
    hard_calls = member_calls & family_calls[structure.member_families]
    return DecodeResult(hard_calls, family_calls)


def _log(values):
    with numpy.errstate(divide="ignore"):
        return numpy.log(values)


def _leave_one_out(logs, groups, size):
    """Returns, per entry, the log-product of the other entries of its group, and the per-group totals"""
    zero = numpy.isneginf(logs)
    finite = numpy.where(zero, 0.0, logs)
    totals = numpy.bincount(groups, weights=finite, minlength=size)
    zeros = numpy.bincount(groups, weights=zero.astype(float), minlength=size)
    others = totals[groups] - finite
    others[zeros[groups] - zero > 0] = -numpy.inf
    return others, numpy.where(zeros > 0, -numpy.inf, totals)


def _normalize_logs(log0, log1, message):
    logs = numpy.column_stack((log0, log1))
    with numpy.errstate(divide="ignore"):
        total = special.logsumexp(logs, axis=1, keepdims=True)
    if numpy.any(numpy.isneginf(total)):
        raise NumericDegeneracy("All-zero {0} message".format(message))
    return numpy.exp(logs - total)


def _normalize(values0, values1, message):
    total = values0 + values1
    if numpy.any(total <= 0):
        raise NumericDegeneracy("All-zero {0} message".format(message))
    return numpy.column_stack((values0 / total, values1 / total))


def lbp_decode(pools, structure, cfg, outcomes, on_iteration=None):
    """Runs flooding sum-product over the family / member / test factor graph for cfg.iterations rounds,
       returning member and family posteriors with hard calls at 0.5
    """
    outcomes = _outcomes(pools, outcomes).astype(float)
    if pools.members != structure.members:
        raise InvalidArgument(
            "Pool design width doesn't match the population",
            {"width": pools.members, "n": structure.members},
        )
    n, families = structure.members, structure.families
    z = cfg.z
    member_p = cfg.family_p(structure)[structure.member_families]

    edge_member = pools.csr.indices.astype(numpy.int64)
    edge_test = numpy.repeat(numpy.arange(pools.tests), numpy.diff(pools.csr.indptr))
    edge_outcome = outcomes[edge_test]
    edges = edge_member.size

    half = numpy.full((edges, 2), 0.5)
    member_to_test = half.copy()
    member_to_family = numpy.full((n, 2), 0.5)
    # family messages start at the prior, not uniform
    family_to_factor = numpy.tile([1 - cfg.q, cfg.q], (n, 1))
    family_prior = _log(numpy.array([1 - cfg.q, cfg.q]))
    if cfg.community_aware:
        member_prior = None
    else:
        member_prior = _normalize(1 - cfg.q * member_p, cfg.q * member_p, "member prior")

    test_to_member = half.copy()
    factor_to_member = numpy.full((n, 2), 0.5)
    factor_to_family = numpy.full((n, 2), 0.5)
    for iteration in range(cfg.iterations):
        # test factors: P is the chance every other pooled member is healthy
        others, _ = _leave_one_out(_log(member_to_test[:, 0]), edge_test, pools.tests)
        all_healthy = numpy.exp(others)
        someone_else = (1 - z) * (1 - all_healthy)
        test_to_member = _normalize(
            (1 - edge_outcome) * (1 - someone_else) + edge_outcome * someone_else,
            (1 - edge_outcome) * z + edge_outcome * (1 - z),
            "test-to-member",
        )

        if cfg.community_aware:
            weight0, weight1 = family_to_factor[:, 0], family_to_factor[:, 1]
            factor_to_member = _normalize(
                weight0 + weight1 * (1 - member_p), weight1 * member_p, "family-to-member"
            )
            healthy, infected = member_to_family[:, 0], member_to_family[:, 1]
            factor_to_family = _normalize(
                healthy, healthy * (1 - member_p) + infected * member_p, "member-to-family"
            )
            incoming = factor_to_member
        else:
            incoming = member_prior

        test_logs = _log(test_to_member)
        others0, totals0 = _leave_one_out(test_logs[:, 0], edge_member, n)
        others1, totals1 = _leave_one_out(test_logs[:, 1], edge_member, n)
        incoming_logs = _log(incoming)
        member_to_test = _normalize_logs(
            incoming_logs[edge_member, 0] + others0,
            incoming_logs[edge_member, 1] + others1,
            "member-to-test",
        )
        member_to_family = _normalize_logs(totals0, totals1, "member-to-family")

        if cfg.community_aware:
            factor_logs = _log(factor_to_family)
            owners = structure.member_families
            family_others0, _ = _leave_one_out(factor_logs[:, 0], owners, families)
            family_others1, _ = _leave_one_out(factor_logs[:, 1], owners, families)
            family_to_factor = _normalize_logs(
                family_prior[0] + family_others0,
                family_prior[1] + family_others1,
                "family-to-factor",
            )

        if on_iteration is not None:
            on_iteration(
                {
                    "iteration": iteration,
                    "test_to_member": test_to_member,
                    "member_to_test": member_to_test,
                    "member_to_family": member_to_family,
                    "factor_to_member": factor_to_member,
                    "factor_to_family": factor_to_family,
                    "family_to_factor": family_to_factor,
                }
            )
    LOGGER.debug(
        "LBP ran %d iterations over %d tests and %d members", cfg.iterations, pools.tests, n
    )

    test_logs = _log(test_to_member)
    _, totals0 = _leave_one_out(test_logs[:, 0], edge_member, n)
    _, totals1 = _leave_one_out(test_logs[:, 1], edge_member, n)
    incoming_logs = _log(factor_to_member if cfg.community_aware else member_prior)
    posteriors = _normalize_logs(
        incoming_logs[:, 0] + totals0, incoming_logs[:, 1] + totals1, "member"
    )[:, 1]

    if cfg.community_aware:
        factor_logs = _log(factor_to_family)
        _, family_totals0 = _leave_one_out(factor_logs[:, 0], structure.member_families, families)
        _, family_totals1 = _leave_one_out(factor_logs[:, 1], structure.member_families, families)
        family_posteriors = _normalize_logs(
            family_prior[0] + family_totals0, family_prior[1] + family_totals1, "family"
        )[:, 1]
    else:
        family_posteriors = 1 - numpy.exp(
            structure.family_totals(_log(numpy.clip(1 - posteriors, 0.0, 1.0)))
        )

    hard_calls = (posteriors >= 0.5).astype(numpy.uint8)
    return DecodeResult(hard_calls, family_posteriors >= 0.5, posteriors, family_posteriors)
