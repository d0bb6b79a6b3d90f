"""tests/test_adaptive.py.

Tests binary splitting, generalized binary splitting and the community-aware adaptive algorithms


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
import math

import pytest
from numpy.testing import assert_array_equal

import gt_core
from gt_core.adaptive import AdaptiveResult
from gt_core.channel import Pool, TestOracle
from gt_core.exceptions import InvalidArgument
from gt_core.model import Combinatorial, CommunityStructure, InfectionState, Probabilistic, Seed


def _state(bits, sizes=None):
    structure = CommunityStructure(sizes or [len(bits)])
    return InfectionState.from_members(structure, bits)


def test_binary_splitting_single_infection():
    """Tests that binary splitting isolates one infected item among eight with five tests"""
    bits = [0] * 8
    bits[5] = 1
    oracle = TestOracle(_state(bits))
    result = gt_core.binary_splitting(range(8), oracle)
    assert_array_equal(result.infected, [5])
    assert result.tests_used == 5
    assert oracle.tests == 5


def test_binary_splitting_is_exact_within_its_worst_case():
    """Tests zero-error identification and the k ceil(log2 n) + k + 1 test ceiling"""
    structure = CommunityStructure([40])
    for trial in range(30):
        state = gt_core.model.sample_combinatorial(structure, 1, trial % 6, Seed(2, trial))
        result = gt_core.binary_splitting(range(40), TestOracle(state))
        assert_array_equal(result.estimates, state.member_bits)
        assert result.errors(state) == (0, 0)
        k = state.k
        assert result.tests_used <= k * math.ceil(math.log2(40)) + k + 1


def test_binary_splitting_edges():
    """Tests the empty, clean and fully infected inputs"""
    assert gt_core.binary_splitting([], TestOracle(_state([0, 0]))).tests_used == 0
    clean = gt_core.binary_splitting(range(4), TestOracle(_state([0, 0, 0, 0])))
    assert clean.tests_used == 1
    assert not clean.estimates.any()
    full = gt_core.binary_splitting(range(3), TestOracle(_state([1, 1, 1])))
    assert full.estimates.all()


@pytest.mark.parametrize("infected", range(8))
def test_hgbsa_single_infection(infected):
    """Tests that generalized binary splitting finds one infected item of eight within three tests"""
    bits = [0] * 8
    bits[infected] = 1
    result = gt_core.hgbsa(range(8), 1, TestOracle(_state(bits)))
    assert_array_equal(result.infected, [infected])
    assert result.tests_used <= 3


def test_hgbsa_is_exact():
    """Tests zero-error identification with the true count supplied and read from the oracle"""
    structure = CommunityStructure([30])
    for trial in range(30):
        state = gt_core.model.sample_combinatorial(structure, 1, trial % 12, Seed(3, trial))
        known = gt_core.hgbsa(range(30), state.k, TestOracle(state))
        assert_array_equal(known.estimates, state.member_bits)
        looked_up = gt_core.hgbsa(range(30), None, TestOracle(state))
        assert looked_up.tests_used == known.tests_used


def test_hgbsa_edges():
    """Tests that nothing is tested when the count already decides every item"""
    clean = gt_core.hgbsa(range(4), 0, TestOracle(_state([0, 0, 0, 0])))
    assert clean.tests_used == 0
    assert not clean.estimates.any()
    full = gt_core.hgbsa(range(4), 4, TestOracle(_state([1, 1, 1, 1])))
    assert full.tests_used == 0
    assert full.estimates.all()
    with pytest.raises(InvalidArgument):
        gt_core.hgbsa(range(2), 3, TestOracle(_state([1, 1])))


@pytest.mark.parametrize("guess", [0, 1, 4, 12])
def test_hgbsa_with_a_guessed_count(guess):
    """Tests that a wrong infected count only costs tests, never a wrong call"""
    for trial in range(20):
        bits = (Seed(8, trial).generator().random(12) < 0.3).astype(int).tolist()
        state = _state(bits)
        result = gt_core.hgbsa(range(12), guess, TestOracle(state), estimated=True)
        assert_array_equal(result.estimates, bits)
        assert result.errors(state) == (0, 0)


def test_splitting_over_pools():
    """Tests that items can stand for pools, here the members of each family"""
    state = _state([0, 0, 0, 1, 0, 0], [2, 2, 2])
    pools = [Pool([0, 1]), Pool([2, 3]), Pool([4, 5])]
    assert_array_equal(gt_core.binary_splitting(range(3), TestOracle(state), pools).estimates, [0, 1, 0])
    assert_array_equal(gt_core.hgbsa(range(3), None, TestOracle(state), pools).estimates, [0, 1, 0])


def test_adaptive_result():
    """Tests the infected view and error counts of a result"""
    state = _state([1, 0, 1])
    result = AdaptiveResult([1, 1, 0], 4, [0, 1, 2])
    assert_array_equal(result.infected, [0, 1])
    assert result.errors(state) == (1, 1)
    assert "tests_used=4" in repr(result)


def test_adaptive_community_counts_its_tests():
    """Tests the family stage, the individual tests and the residual run of the community algorithm"""
    state = _state([0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0], [3, 3, 3, 3])
    structure = state.structure

    result = gt_core.adaptive_community(structure, "M", "bsa", TestOracle(state))
    assert_array_equal(result.estimates, state.member_bits)
    assert_array_equal(result.family_estimates, [0, 1, 0, 0])
    # 4 to find the family, 3 individual tests, 1 to clear the rest
    assert result.tests_used == 8

    guessed = gt_core.adaptive_community(structure, "M", "hgbsa", TestOracle(state), counts=(1, 0))
    assert_array_equal(guessed.estimates, state.member_bits)
    # 2 to find the family, 1 to clear the other families, 3 individual tests, 1 to clear the rest
    assert guessed.tests_used == 7


@pytest.mark.parametrize("algorithm", ["bsa", "hgbsa"])
@pytest.mark.parametrize("representatives", [1, 2, "M"])
def test_adaptive_community_is_exact(algorithm, representatives):
    """Tests that noiseless runs identify every member for any number of representatives"""
    structure = CommunityStructure([4] * 10)
    infection = Probabilistic(0.3, 0.5)
    for trial in range(30):
        state = infection.sample(structure, Seed(6, trial))
        result = gt_core.adaptive_community(
            structure, representatives, algorithm, TestOracle(state), model=infection, seed=Seed(7, trial)
        )
        assert result.errors(state) == (0, 0)
        assert result.estimates.size == structure.members


def test_adaptive_community_refuses_unknown_algorithms():
    """Tests that only the two splitting algorithms are accepted"""
    state = _state([0, 0], [2])
    with pytest.raises(InvalidArgument):
        gt_core.adaptive_community(state.structure, 1, "bisect", TestOracle(state))
    with pytest.raises(InvalidArgument):
        gt_core.adaptive_community(state.structure, 3, "bsa", TestOracle(state))


def test_expected_counts():
    """Tests the expected positive mixed samples and residual infections"""
    structure = CommunityStructure([3] * 4)
    representatives = gt_core.RepresentativeRule.all_members().select(structure)
    assert gt_core.adaptive.expected_counts(structure, representatives, Combinatorial(1, 1)) == (1, 0)
    assert gt_core.adaptive.expected_counts(structure, representatives, Probabilistic(0.5, 1.0)) == (2, 0)

    single = gt_core.RepresentativeRule(1).select(structure, Seed(1))
    positives, residual = gt_core.adaptive.expected_counts(structure, single, Probabilistic(1.0, 0.5))
    assert positives == 2
    assert residual == 2


def test_two_stage():
    """Tests the noiseless two-stage run: one test per family then one per member of positive families"""
    structure = CommunityStructure([3] * 5)
    state = InfectionState.from_members(structure, [0, 1, 0] + [0] * 6 + [1, 1, 0] + [0] * 3)
    result = gt_core.two_stage(structure, None, state=state)
    assert_array_equal(result.estimates, state.member_bits)
    assert_array_equal(result.family_estimates, [1, 0, 0, 1, 0])
    assert result.tests_used == 5 + 6

    labelled = gt_core.two_stage(structure, None, state=state, positive_branch="label")
    assert labelled.tests_used == 5
    assert labelled.errors(state) == (0, 3)
    with pytest.raises(InvalidArgument):
        gt_core.two_stage(structure, None, state=state, positive_branch="retest")


def test_two_stage_with_a_second_design():
    """Tests that members outside the flagged families are decoded from the stage two design"""
    structure = CommunityStructure([2] * 4)
    state = InfectionState.from_members(structure, [1, 0, 0, 0, 0, 0, 0, 0])

    def individual(width, random):
        return gt_core.designs.individual_matrix(range(width), width)

    result = gt_core.two_stage(structure, 1, state=state, stage2=individual, seed=Seed(2))
    assert result.errors(state) == (0, 0)
    flagged = int(result.family_estimates.sum())
    assert result.tests_used == 4 + 2 * flagged + 2 * (4 - flagged)

    with pytest.raises(InvalidArgument):
        gt_core.two_stage(
            structure, None, state=state, stage2=gt_core.designs.TestMatrix.empty(1)
        )


def test_two_stage_with_noise():
    """Tests the threshold-decoded noisy two-stage run never raises and reports every test"""
    structure = CommunityStructure([5] * 20)
    state = Probabilistic(0.2, 0.6).sample(structure, Seed(4))
    threshold = gt_core.decoders.ThresholdConfig(0.1, 0.5)
    mode = gt_core.designs.Sparse(15, 3)
    result = gt_core.two_stage(
        structure, None, mode, state=state, noise=0.1, seed=Seed(5), threshold=threshold
    )
    assert result.tests_used == 15 + 5 * int(result.family_estimates.sum())
    assert result.estimates.size == structure.members
