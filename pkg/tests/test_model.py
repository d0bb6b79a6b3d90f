"""tests/test_model.py.

Tests the community structure, infection models and seeded samplers of gt_core


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
import numpy
import pytest
from numpy.testing import assert_array_equal

import gt_core
from gt_core.exceptions import InvalidArgument
from gt_core.model import Combinatorial, CommunityStructure, InfectionState, Probabilistic, Seed


def test_community_structure():
    """Tests that members are laid out family after family"""
    structure = gt_core.build_community([2, 3, 1])
    assert structure.families == 3
    assert structure.members == 6
    assert_array_equal(structure.member_families, [0, 0, 1, 1, 1, 2])
    assert structure.family_of(4) == 1
    assert_array_equal(structure.members_of(1), [2, 3, 4])
    assert structure.member_index(1, 2) == 4
    assert structure.locate(5) == (2, 0)
    assert not structure.symmetric
    with pytest.raises(InvalidArgument):
        structure.family_size
    with pytest.raises(InvalidArgument):
        structure.family_of(6)
    with pytest.raises(InvalidArgument):
        structure.member_index(0, 2)

    assert CommunityStructure("3,3").family_size == 3
    assert CommunityStructure([3, 3]) == CommunityStructure((3, 3))
    assert "F=2" in repr(CommunityStructure([3, 3]))


def test_community_structure_refuses_empty_families():
    """Tests that a community needs at least one family, each of positive size"""
    with pytest.raises(InvalidArgument):
        CommunityStructure([])
    with pytest.raises(InvalidArgument):
        CommunityStructure([2, 0])


def test_family_totals():
    """Tests that per-family sums work for boolean and unsigned inputs"""
    structure = CommunityStructure([2, 2])
    bits = numpy.array([1, 1, 0, 1], dtype=numpy.uint8)
    assert_array_equal(structure.family_totals(bits), [2, 1])
    assert_array_equal(structure.family_totals(bits.astype(bool)), [2, 1])


def test_infection_state():
    """Tests that a state refuses infected members in healthy families"""
    structure = CommunityStructure([2, 2])
    state = InfectionState.from_members(structure, [0, 1, 0, 0])
    assert state.k == 1
    assert_array_equal(state.family_bits, [1, 0])
    assert_array_equal(state.infected_members, [1])
    assert_array_equal(state.infected_families, [0])
    assert state == InfectionState(structure, [0, 1, 0, 0], [1, 0])

    with pytest.raises(InvalidArgument):
        InfectionState(structure, [0, 1, 0, 0], [0, 0])
    with pytest.raises(InvalidArgument):
        InfectionState(structure, [0, 1, 0], [1, 0])
    with pytest.raises(InvalidArgument):
        InfectionState(structure, [0, 2, 0, 0], [1, 0])


def test_seed_reproducibility():
    """Tests that identical seeds and streams reproduce identical draws and that streams differ"""
    first = Seed(42, 3).generator(1).random(5)
    assert_array_equal(first, Seed(42, 3).generator(1).random(5))
    assert not numpy.array_equal(first, Seed(42, 4).generator(1).random(5))
    assert not numpy.array_equal(first, Seed(42, 3).generator(2).random(5))
    assert Seed(42).child(3) == Seed(42, 3)
    assert hash(Seed(1, 2)) == hash(Seed(1, 2))
    with pytest.raises(InvalidArgument):
        Seed(-1)
    with pytest.raises(InvalidArgument):
        Seed(2 ** 64)


def test_generator():
    """Tests that generator accepts seeds, integers and generators"""
    random = Seed(7).generator()
    assert gt_core.model.generator(random) is random
    assert gt_core.model.generator(7).random() == Seed(7).generator().random()
    assert gt_core.model.generator(Seed(7)).random() == Seed(7).generator().random()


def test_sample_combinatorial():
    """Tests that the combinatorial sampler infects exactly k_f families with k_m members each"""
    structure = CommunityStructure([4] * 6)
    for trial in range(20):
        state = gt_core.model.sample_combinatorial(structure, 2, 3, Seed(5, trial))
        assert state.family_bits.sum() == 2
        assert state.k == 6
        assert_array_equal(structure.family_totals(state.member_bits)[state.infected_families], [3, 3])

    assert gt_core.model.sample_combinatorial(structure, 0, 3, 1).k == 0
    full = gt_core.model.sample_combinatorial(structure, 6, 4, 1)
    assert full.k == structure.members


def test_sample_combinatorial_infeasible():
    """Tests that infeasible combinatorial counts are refused"""
    structure = CommunityStructure([3, 3])
    with pytest.raises(InvalidArgument):
        gt_core.model.sample_combinatorial(structure, 3, 1)
    with pytest.raises(InvalidArgument):
        gt_core.model.sample_combinatorial(structure, 1, 4)
    with pytest.raises(InvalidArgument):
        gt_core.model.sample_combinatorial(structure, 1, [1, 1, 1])


def test_sample_probabilistic():
    """Tests the probabilistic sampler at its endpoints and in expectation"""
    structure = CommunityStructure([5] * 40)
    assert gt_core.model.sample_probabilistic(structure, 0.0, 0.9, 1).k == 0
    everyone = gt_core.model.sample_probabilistic(structure, 1.0, 1.0, 1)
    assert everyone.k == structure.members

    infected = [
        gt_core.model.sample_probabilistic(structure, 0.5, 0.4, Seed(11, trial)).k for trial in range(200)
    ]
    assert abs(numpy.mean(infected) - 0.5 * 0.4 * structure.members) < 2.0


def test_infection_model_specs():
    """Tests the per-family expansion and expectations of both infection models"""
    structure = CommunityStructure([2, 4])
    combinatorial = Combinatorial(1, [1, 2])
    assert combinatorial.per_family(structure) == [1, 2]
    assert combinatorial.expected_infected(structure) == 1.5
    assert combinatorial.sample(structure, 3).k in (1, 2)

    probabilistic = Probabilistic(0.5, [0.5, 0.25])
    assert probabilistic.per_family(structure) == [0.5, 0.25]
    assert probabilistic.expected_infected(structure) == pytest.approx(0.5 * (0.5 * 2 + 0.25 * 4))
    with pytest.raises(InvalidArgument):
        Probabilistic(0.5, [0.5]).per_family(structure)
    with pytest.raises(InvalidArgument):
        Probabilistic(1.5, 0.5)

    infection = gt_core.model.InfectionModelSpec.from_config({"model": "combinatorial", "k_f": 1, "k_m": 2})
    assert isinstance(infection, Combinatorial)
    infection = gt_core.model.InfectionModelSpec.from_config({"model": "probabilistic", "q": 0.1, "p": 0.2})
    assert isinstance(infection, Probabilistic)
    with pytest.raises(InvalidArgument):
        gt_core.model.InfectionModelSpec.from_config({"model": "other"})


def test_random_asymmetric_community():
    """Tests that asymmetric communities draw sizes and p_j inside their ranges"""
    structure, p = gt_core.model.random_asymmetric_community(50, (5, 8), (0.4, 0.8), Seed(3))
    assert structure.families == 50
    assert all(5 <= size <= 8 for size in structure.family_sizes)
    assert len(p) == 50
    assert all(0.4 <= value <= 0.8 for value in p)
    same, same_p = gt_core.model.random_asymmetric_community(50, (5, 8), (0.4, 0.8), Seed(3))
    assert same == structure and same_p == p
    with pytest.raises(InvalidArgument):
        gt_core.model.random_asymmetric_community(5, (8, 5))
