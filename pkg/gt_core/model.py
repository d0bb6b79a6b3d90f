"""gt_core/model.py

Defines the community partition of a population and the samplers of ground-truth infection states under the
combinatorial and probabilistic infection models

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

import numbers

import numpy
from numpy.random import Generator, Philox, SeedSequence

from gt_core import types
from gt_core.exceptions import InvalidArgument

UINT64 = 2 ** 64


class Seed(object):
    """A 64-bit seed plus a stream index; identical pairs always reproduce identical samples"""

    __slots__ = ("value", "stream")

    def __init__(self, value=0, stream=0):
        self.value = types.check(types.InRange(0, UINT64), value, "seed")
        self.stream = types.check(types.count, stream, "stream")

    def generator(self, *substreams):
        """Returns a fresh numpy Generator bound to this seed, stream and optional sub-streams"""
        sequence = SeedSequence(self.value, spawn_key=(self.stream,) + tuple(substreams))
        return Generator(Philox(sequence))

    def child(self, stream):
        """Returns the seed of another stream drawn from the same base value"""
        return Seed(self.value, stream)

    def __eq__(self, other):
        return isinstance(other, Seed) and (self.value, self.stream) == (other.value, other.stream)

    def __hash__(self):
        return hash((self.value, self.stream))

    def __repr__(self):
        return "Seed({0}, stream={1})".format(self.value, self.stream)


def generator(seed):
    """Returns a numpy Generator for a Seed, an integer seed, or passes an existing Generator through"""
    if isinstance(seed, Generator):
        return seed
    if seed is None:
        return Seed().generator()
    if isinstance(seed, Seed):
        return seed.generator()
    return Seed(seed).generator()


def _frozen(array):
    array.setflags(write=False)
    return array


class CommunityStructure(object):
    """A partition of n members into F families, members of one family holding consecutive indices"""

    __slots__ = ("family_sizes", "offsets", "member_families")

    def __init__(self, family_sizes):
        if isinstance(family_sizes, (str, numbers.Number)):
            family_sizes = types.check(types.family_sizes, family_sizes, "family_sizes")
        family_sizes = tuple(
            types.check(types.positive_count, size, "family_sizes") for size in family_sizes
        )
        if not family_sizes:
            raise InvalidArgument(
                "A community needs at least one family", {"family_sizes": "empty sequence"}
            )

        self.family_sizes = family_sizes
        boundaries = numpy.concatenate(([0], numpy.cumsum(family_sizes)))
        self.offsets = _frozen(boundaries.astype(numpy.int64))
        self.member_families = _frozen(
            numpy.repeat(numpy.arange(len(family_sizes), dtype=numpy.int64), family_sizes)
        )

    @property
    def families(self):
        """F, the number of families"""
        return len(self.family_sizes)

    @property
    def members(self):
        """n, the size of the whole population"""
        return int(self.offsets[-1])

    @property
    def sizes(self):
        return numpy.asarray(self.family_sizes, dtype=numpy.int64)

    @property
    def symmetric(self):
        return len(set(self.family_sizes)) == 1

    @property
    def family_size(self):
        """M, the shared family size of a symmetric community"""
        if not self.symmetric:
            raise InvalidArgument(
                "The community has families of different sizes", {"family_sizes": self.family_sizes}
            )
        return self.family_sizes[0]

    def family_of(self, member):
        """Returns the index of the family member belongs to"""
        member = self._member(member)
        return int(self.member_families[member])

    def members_of(self, family):
        """Returns the member indices of family as an array"""
        family = self._family(family)
        return numpy.arange(self.offsets[family], self.offsets[family + 1], dtype=numpy.int64)

    def member_index(self, family, offset):
        """Returns the member index of the offset-th member of family"""
        family = self._family(family)
        if not 0 <= offset < self.family_sizes[family]:
            raise InvalidArgument(
                "Offset outside of the family", {"offset": offset, "family": family}
            )
        return int(self.offsets[family] + offset)

    def locate(self, member):
        """Returns the (family, offset) pair of member"""
        family = self.family_of(member)
        return family, int(member - self.offsets[family])

    def family_totals(self, member_values):
        """Returns the per-family sums of a length-n vector"""
        member_values = numpy.asarray(member_values)
        if member_values.dtype.kind in "bu":
            member_values = member_values.astype(numpy.int64)
        return numpy.add.reduceat(member_values, self.offsets[:-1])

    def _member(self, member):
        if not 0 <= member < self.members:
            raise InvalidArgument(
                "Member index out of range", {"member": member, "n": self.members}
            )
        return int(member)

    def _family(self, family):
        if not 0 <= family < self.families:
            raise InvalidArgument(
                "Family index out of range", {"family": family, "F": self.families}
            )
        return int(family)

    def __eq__(self, other):
        return isinstance(other, CommunityStructure) and self.family_sizes == other.family_sizes

    def __hash__(self):
        return hash(self.family_sizes)

    def __repr__(self):
        return "CommunityStructure(F={0}, n={1})".format(self.families, self.members)


def build_community(family_sizes):
    """Returns the CommunityStructure of the supplied family sizes"""
    return CommunityStructure(family_sizes)


class InfectionState(object):
    """Ground truth: member bits U and family bits V"""

    __slots__ = ("structure", "member_bits", "family_bits")

    def __init__(self, structure, member_bits, family_bits):
        member_bits = numpy.asarray(member_bits, dtype=numpy.uint8)
        family_bits = numpy.asarray(family_bits, dtype=numpy.uint8)
        if member_bits.shape != (structure.members,) or family_bits.shape != (structure.families,):
            raise InvalidArgument(
                "State vectors don't match the community",
                {"member_bits": member_bits.shape, "family_bits": family_bits.shape},
            )
        if numpy.any(member_bits > 1) or numpy.any(family_bits > 1):
            raise InvalidArgument("State vectors must be binary")
        if numpy.any(member_bits & (1 - family_bits[structure.member_families])):
            raise InvalidArgument("Infected member inside a family marked healthy")

        self.structure = structure
        self.member_bits = _frozen(member_bits)
        self.family_bits = _frozen(family_bits)

    @classmethod
    def from_members(cls, structure, member_bits):
        """Returns the state whose family bits are the per-family OR of member_bits"""
        member_bits = numpy.asarray(member_bits, dtype=numpy.uint8)
        return cls(structure, member_bits, structure.family_totals(member_bits) > 0)

    @property
    def k(self):
        """The number of infected members"""
        return int(self.member_bits.sum())

    @property
    def infected_members(self):
        return numpy.flatnonzero(self.member_bits)

    @property
    def infected_families(self):
        return numpy.flatnonzero(self.family_bits)

    def __eq__(self, other):
        return (
            isinstance(other, InfectionState)
            and self.structure == other.structure
            and numpy.array_equal(self.member_bits, other.member_bits)
            and numpy.array_equal(self.family_bits, other.family_bits)
        )

    def __repr__(self):
        return "InfectionState(k={0}, infected_families={1})".format(
            self.k, int(self.family_bits.sum())
        )


def _per_family(structure, values, name, kind):
    if isinstance(values, (numbers.Number, str)):
        value = types.check(kind, values, name)
        return [value] * structure.families
    values = [types.check(kind, value, name) for value in values]
    if len(values) != structure.families:
        raise InvalidArgument(
            "Expected one {0} per family".format(name), {name: len(values), "F": structure.families}
        )
    return values


class InfectionModelSpec(object):
    """Base of the two infection models"""

    __slots__ = ()
    name = None

    def per_family(self, structure):
        raise NotImplementedError("To implement a new model per_family must be defined")

    def sample(self, structure, seed=None):
        raise NotImplementedError("To implement a new model sample must be defined")

    def expected_infected(self, structure):
        raise NotImplementedError("To implement a new model expected_infected must be defined")

    @staticmethod
    def from_config(config):
        """Returns the model described by a configuration mapping"""
        kind = types.check(
            types.OneOf(("combinatorial", "probabilistic")), config.get("model"), "model"
        )
        if kind == "combinatorial":
            return Combinatorial(config["k_f"], config["k_m"])
        return Probabilistic(config["q"], config["p"])


class Combinatorial(InfectionModelSpec):
    """Exactly k_f infected families, k_m^j infected members inside infected family j"""

    __slots__ = ("k_f", "k_m")
    name = "combinatorial"

    def __init__(self, k_f, k_m):
        self.k_f = types.check(types.count, k_f, "k_f")
        if isinstance(k_m, (numbers.Number, str)):
            self.k_m = types.check(types.count, k_m, "k_m")
        else:
            self.k_m = tuple(types.check(types.count, value, "k_m") for value in k_m)

    def per_family(self, structure):
        k_m = _per_family(structure, self.k_m, "k_m", types.count)
        if self.k_f > structure.families:
            raise InvalidArgument(
                "More infected families than families", {"k_f": self.k_f, "F": structure.families}
            )
        for family, (infected, size) in enumerate(zip(k_m, structure.family_sizes)):
            if infected > size:
                raise InvalidArgument(
                    "More infected members than family members",
                    {"family": family, "k_m": infected, "M": size},
                )
        return k_m

    def sample(self, structure, seed=None):
        return sample_combinatorial(structure, self.k_f, self.k_m, seed)

    def expected_infected(self, structure):
        k_m = self.per_family(structure)
        return self.k_f * float(numpy.mean(k_m))

    def __repr__(self):
        return "Combinatorial(k_f={0}, k_m={1})".format(self.k_f, self.k_m)


class Probabilistic(InfectionModelSpec):
    """Families infected with probability q, members of infected family j with probability p_j"""

    __slots__ = ("q", "p")
    name = "probabilistic"

    def __init__(self, q, p):
        self.q = types.check(types.probability, q, "q")
        if isinstance(p, (numbers.Number, str)):
            self.p = types.check(types.probability, p, "p")
        else:
            self.p = tuple(types.check(types.probability, value, "p") for value in p)

    def per_family(self, structure):
        return _per_family(structure, self.p, "p", types.probability)

    def sample(self, structure, seed=None):
        return sample_probabilistic(structure, self.q, self.p, seed)

    def expected_infected(self, structure):
        return self.q * float(numpy.dot(self.per_family(structure), structure.family_sizes))

    def __repr__(self):
        return "Probabilistic(q={0}, p={1})".format(self.q, self.p)


def sample_combinatorial(structure, k_f, k_m_per_family, seed=None):
    """Returns a state with exactly k_f uniformly chosen infected families holding k_m^j uniformly placed
       infected members each
    """
    k_m = Combinatorial(k_f, k_m_per_family).per_family(structure)
    random = generator(seed)

    family_bits = numpy.zeros(structure.families, dtype=numpy.uint8)
    member_bits = numpy.zeros(structure.members, dtype=numpy.uint8)
    for family in numpy.sort(random.choice(structure.families, size=k_f, replace=False)):
        family_bits[family] = 1
        chosen = random.choice(structure.family_sizes[family], size=k_m[family], replace=False)
        member_bits[structure.offsets[family] + chosen] = 1
    return InfectionState(structure, member_bits, family_bits)


def sample_probabilistic(structure, q, p_per_family, seed=None):
    """Returns a state whose family bits are Bernoulli(q) and whose members of infected family j are
       Bernoulli(p_j)
    """
    p = numpy.asarray(Probabilistic(q, p_per_family).per_family(structure), dtype=float)
    q = types.check(types.probability, q, "q")
    random = generator(seed)

    family_bits = (random.random(structure.families) < q).astype(numpy.uint8)
    draws = random.random(structure.members) < p[structure.member_families]
    member_bits = (draws & family_bits[structure.member_families].astype(bool)).astype(numpy.uint8)
    return InfectionState(structure, member_bits, family_bits)


def random_asymmetric_community(families, size_range=(5, 50), p_range=(0.4, 0.8), seed=None):
    """Returns a community with uniformly drawn family sizes plus the matching uniformly drawn p_j"""
    families = types.check(types.positive_count, families, "families")
    low_size, high_size = (
        types.check(types.positive_count, size, "size_range") for size in size_range
    )
    low_p, high_p = (types.check(types.probability, value, "p_range") for value in p_range)
    if low_size > high_size or low_p > high_p:
        raise InvalidArgument(
            "Ranges must be ordered", {"size_range": size_range, "p_range": p_range}
        )

    random = generator(seed)
    sizes = random.integers(low_size, high_size, size=families, endpoint=True)
    p = random.uniform(low_p, high_p, size=families)
    return build_community(sizes.tolist()), tuple(p.tolist())
