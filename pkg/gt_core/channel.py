"""gt_core/channel.py

Defines pools, the test noise models, and the oracle that executes pooled tests against a ground-truth state

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

import gt_core._empty as empty
from gt_core import types
from gt_core.exceptions import InvalidArgument
from gt_core.model import generator


class Pool(object):
    """A set of member indices tested together, stored sorted with duplicates collapsed"""

    __slots__ = ("members",)

    def __init__(self, members=empty.indices, n=None):
        members = numpy.unique(numpy.asarray(members, dtype=numpy.int64).ravel())
        if members.size and (members[0] < 0 or (n is not None and members[-1] >= n)):
            raise InvalidArgument("Pool index out of range", {"pool": members.tolist(), "n": n})
        members.setflags(write=False)
        self.members = members

    @classmethod
    def union(cls, pools):
        """Returns the pool holding every member of the supplied pools"""
        pools = [pool.members for pool in pools]
        return cls(numpy.concatenate(pools) if pools else empty.indices)

    def __len__(self):
        return int(self.members.size)

    def __iter__(self):
        return iter(self.members.tolist())

    def __contains__(self, member):
        position = numpy.searchsorted(self.members, member)
        return bool(position < self.members.size and self.members[position] == member)

    def __eq__(self, other):
        return isinstance(other, Pool) and numpy.array_equal(self.members, other.members)

    def __repr__(self):
        return "Pool({0})".format(self.members.tolist())


class NoiseModel(object):
    """Base of the test noise models"""

    __slots__ = ()

    def transmit(self, truth, random):
        """Returns the observed outcomes for an array of noiseless outcomes"""
        raise NotImplementedError("To implement a new noise model transmit must be defined")


class Noiseless(NoiseModel):
    """Every test reports the OR of its members"""

    __slots__ = ()
    z = 0.0

    def transmit(self, truth, random):
        return numpy.asarray(truth, dtype=numpy.uint8).copy()

    def __eq__(self, other):
        return isinstance(other, Noiseless)

    def __repr__(self):
        return "Noiseless()"


class ZChannel(NoiseModel):
    """A positive outcome is reported negative with probability z; negatives are never flipped"""

    __slots__ = ("z",)

    def __init__(self, z):
        self.z = types.check(types.probability, z, "z")

    def transmit(self, truth, random):
        observed = numpy.asarray(truth, dtype=numpy.uint8).copy()
        positives = numpy.flatnonzero(observed)
        flipped = random.random(positives.size) < self.z
        observed[positives[flipped]] = 0
        return observed

    def __eq__(self, other):
        return isinstance(other, ZChannel) and self.z == other.z

    def __repr__(self):
        return "ZChannel(z={0})".format(self.z)


def noise_model(z=None):
    """Returns the noise model for a flip probability, Noiseless when z is missing or zero"""
    if isinstance(z, NoiseModel):
        return z
    if z is None or types.check(types.probability, z, "z") == 0:
        return Noiseless()
    return ZChannel(z)


class TestOracle(object):
    """Executes pooled tests on one InfectionState, counting every test it serves"""

    __test__ = False
    __slots__ = ("state", "noise", "random", "tests")

    def __init__(self, state, noise=None, seed=None):
        self.state = state
        self.noise = noise_model(noise)
        self.random = generator(seed)
        self.tests = 0

    @property
    def members(self):
        return self.state.structure.members

    def pool_result(self, pool):
        """Returns the observed outcome of one pooled test"""
        if not isinstance(pool, Pool):
            pool = Pool(pool, self.members)
        elif len(pool) and pool.members[-1] >= self.members:
            raise InvalidArgument("Pool index out of range", {"pool": pool.members.tolist()})
        truth = numpy.uint8(self.state.member_bits[pool.members].any())
        self.tests += 1
        return int(self.noise.transmit(numpy.atleast_1d(truth), self.random)[0])

    def run(self, matrix):
        """Returns the observed outcome of every row of matrix, counting each row as a test"""
        if matrix.members != self.members:
            raise InvalidArgument(
                "Test matrix width doesn't match the population",
                {"width": matrix.members, "n": self.members},
            )
        truth = (matrix.csr.dot(self.state.member_bits.astype(numpy.int64)) > 0).astype(numpy.uint8)
        self.tests += matrix.tests
        return self.noise.transmit(truth, self.random)

    def __call__(self, pool):
        return self.pool_result(pool)


def pool_result(oracle, pool):
    """Returns the outcome of testing pool through oracle"""
    return oracle.pool_result(pool)


def run_matrix(matrix, state, noise=None, seed=None):
    """Returns the OutcomeVector of every row of matrix tested against state"""
    return TestOracle(state, noise, seed).run(matrix)


def mixed_sample_pool(structure, family, representatives):
    """Returns the pool of the representative members that form family's mixed sample"""
    members = structure.members_of(family)
    pool = Pool(representatives, structure.members)
    if len(pool) and (pool.members[0] < members[0] or pool.members[-1] > members[-1]):
        raise InvalidArgument(
            "Representative outside of its family",
            {"family": family, "representatives": pool.members.tolist()},
        )
    return pool


class RepresentativeRule(object):
    """How many members of each family (or which ones) contribute to its mixed sample"""

    __slots__ = ("count", "subsets")

    def __init__(self, count=None, subsets=None):
        self.count = None if count is None else types.check(types.count, count, "R")
        self.subsets = None if subsets is None else tuple(subsets)

    @classmethod
    def all_members(cls):
        return cls()

    @classmethod
    def explicit(cls, subsets):
        """Returns a rule that uses the given per-family member subsets as representatives"""
        return cls(subsets=[numpy.asarray(subset, dtype=numpy.int64) for subset in subsets])

    @classmethod
    def from_value(cls, value):
        """Returns the rule for a count, for 'M' / 'all' (whole families), or passes a rule through"""
        if isinstance(value, RepresentativeRule):
            return value
        if value is None or (isinstance(value, str) and value.strip().lower() in ("m", "all")):
            return cls.all_members()
        if isinstance(value, (numbers.Number, str)):
            return cls(value)
        return cls.explicit(value)

    def count_for(self, size):
        """Returns the number of representatives drawn from a family of the given size"""
        return size if self.count is None else self.count

    def validate(self, structure):
        if self.subsets is not None:
            if len(self.subsets) != structure.families:
                raise InvalidArgument(
                    "Expected one representative subset per family",
                    {"subsets": len(self.subsets), "F": structure.families},
                )
            for family, subset in enumerate(self.subsets):
                mixed_sample_pool(structure, family, subset)
        elif self.count is not None and self.count > min(structure.family_sizes):
            raise InvalidArgument(
                "More representatives than family members",
                {"R": self.count, "smallest family": min(structure.family_sizes)},
            )
        return self

    def select(self, structure, seed=None):
        """Returns one array of representative member indices per family"""
        self.validate(structure)
        if self.subsets is not None:
            return [Pool(subset).members for subset in self.subsets]

        random = generator(seed)
        selected = []
        for family, size in enumerate(structure.family_sizes):
            count = self.count_for(size)
            if count == size:
                offsets = numpy.arange(size)
            else:
                offsets = random.choice(size, count, replace=False)
            selected.append(numpy.sort(structure.offsets[family] + offsets))
        return selected

    def pools(self, structure, seed=None):
        """Returns the mixed-sample pool of every family"""
        return [
            mixed_sample_pool(structure, family, representatives)
            for family, representatives in enumerate(self.select(structure, seed))
        ]

    def __repr__(self):
        if self.subsets is not None:
            return "RepresentativeRule(explicit)"
        return "RepresentativeRule(R={0})".format("M" if self.count is None else self.count)
