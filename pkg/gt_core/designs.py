"""gt_core/designs.py

Defines the sparse test matrix and every non-adaptive design built on it: Bernoulli, constant column weight,
repetition, and the two community blocks G1 (family identification) and G2 (member identification)

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

import numpy
from scipy import sparse

from gt_core import types
from gt_core.channel import RepresentativeRule
from gt_core.exceptions import InvalidArgument
from gt_core.model import generator


class TestMatrix(object):
    """A T x n binary pooling design held as a CSR matrix; row t is the pool of test t"""

    __test__ = False
    __slots__ = ("csr",)

    def __init__(self, matrix):
        matrix = sparse.csr_matrix(matrix, dtype=numpy.int64)
        matrix.eliminate_zeros()
        matrix.sum_duplicates()
        matrix.sort_indices()
        self.csr = sparse.csr_matrix(
            (numpy.ones(matrix.nnz, dtype=numpy.uint8), matrix.indices, matrix.indptr),
            shape=matrix.shape,
        )

    @classmethod
    def from_rows(cls, rows, n):
        """Returns the matrix whose t-th row holds the members listed in rows[t]"""
        n = types.check(types.count, n, "n")
        rows = [numpy.asarray(row, dtype=numpy.int64).ravel() for row in rows]
        for test, row in enumerate(rows):
            if row.size and (row.min() < 0 or row.max() >= n):
                raise InvalidArgument("Row index out of range", {"test": test, "n": n})
        lengths = [row.size for row in rows]
        indptr = numpy.concatenate(([0], numpy.cumsum(lengths))).astype(numpy.int64)
        indices = numpy.concatenate(rows) if rows else numpy.empty(0, dtype=numpy.int64)
        data = numpy.ones(indices.size, dtype=numpy.int64)
        return cls(sparse.csr_matrix((data, indices, indptr), shape=(len(rows), n)))

    @classmethod
    def from_dense(cls, dense):
        return cls(numpy.asarray(dense))

    @classmethod
    def empty(cls, n):
        """Returns the design with no tests over n members"""
        return cls(sparse.csr_matrix((0, n), dtype=numpy.int64))

    @property
    def tests(self):
        """T, the number of tests"""
        return self.csr.shape[0]

    @property
    def members(self):
        """n, the width of the design"""
        return self.csr.shape[1]

    def row(self, test):
        """Returns the sorted member indices pooled by test"""
        start, end = self.csr.indptr[test], self.csr.indptr[test + 1]
        return self.csr.indices[start:end].astype(numpy.int64)

    def rows(self):
        return [self.row(test) for test in range(self.tests)]

    def column_weights(self):
        """Returns how many tests each member takes part in"""
        return numpy.bincount(self.csr.indices, minlength=self.members).astype(numpy.int64)

    @property
    def density(self):
        cells = self.tests * self.members
        return self.csr.nnz / cells if cells else 0.0

    def to_dense(self):
        return self.csr.toarray()

    def embed(self, columns, n):
        """Returns this design widened to n members, column c landing on member columns[c]"""
        columns = numpy.asarray(columns, dtype=numpy.int64)
        if columns.size != self.members:
            raise InvalidArgument(
                "Column map doesn't match the design width",
                {"columns": columns.size, "width": self.members},
            )
        return TestMatrix(
            sparse.csr_matrix(
                (self.csr.data, columns[self.csr.indices], self.csr.indptr), shape=(self.tests, n)
            )
        )

    def __eq__(self, other):
        return (
            isinstance(other, TestMatrix)
            and self.csr.shape == other.csr.shape
            and numpy.array_equal(self.csr.indptr, other.csr.indptr)
            and numpy.array_equal(self.csr.indices, other.csr.indices)
        )

    def __repr__(self):
        return "TestMatrix(T={0}, n={1}, nnz={2})".format(self.tests, self.members, self.csr.nnz)


def _shape(tests, n):
    return types.check(types.positive_count, tests, "T"), types.check(types.positive_count, n, "n")


def bernoulli_matrix(tests, n, theta, seed=None):
    """Returns a design whose entries are independently 1 with probability theta"""
    tests, n = _shape(tests, n)
    theta = types.check(types.probability, theta, "theta")
    return TestMatrix(generator(seed).random((tests, n)) < theta)


def constant_column_weight_matrix(tests, n, weight, seed=None):
    """Returns a design where each member joins exactly weight tests chosen uniformly and independently"""
    tests, n = _shape(tests, n)
    weight = types.check(types.count, weight, "L")
    if weight > tests:
        raise InvalidArgument(
            "Column weight larger than the number of tests", {"L": weight, "T": tests}
        )

    chosen = numpy.argsort(generator(seed).random((tests, n)), axis=0)[:weight]
    columns = numpy.tile(numpy.arange(n, dtype=numpy.int64), weight)
    data = numpy.ones(columns.size, dtype=numpy.int64)
    return TestMatrix(sparse.coo_matrix((data, (chosen.ravel(), columns)), shape=(tests, n)))


def repetition_matrix(n, repetitions):
    """Returns ell stacked identity matrices; member i is tested by rows i, i+n, ..., i+(ell-1)n"""
    n = types.check(types.positive_count, n, "n")
    repetitions = types.check(types.positive_count, repetitions, "ell")
    identity = sparse.identity(n, dtype=numpy.int64, format="csr")
    return TestMatrix(sparse.vstack([identity] * repetitions))


def individual_matrix(members, n):
    """Returns one single-member test for each of the listed members"""
    return TestMatrix.from_rows([[member] for member in members], n)


class BlockDesignSpec(object):
    """The block-row layout of G2: c_i identity blocks share block row i"""

    __slots__ = ("c", "auxiliary")

    def __init__(self, c, auxiliary=0):
        self.c = tuple(types.check(types.positive_count, value, "c") for value in c)
        if not self.c:
            raise InvalidArgument("A block design needs at least one block row", {"b": 0})
        self.auxiliary = types.check(types.count, auxiliary, "auxiliary")
        if self.auxiliary >= sum(self.c):
            raise InvalidArgument("Auxiliary families fill every slot", {"auxiliary": auxiliary})

    @classmethod
    def symmetric(cls, families, block_rows):
        """Returns c_i = ceil(F / b) for every row, padding with auxiliary families when b doesn't divide F"""
        families = types.check(types.positive_count, families, "F")
        block_rows = types.check(types.InRange(1, families, inclusive=True), block_rows, "b")
        per_row = -(-families // block_rows)
        return cls([per_row] * block_rows, auxiliary=per_row * block_rows - families)

    @classmethod
    def balanced(cls, families, block_rows):
        """Returns the split of F into b parts that differ by at most one"""
        families = types.check(types.positive_count, families, "F")
        block_rows = types.check(types.InRange(1, families, inclusive=True), block_rows, "b")
        base, extra = divmod(families, block_rows)
        return cls([base + 1] * extra + [base] * (block_rows - extra))

    @property
    def b(self):
        return len(self.c)

    @property
    def families(self):
        """The number of real families the layout places"""
        return sum(self.c) - self.auxiliary

    @property
    def is_symmetric(self):
        return len(set(self.c)) == 1

    def canonical_rows(self):
        """Returns the block row of every slot, walking the rows round-robin and skipping full ones"""
        capacity = list(self.c)
        rows = []
        row = 0
        for _slot in range(sum(self.c)):
            while not capacity[row]:
                row = (row + 1) % self.b
            rows.append(row)
            capacity[row] -= 1
            row = (row + 1) % self.b
        return numpy.asarray(rows, dtype=numpy.int64)

    def assignment(self, seed=None, canonical=False):
        """Returns the block row of every real family; auxiliary families take the trailing slots"""
        slots = self.canonical_rows()
        if canonical:
            return slots[: self.families]
        return slots[generator(seed).permutation(slots.size)[: self.families]]

    def __repr__(self):
        return "BlockDesignSpec(c={0}, auxiliary={1})".format(self.c, self.auxiliary)


def community_g2(structure, spec, seed=None, canonical=False):
    """Returns G2: one M x M identity block per family, c_i families sharing the M tests of block row i"""
    size = structure.family_size
    if spec.families != structure.families:
        raise InvalidArgument(
            "Block layout doesn't hold every family",
            {"sum(c)": sum(spec.c), "auxiliary": spec.auxiliary, "F": structure.families},
        )
    block_rows = spec.assignment(seed, canonical)
    members = numpy.arange(structure.members, dtype=numpy.int64)
    offsets = members - structure.offsets[structure.member_families]
    rows = block_rows[structure.member_families] * size + offsets
    data = numpy.ones(structure.members, dtype=numpy.int64)
    shape = (spec.b * size, structure.members)
    return TestMatrix(sparse.coo_matrix((data, (rows, members)), shape=shape))


class OnePerFamily(object):
    """G1 mode: test t pools the mixed sample of family t, so T1 = F"""

    __slots__ = ()

    def __repr__(self):
        return "OnePerFamily()"


class Sparse(object):
    """G1 mode: a constant-column-weight design of T1 tests over the F family mixed samples"""

    __slots__ = ("tests", "weight")

    def __init__(self, tests, weight):
        self.tests = types.check(types.positive_count, tests, "T1")
        self.weight = types.check(types.InRange(0, self.tests, inclusive=True), weight, "L_f")

    def __repr__(self):
        return "Sparse(tests={0}, weight={1})".format(self.tests, self.weight)


def _membership(structure, representatives):
    rows = numpy.repeat(
        numpy.arange(structure.families), [len(chosen) for chosen in representatives]
    )
    columns = numpy.concatenate(representatives) if representatives else numpy.empty(0, numpy.int64)
    data = numpy.ones(columns.size, dtype=numpy.int64)
    return sparse.csr_matrix((data, (rows, columns)), shape=(structure.families, structure.members))


def community_g1(structure, mode=None, representatives=None, seed=None):
    """Returns G1, which pools the family mixed samples so that infected families can be identified"""
    mode = OnePerFamily() if mode is None else mode
    rule = RepresentativeRule.from_value(representatives)
    random = generator(seed)
    membership = _membership(structure, rule.select(structure, random))

    if isinstance(mode, OnePerFamily):
        return TestMatrix(membership)
    if isinstance(mode, Sparse):
        families = constant_column_weight_matrix(
            mode.tests, structure.families, mode.weight, random
        )
        return TestMatrix(families.csr.astype(numpy.int64).dot(membership))
    raise InvalidArgument("Unknown G1 mode", {"mode": repr(mode)})


def family_matrix(matrix, structure):
    """Returns the T x F design in which family j is pooled whenever any of its members is"""
    if matrix.members != structure.members:
        raise InvalidArgument(
            "Test matrix width doesn't match the population",
            {"width": matrix.members, "n": structure.members},
        )
    indicator = sparse.csr_matrix(
        (
            numpy.ones(structure.members, dtype=numpy.int64),
            (numpy.arange(structure.members), structure.member_families),
        ),
        shape=(structure.members, structure.families),
    )
    return TestMatrix(matrix.csr.astype(numpy.int64).dot(indicator))


def stack(first, second):
    """Returns the rows of first followed by the rows of second"""
    if first is None:
        return second
    if second is None:
        return first
    if first.members != second.members:
        raise InvalidArgument(
            "Stacked designs must share their width",
            {"first": first.members, "second": second.members},
        )
    return TestMatrix(sparse.vstack([first.csr, second.csr], format="csr"))


def design_from_settings(settings):
    """Builds the design a validated design configuration describes"""
    structure = settings["structure"]
    kind = settings["design"]
    random = generator(settings.get("seed"))
    if kind == "bernoulli":
        return bernoulli_matrix(settings["tests"], structure.members, settings["theta"], random)
    if kind == "constant_weight":
        return constant_column_weight_matrix(
            settings["tests"], structure.members, settings["column_weight"], random
        )
    if kind == "repetition":
        return repetition_matrix(structure.members, settings["repetitions"])

    g1 = g2 = None
    if kind in ("community", "g1"):
        g1 = community_g1(structure, OnePerFamily(), settings.get("representatives"), random)
    if kind in ("community", "g2"):
        layout = BlockDesignSpec.balanced(structure.families, settings["block_rows"])
        g2 = community_g2(structure, layout, random, settings.get("canonical", False))
    return stack(g1, g2)
