"""gt_core/bounds.py

Defines the closed-form lower bounds, expected test counts and error probabilities of community-aware group
testing, plus a registry that evaluates any of them by id with string coercion through their annotations

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

import itertools
import math
from fractions import Fraction

import numpy
from scipy import special

from gt_core import introspect, types
from gt_core.designs import BlockDesignSpec
from gt_core.exceptions import InvalidArgument, SizeLimitExceeded
from gt_core.model import Combinatorial, CommunityStructure, InfectionModelSpec, Probabilistic

EXACT_BINOMIAL_LIMIT = 10 ** 6
COMPOSITION_LIMIT = 12
MODELS = ("combinatorial", "probabilistic")
SCHEMES = ("repetition", "bernoulli", "constant_weight", "two_stage")
ERRORS = ("fn", "fp")
FORMULAS = {}


class BoundReport(object):
    """A formula value together with the formula id, the inputs it was evaluated at and its direction"""

    __slots__ = ("value", "formula", "inputs", "is_upper_bound")

    def __init__(self, value, formula, inputs=None, is_upper_bound=False):
        self.value = value
        self.formula = formula
        self.inputs = dict(inputs or {})
        self.is_upper_bound = bool(is_upper_bound)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return "BoundReport({0}={1}, is_upper_bound={2})".format(
            self.formula, float(self.value), self.is_upper_bound
        )


def formula(identifier, is_upper_bound=False):
    """Registers a function under a formula id so it can be evaluated by name"""

    def register(function):
        function.formula_id = identifier
        function.is_upper_bound = is_upper_bound
        FORMULAS[identifier] = function
        return function

    return register


def _community(value):
    return value if isinstance(value, CommunityStructure) else CommunityStructure(value)


def _model_kind(value):
    if isinstance(value, InfectionModelSpec):
        return value
    return types.OneOf(MODELS)(str(value).strip().lower())


_flags = types.Mapping({"true": True, "false": False, "1": True, "0": False})


def _flag(value):
    if isinstance(value, bool):
        return value
    return _flags(str(value).strip().lower())


community = types.accept(_community, "Comma separated family sizes")
model_kind = types.accept(_model_kind, "combinatorial or probabilistic")
counts = types.Multi(types.count, types.whole_numbers)
probabilities = types.Multi(types.probability, types.probabilities)
block_rows = types.whole_numbers
flag = types.accept(_flag, "true or false", "Expected true or false")


def h2(p):
    """Binary entropy in bits, 0 at both endpoints"""
    p = types.check(types.probability, p, "p")
    return float(special.entr(p) + special.entr(1 - p)) / math.log(2)


def log2_binomial(n, k):
    """log2 C(n, k), exact below a million and through log-gamma above"""
    n = types.check(types.count, n, "n")
    k = types.check(types.count, k, "k")
    if k > n:
        raise InvalidArgument("k larger than n", {"n": n, "k": k})
    if n < EXACT_BINOMIAL_LIMIT:
        return math.log2(math.comb(n, k))
    log_binomial = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return float(log_binomial) / math.log(2)


def _model(model, **params):
    kind = types.check(model_kind, model, "model")
    if isinstance(kind, InfectionModelSpec):
        return kind
    names = ("k_f", "k_m") if kind == "combinatorial" else ("q", "p")
    missing = [name for name in names if params.get(name) is None]
    if missing:
        raise InvalidArgument("Missing {0} model parameters".format(kind), {"missing": missing})
    if kind == "combinatorial":
        return Combinatorial(params["k_f"], params["k_m"])
    return Probabilistic(params["q"], params["p"])


@formula("counting")
def counting_bound(n: types.count, k: types.count):
    """The counting bound log2 C(n, k) on the tests of any zero-error scheme"""
    return log2_binomial(n, k)


@formula("counting_probabilistic")
def counting_bound_probabilistic(n: types.count, p: types.probability):
    """n h2(p), the average tests needed when each of n members is infected with probability p"""
    return types.check(types.count, n, "n") * h2(p)


@formula("combinatorial_community")
def combinatorial_community_bound(structure: community, k_f: types.count, k_m: counts):
    """log2 C(F, k_f) plus log2 C(M_j, k_m^j) for the first k_f families of the k_m sequence"""
    structure = types.check(community, structure, "structure")
    infected = Combinatorial(k_f, k_m).per_family(structure)
    k_f = types.check(types.count, k_f, "k_f")
    total = log2_binomial(structure.families, k_f)
    for size, count in zip(structure.family_sizes[:k_f], infected[:k_f]):
        total += log2_binomial(size, count)
    return total


@formula("probabilistic_community")
def probabilistic_community_bound(structure: community, q: types.probability, p: probabilities):
    """F h2(q) + sum q M_j h2(p_j) - sum w_j h2((1 - q) / w_j), w_j = 1 - q + q (1 - p_j)^M_j"""
    structure = types.check(community, structure, "structure")
    q = types.check(types.probability, q, "q")
    total = structure.families * h2(q)
    for size, p_j in zip(structure.family_sizes, Probabilistic(q, p).per_family(structure)):
        total += q * size * h2(p_j)
        weight = 1 - q + q * (1 - p_j) ** size
        if weight > 0:
            total -= weight * h2(min((1 - q) / weight, 1.0))
    return total


def phi_c(size, infected, representatives):
    """The chance that R uniformly chosen members of a family with k_m infected include an infected one"""
    size = types.check(types.positive_count, size, "M")
    infected = types.check(types.InRange(0, size, inclusive=True), infected, "k_m")
    representatives = types.check(types.count, representatives, "R")
    if representatives > size:
        raise InvalidArgument(
            "More representatives than family members", {"R": representatives, "M": size}
        )
    if representatives == 0:
        return 0.0
    if size - infected < representatives:
        return 1.0
    return 1 - math.comb(size - infected, representatives) / math.comb(size, representatives)


def phi_p(p, representatives):
    """The chance that R members of an infected family, each infected with probability p, include one"""
    p = types.check(types.probability, p, "p")
    return 1 - (1 - p) ** types.check(types.count, representatives, "R")


@formula("phi")
def mixed_sample_positive_fraction(
    model: model_kind,
    M: types.positive_count,
    R: types.count,
    k_m: types.count = None,
    p: types.probability = None,
):
    """The expected fraction of infected families whose mixed sample of R representatives is positive"""
    infection = _model(model, k_f=0, k_m=k_m, q=0.0, p=p)
    if isinstance(infection, Combinatorial):
        if isinstance(infection.k_m, tuple):
            raise InvalidArgument("A single k_m is required", {"k_m": infection.k_m})
        return phi_c(M, infection.k_m, R)
    if isinstance(infection.p, tuple):
        raise InvalidArgument("A single p is required", {"p": infection.p})
    if types.check(types.count, R, "R") > types.check(types.positive_count, M, "M"):
        raise InvalidArgument("More representatives than family members", {"R": R, "M": M})
    return phi_p(infection.p, R)


@formula("expected_tests_combinatorial", is_upper_bound=True)
def expected_tests_combinatorial(
    F: types.positive_count,
    M: types.positive_count,
    k_f: types.count,
    k_m: types.count,
    R: types.count,
    variant: types.OneOf(("hgbsa", "bsa")) = "hgbsa",
):
    """The maximum expected tests of the adaptive community algorithm under the combinatorial model"""
    F = types.check(types.positive_count, F, "F")
    M = types.check(types.positive_count, M, "M")
    variant = types.check(types.OneOf(("hgbsa", "bsa")), variant, "variant")
    Combinatorial(k_f, k_m).per_family(CommunityStructure([M] * F))
    phi = phi_c(M, k_m, R)
    n = F * M
    k = k_f * k_m
    first = k_f * phi
    second = k * (1 - phi)
    remaining = n - k_f * M * phi

    total = 0.0
    if first > 0:
        searched = F / first if variant == "hgbsa" else F
        total += first * (math.log2(searched) + 1 + M)
    if second > 0:
        pooled = remaining / second if variant == "hgbsa" else remaining
        total += second * (math.log2(pooled) + 1)
    return total


@formula("expected_tests_probabilistic", is_upper_bound=True)
def expected_tests_probabilistic(
    F: types.positive_count,
    M: types.positive_count,
    q: types.probability,
    p: types.probability,
    R: types.count,
):
    """F q phi (log2 F + 1 + M) + n q p (1 - phi) (log2(n (1 - q phi)) + 1) with phi = 1 - (1 - p)^R"""
    F = types.check(types.positive_count, F, "F")
    M = types.check(types.positive_count, M, "M")
    q = types.check(types.probability, q, "q")
    R = types.check(types.count, R, "R")
    if R > M:
        raise InvalidArgument("More representatives than family members", {"R": R, "M": M})
    phi = phi_p(p, R)
    n = F * M

    total = 0.0
    if q * phi > 0:
        total += F * q * phi * (math.log2(F) + 1 + M)
    residual = n * q * p * (1 - phi)
    if residual > 0:
        total += residual * (math.log2(n * (1 - q * phi)) + 1)
    return total


def optimal_representatives(F, M, q, p):
    """Returns the representative count R in 0..M minimizing expected_tests_probabilistic, smallest on ties"""
    values = [expected_tests_probabilistic(F, M, q, p, R) for R in range(M + 1)]
    return int(numpy.argmin(values))


def elementary_symmetric(values, k):
    """The sum over every k-subset of values of the product of its entries"""
    totals = [1] + [0] * k
    for value in values:
        for order in range(k, 0, -1):
            totals[order] += totals[order - 1] * value
    return totals[k]


def _block_sizes(c):
    sizes = tuple(
        types.check(types.positive_count, value, "c") for value in types.check(block_rows, c, "c")
    )
    if not sizes:
        raise InvalidArgument("At least one block row is required", {"c": c})
    return sizes


@formula("pr_joint")
def pr_joint(
    model: model_kind,
    c: block_rows,
    k_f: types.count = None,
    q: types.probability = None,
    exact: flag = False,
):
    """The probability that some block row of G2 holds two or more infected families.

       Under the combinatorial model this is one minus the number of placements with at most one infected
       family per row over C(F, k_f); exact=True returns it as a Fraction.
    """
    c = _block_sizes(c)
    families = sum(c)
    infection = _model(model, k_f=k_f, k_m=0, q=q, p=0.0)
    if isinstance(infection, Combinatorial):
        if infection.k_f > families:
            raise InvalidArgument(
                "More infected families than families", {"k_f": infection.k_f, "F": families}
            )
        placements = math.comb(families, infection.k_f)
        value = 1 - Fraction(elementary_symmetric(c, infection.k_f), placements)
        return value if exact else float(value)

    q = infection.q
    clear = 1.0
    for size in c:
        clear *= (1 - q) ** size + size * q * (1 - q) ** (size - 1)
    return 1 - clear


def _symmetric_layout(F, M, T2):
    F = types.check(types.positive_count, F, "F")
    M = types.check(types.positive_count, M, "M")
    T2 = types.check(types.positive_count, T2, "T2")
    if T2 % M:
        raise InvalidArgument("T2 must be a multiple of M", {"T2": T2, "M": M})
    rows = T2 // M
    if rows > F:
        raise InvalidArgument("More block rows than families", {"b": rows, "F": F})
    per_row = -(-F // rows)
    return F, M, rows, per_row, per_row * rows != F


@formula("any_fp")
def any_fp_probability(
    model: model_kind,
    F: types.positive_count,
    M: types.positive_count,
    T2: types.positive_count,
    k_f: types.count = None,
    k_m: types.count = None,
    q: types.probability = None,
    p: types.probability = None,
):
    """The probability that COMP over the symmetric community design calls some healthy member infected.

       When b = T2 / M does not divide F the community is padded with never-infected families and the
       report is flagged as an upper bound.
    """
    F, M, rows, per_row, padded = _symmetric_layout(F, M, T2)
    infection = _model(model, k_f=k_f, k_m=k_m, q=q, p=p)
    inputs = dict(
        model=getattr(infection, "name", model), F=F, M=M, T2=T2, k_f=k_f, k_m=k_m, q=q, p=p
    )

    if isinstance(infection, Combinatorial):
        if isinstance(infection.k_m, tuple) or infection.k_m > M or infection.k_f > F:
            raise InvalidArgument(
                "Infeasible combinatorial parameters", {"k_f": infection.k_f, "k_m": infection.k_m}
            )
        slots = rows * per_row
        members_factor = 1 - Fraction(1, math.comb(M, infection.k_m))
        spread = Fraction(
            math.comb(rows, infection.k_f) * per_row ** infection.k_f,
            math.comb(slots, infection.k_f),
        )
        value = float(members_factor * (1 - spread))
    else:
        if isinstance(infection.p, tuple):
            raise InvalidArgument("A single p is required", {"p": infection.p})
        p, q = infection.p, infection.q
        members_factor = 1 - sum(
            (p ** infected * (1 - p) ** (M - infected)) ** 2 / math.comb(M, infected)
            for infected in range(1, M + 1)
        )
        row_clear = (1 - q) ** (per_row - 1) * (1 - q + per_row * q)
        value = members_factor * (1 - row_clear ** rows)
    return BoundReport(value, "any_fp", inputs, is_upper_bound=padded)


@formula("error_rate", is_upper_bound=True)
def error_rate_bound(
    model: model_kind,
    F: types.positive_count,
    M: types.positive_count,
    c: types.positive_count,
    k_f: types.count = None,
    k_m: types.count = None,
    q: types.probability = None,
    p: types.probability = None,
):
    """Upper bound on the expected fraction of members COMP misidentifies with c families per block row"""
    F = types.check(types.positive_count, F, "F")
    M = types.check(types.positive_count, M, "M")
    c = types.check(types.positive_count, c, "c")
    infection = _model(model, k_f=k_f, k_m=k_m, q=q, p=p)
    if isinstance(infection, Combinatorial):
        if isinstance(infection.k_m, tuple) or infection.k_m > M:
            raise InvalidArgument(
                "Infeasible combinatorial parameters", {"k_m": infection.k_m, "M": M}
            )
        layout = BlockDesignSpec.symmetric(F, -(-F // c))
        joint = pr_joint(infection, layout.c)
        return infection.k_f * (M - infection.k_m) / (F * M) * joint
    if isinstance(infection.p, tuple):
        raise InvalidArgument("A single p is required", {"p": infection.p})
    return (1 - infection.p) * infection.q * (1 - (1 - infection.q) ** (c - 1))


def _slack(z, delta):
    z = types.check(types.probability, z, "z")
    delta = types.check(types.non_negative, delta, "delta")
    if z * (1 + delta) > 1:
        raise InvalidArgument("z(1 + delta) must not exceed 1", {"z": z, "delta": delta})
    return z, delta


@formula("noisy", is_upper_bound=True)
def noisy_bound(scheme: types.OneOf(SCHEMES), error: types.OneOf(ERRORS) = "fn", **params):
    """Chernoff bounds on the false negative (or false positive) probability of threshold decoding.

       repetition: T, n, z, delta. bernoulli: T, theta, z, delta, k. constant_weight: L, z, delta.
       two_stage: T1, k_f, z, delta.
    """
    scheme = types.check(types.OneOf(SCHEMES), scheme, "scheme")
    error = types.check(types.OneOf(ERRORS), error, "error")
    try:
        z, delta = _slack(params.pop("z"), params.pop("delta"))
        if scheme == "repetition":
            tests = types.check(types.positive_count, params.pop("T"), "T")
            n = types.check(types.positive_count, params.pop("n"), "n")
            value = 0.0 if error == "fp" else math.exp(-2 * (tests / n) * (z * delta) ** 2)
        elif scheme == "bernoulli":
            tests = types.check(types.positive_count, params.pop("T"), "T")
            theta = types.check(types.probability, params.pop("theta"), "theta")
            if error == "fn":
                gap = z * delta
            else:
                k = types.check(types.count, params.pop("k"), "k")
                gap = (1 - z) * (1 - theta) ** k - z * delta
            value = (1 - theta + theta * math.exp(-2 * gap ** 2)) ** tests
        elif scheme == "constant_weight":
            weight = types.check(types.count, params.pop("L"), "L")
            value = math.exp(-2 * weight * (z * delta) ** 2)
        else:
            if error == "fp":
                raise InvalidArgument(
                    "The two-stage bound covers false negatives only", {"error": error}
                )
            tests = types.check(types.positive_count, params.pop("T1"), "T1")
            k_f = types.check(types.positive_count, params.pop("k_f"), "k_f")
            value = math.exp(-2 * (tests / k_f) * (z * delta) ** 2)
    except KeyError as missing:
        raise InvalidArgument("Missing {0} parameter".format(scheme), {"missing": missing.args[0]})
    params.pop("k", None)
    if params:
        raise InvalidArgument(
            "Unexpected {0} parameters".format(scheme), {"unexpected": sorted(params)}
        )
    return value


def compositions(total, parts):
    """Yields every composition of total into parts positive integers"""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        edges = (0,) + cuts + (total,)
        yield tuple(end - start for start, end in zip(edges, edges[1:]))


class MinimizerRecord(object):
    """The outcome of checking whether the balanced block layout minimizes pr_joint"""

    __slots__ = ("balanced", "balanced_value", "minimum", "minimizers", "holds")

    def __init__(self, balanced, balanced_value, minimum, minimizers, holds):
        self.balanced = balanced
        self.balanced_value = balanced_value
        self.minimum = minimum
        self.minimizers = minimizers
        self.holds = holds

    def __bool__(self):
        return self.holds

    def __repr__(self):
        return "MinimizerRecord(balanced={0}, holds={1}, minimizers={2})".format(
            self.balanced, self.holds, len(self.minimizers)
        )


def symmetric_c_is_minimizer(model, F, b, k_f=None, q=None, tolerance=1e-12):
    """Evaluates pr_joint over every composition of F into b rows and checks the balanced one is minimal"""
    F = types.check(types.positive_count, F, "F")
    b = types.check(types.InRange(1, F, inclusive=True), b, "b")
    if F > COMPOSITION_LIMIT:
        raise SizeLimitExceeded(
            "Too many compositions to enumerate", {"F": F, "limit": COMPOSITION_LIMIT}
        )
    infection = _model(model, k_f=k_f, k_m=0, q=q, p=0.0)
    exact = isinstance(infection, Combinatorial)
    slack = 0 if exact else tolerance

    values = {layout: pr_joint(infection, layout, exact=exact) for layout in compositions(F, b)}
    minimum = min(values.values())
    minimizers = tuple(layout for layout, value in values.items() if value <= minimum + slack)
    balanced = BlockDesignSpec.balanced(F, b).c
    balanced_value = values[balanced]
    return MinimizerRecord(
        balanced, balanced_value, minimum, minimizers, balanced_value <= minimum + slack
    )


def evaluate(formula_id, **params):
    """Evaluates a registered formula, coercing every parameter through the formula's annotations"""
    formula_id = types.check(types.OneOf(tuple(FORMULAS)), formula_id, "formula")
    function = FORMULAS[formula_id]
    accepted = introspect.arguments(function)
    annotations = introspect.annotations(function)
    unknown = set(params) - set(accepted)
    if unknown and not introspect.takes_kwargs(function):
        raise InvalidArgument(
            "Unknown {0} parameters".format(formula_id), {"unknown": sorted(unknown)}
        )

    coerced = {}
    for key, value in params.items():
        kind = annotations.get(key)
        if kind is None and isinstance(value, str):
            kind = types.Multi(types.number, types.float_number, types.accept(str))
        coerced[key] = value if kind is None else types.check(kind, value, key)

    result = function(**coerced)
    if isinstance(result, BoundReport):
        return result
    return BoundReport(result, formula_id, coerced, function.is_upper_bound)
