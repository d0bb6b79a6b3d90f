"""gt_core/output_format.py

Defines the built-in writers that render designs, outcomes, decoder results, bounds and metrics

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
from decimal import Decimal
from fractions import Fraction

import numpy

from gt_core.format import content_type
from gt_core.json_module import json as json_converter

json_converters = {}
METRICS_HEADER = (
    "experiment",
    "sweep_param",
    "value",
    "metric",
    "mean",
    "stderr",
    "trials",
    "seed",
)
TRIAL_HEADER = ("trial", "tests_used", "fn", "fp")
BOUND_HEADER = ("formula", "value", "is_upper_bound")


def _json_converter(item):
    for kind, transformer in json_converters.items():
        if isinstance(item, kind):
            return transformer(item)

    if isinstance(item, (Decimal, Fraction)):
        return float(item)
    elif hasattr(item, "__slots__"):
        return {name: getattr(item, name) for name in item.__slots__}
    elif hasattr(item, "__iter__"):
        return list(item)
    raise TypeError("Type not serializable")


def json_convert(*kinds):
    """Registers the wrapped method as a JSON converter for the provided types.

    NOTE: custom converters are always globally applied
    """

    def register_json_converter(function):
        for kind in kinds:
            json_converters[kind] = function
        return function

    return register_json_converter


@json_convert(numpy.ndarray)
def numpy_listable(item):
    return item.tolist()


@json_convert(numpy.bool_)
def numpy_boolable(item):
    return bool(item)


@json_convert(numpy.integer)
def numpy_integerable(item):
    return int(item)


@json_convert(numpy.floating)
def numpy_floatable(item):
    return float(item)


@content_type("application/json; charset=utf-8")
def json(content, ensure_ascii=False, **kwargs):
    """JSON (Javascript Serialized Object Notation)"""
    return json_converter.dumps(
        content, default=_json_converter, ensure_ascii=ensure_ascii, **kwargs
    ).encode("utf8")


@content_type("application/json; charset=utf-8")
def pretty_json(content, **kwargs):
    """JSON (Javascript Serialized Object Notion) pretty printed and indented"""
    return json(content, indent=4, separators=(",", ": "), **kwargs)


@content_type("text/plain; charset=utf-8")
def text(content, **kwargs):
    """Free form UTF-8 text"""
    return str(content).encode("utf8")


def _csv(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().encode("utf8")


def _bits(vector):
    return "".join("1" if bit else "0" for bit in numpy.asarray(vector).ravel())


@content_type("text/x-sparse-rows; charset=utf-8")
def sparse_rows(matrix, **kwargs):
    """A `T n` header followed by the space separated member indices of every test"""
    lines = ["{0} {1}".format(matrix.tests, matrix.members)]
    lines.extend(" ".join(str(member) for member in row) for row in matrix.rows())
    return ("\n".join(lines) + "\n").encode("utf8")


@content_type("text/x-bits; charset=utf-8")
def bits(vector, **kwargs):
    """A bit vector as a string of 0 / 1 characters"""
    return (_bits(vector) + "\n").encode("utf8")


@content_type("text/plain; charset=utf-8")
def decoded(result, posteriors=False, **kwargs):
    """The hard calls of a decoder result, with its posteriors to 6 decimals when requested"""
    lines = ["hard_calls={0}".format(_bits(result.hard_calls))]
    if posteriors and result.posteriors is not None:
        values = ",".join("{0:.6f}".format(p) for p in result.posteriors)
        lines.append("posteriors={0}".format(values))
    return ("\n".join(lines) + "\n").encode("utf8")


@content_type("text/csv; charset=utf-8")
def bound_csv(reports, **kwargs):
    """formula,value,is_upper_bound rows for BoundReports"""
    rows = (
        (report.formula, repr(float(report.value)), "true" if report.is_upper_bound else "false")
        for report in reports
    )
    return _csv(BOUND_HEADER, rows)


@content_type("text/csv; charset=utf-8")
def trial_rows(rows, **kwargs):
    """trial,tests_used,fn,fp rows of individual simulation runs"""
    return _csv(TRIAL_HEADER, rows)


@content_type("text/csv; charset=utf-8")
def metrics_csv(records, **kwargs):
    """The stable experiment,sweep_param,value,metric,mean,stderr,trials,seed metrics layout"""
    rows = (
        (
            record.experiment,
            record.sweep_param,
            repr(float(record.value)),
            record.metric,
            repr(float(record.mean)),
            repr(float(record.stderr)),
            record.trials,
            record.seed,
        )
        for record in records
    )
    return _csv(METRICS_HEADER, rows)
