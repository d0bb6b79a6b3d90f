"""gt_core/input_format.py

Defines the built-in readers that turn configuration files, test designs and outcome strings into gt_core objects

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

from gt_core.designs import TestMatrix
from gt_core.exceptions import InvalidArgument
from gt_core.format import content_type, underscore
from gt_core.json_module import json as json_converter


@content_type("text/plain")
def text(body, charset="utf-8", **kwargs):
    """Takes plain text data"""
    if hasattr(body, "read"):
        body = body.read()
    return body.decode(charset) if isinstance(body, bytes) else body


@content_type("application/json")
def json(body, charset="utf-8", **kwargs):
    """Takes JSON formatted data, converting it into native Python objects"""
    return json_converter.loads(text(body, charset=charset))


def underscore_dict(dictionary):
    """Returns a copy of dictionary with every camelCase key, nested ones included, underscored"""
    new_dictionary = {}
    for key, value in dictionary.items():
        if isinstance(value, dict):
            value = underscore_dict(value)
        if isinstance(key, str):
            key = underscore(key)
        new_dictionary[key] = value
    return new_dictionary


@content_type("application/json")
def json_underscore(body, charset="utf-8", **kwargs):
    """Takes a JSON configuration, underscoring every camelCase key of an object, nested ones included"""
    content = json(body, charset=charset)
    return underscore_dict(content) if isinstance(content, dict) else content


@content_type("text/x-sparse-rows")
def sparse_rows(body, charset="utf-8", **kwargs):
    """Takes a test design written as a `T n` header followed by one line of member indices per test"""
    lines = [line for line in text(body, charset=charset).splitlines() if not line.startswith("#")]
    if not lines or len(lines[0].split()) != 2:
        raise InvalidArgument("Missing `T n` header", {"header": lines[0] if lines else ""})
    try:
        tests, n = (int(value) for value in lines[0].split())
        rows = [[int(member) for member in line.split()] for line in lines[1:]]
    except ValueError as exception:
        raise InvalidArgument("Non-integer entry in test design", {"reason": str(exception)})

    extra = rows[tests:]
    if any(extra):
        raise InvalidArgument("More rows than the header declares", {"T": tests, "rows": len(rows)})
    rows = rows[:tests]
    if len(rows) < tests:
        raise InvalidArgument(
            "Fewer rows than the header declares", {"T": tests, "rows": len(rows)}
        )
    return TestMatrix.from_rows(rows, n)


@content_type("text/x-bits")
def bits(body, charset="utf-8", **kwargs):
    """Takes a string of 0 / 1 characters, ignoring whitespace and commas"""
    content = "".join(text(body, charset=charset).replace(",", " ").split())
    if set(content) - {"0", "1"}:
        raise InvalidArgument("Outcome vector must only hold 0 and 1", {"outcomes": content})
    return numpy.frombuffer(content.encode("ascii"), dtype=numpy.uint8) - ord("0")
