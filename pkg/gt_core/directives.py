"""gt_core/directives.py

Defines the directives gt_core uses to annotate experiment runs with runtime information

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

from timeit import default_timer


class Timer(object):
    """Wall-clock time spent on a sweep point and the trial throughput it reached"""

    __slots__ = ("start", "trials", "round_to")

    def __init__(self, trials=0, round_to=3):
        self.start = default_timer()
        self.trials = trials
        self.round_to = round_to

    @property
    def elapsed(self):
        return round(default_timer() - self.start, self.round_to)

    @property
    def throughput(self):
        """Trials per second, 0 until measurable time has passed"""
        elapsed = default_timer() - self.start
        return self.trials / elapsed if elapsed > 0 else 0.0

    def per_trial(self):
        """Seconds per trial, the elapsed time when no trials were counted"""
        return round((default_timer() - self.start) / max(self.trials, 1), self.round_to)

    def __float__(self):
        return float(self.elapsed)

    def __str__(self):
        return "{0}s".format(self.elapsed)

    def __repr__(self):
        return "Timer(trials={0}, elapsed={1})".format(self.trials, self)
