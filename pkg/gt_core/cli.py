"""gt_core/cli.py

Defines the gt_core command line: simulate, design, decode and bound

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

import argparse
import logging
import sys

from gt_core import bounds, config, decoders, defaults, harness, input_format, output_format
from gt_core._version import current
from gt_core.designs import design_from_settings
from gt_core.exceptions import InvalidArgument, NumericDegeneracy
from gt_core.model import CommunityStructure

LOGGER = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE = 0, 2, 3
DECODERS = ("comp", "threshold", "repetition", "lbp")


def _emit(content, out=None):
    if out:
        with open(out, "wb") as output:
            output.write(content)
        LOGGER.info("Wrote %s", out)
    else:
        sys.stdout.buffer.write(content)
        sys.stdout.flush()


def _read(path):
    with open(path, "rb") as source:
        return source.read()


def simulate(args):
    cfg = config.load_experiment(args.config)
    for name in ("trials", "seed", "workers"):
        if getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))

    formatter = defaults.output_formats[args.format]
    if args.algorithm:
        rows = harness.simulate_trials(cfg, args.algorithm, args.representatives)
        if args.format == "csv":
            formatter = defaults.trial_output_format
        _emit(formatter(rows), args.out)
        return EXIT_OK
    records = harness.run_experiment(cfg)
    _emit(harness.write_records(records, output_format=formatter), args.out or cfg.out)
    return EXIT_OK


def design(args):
    settings = config.load_design(args.config)
    if args.seed is not None:
        settings["seed"] = args.seed
    _emit(output_format.sparse_rows(design_from_settings(settings)), args.out)
    return EXIT_OK


def _structure(args):
    if args.family_sizes:
        return CommunityStructure(args.family_sizes)
    if args.families and args.family_size:
        return CommunityStructure([args.family_size] * args.families)
    if args.decoder == "lbp":
        raise InvalidArgument(
            "The lbp decoder needs --family-sizes or --families with --family-size"
        )
    return None


def decode(args):
    outcomes = input_format.bits(args.outcomes.encode("utf8"))
    threshold = decoders.ThresholdConfig(args.z, args.delta)

    if args.decoder == "repetition":
        if not args.members:
            raise InvalidArgument("The repetition decoder needs --members")
        repetitions = len(outcomes) // args.members
        result = decoders.repetition_decode(outcomes, args.members, repetitions, threshold)
        _emit(output_format.decoded(result), args.out)
        return EXIT_OK

    if not args.matrix:
        raise InvalidArgument("The {0} decoder needs --matrix".format(args.decoder))
    matrix = input_format.sparse_rows(_read(args.matrix))
    structure = _structure(args)
    if args.decoder == "comp":
        result = decoders.comp(matrix, outcomes, structure)
    elif args.decoder == "threshold":
        result = decoders.threshold_decode(matrix, outcomes, threshold, structure)
    else:
        if args.q is None or args.p is None:
            raise InvalidArgument("The lbp decoder needs --q and --p")
        lbp = decoders.LbpConfig(
            args.q, args.p, args.z, args.iterations, community_aware=not args.non_community
        )
        result = decoders.lbp_decode(matrix, structure, lbp, outcomes)
    _emit(output_format.decoded(result, posteriors=args.posteriors), args.out)
    return EXIT_OK


def _parameters(pairs):
    parameters = {}
    for pair in pairs:
        name, separator, value = pair.partition("=")
        if not separator or not name:
            raise InvalidArgument("Bound parameters are given as name=value", {"parameter": pair})
        parameters[name.strip()] = value.strip()
    return parameters


def bound(args):
    report = bounds.evaluate(args.formula, **_parameters(args.parameters))
    _emit(defaults.bound_output_formats[args.format]([report]), args.out)
    return EXIT_OK


def parser():
    """Returns the argument parser of the gt_core command"""
    main_parser = argparse.ArgumentParser(
        prog="gt_core", description="Community-aware group testing simulator"
    )
    main_parser.add_argument("--version", action="version", version=current)
    verbosity = main_parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="log progress at debug level"
    )
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    commands = main_parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("simulate", help="run an experiment or per-trial algorithm runs")
    run.add_argument("--config", required=True, help="JSON experiment configuration")
    run.add_argument("--out", help="output CSV, stdout by default")
    run.add_argument("--format", choices=sorted(defaults.output_formats), default="csv")
    run.add_argument("--algorithm", choices=tuple(sorted(harness.ALGORITHM_METHODS)) + ("alg1",))
    run.add_argument(
        "--representatives", default="M", help="representatives per family, an integer or M"
    )
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.set_defaults(handler=simulate)

    build = commands.add_parser("design", help="write a test matrix in the sparse row format")
    build.add_argument("--config", required=True, help="JSON design configuration")
    build.add_argument("--out")
    build.add_argument("--seed", type=int)
    build.set_defaults(handler=design)

    decoding = commands.add_parser("decode", help="decode an outcome vector")
    decoding.add_argument("--matrix", help="sparse row matrix file")
    decoding.add_argument("--outcomes", required=True, help="outcome bits, e.g. 0110")
    decoding.add_argument("--decoder", choices=DECODERS, default="comp")
    decoding.add_argument("--z", type=float, default=0.0)
    decoding.add_argument("--delta", type=float, default=0.0)
    decoding.add_argument("--q", type=float)
    decoding.add_argument("--p", type=float)
    decoding.add_argument("--iterations", type=int, default=defaults.lbp_iterations)
    decoding.add_argument(
        "--non-community", action="store_true", help="lbp without the family layer"
    )
    decoding.add_argument("--families", type=int)
    decoding.add_argument("--family-size", type=int)
    decoding.add_argument(
        "--family-sizes", type=lambda value: [int(size) for size in value.split(",")]
    )
    decoding.add_argument("--members", type=int, help="population size of a repetition design")
    decoding.add_argument("--posteriors", action="store_true")
    decoding.add_argument("--out")
    decoding.set_defaults(handler=decode)

    evaluation = commands.add_parser("bound", help="evaluate a closed-form bound")
    evaluation.add_argument("--formula", required=True, choices=tuple(sorted(bounds.FORMULAS)))
    evaluation.add_argument("parameters", nargs="*", help="name=value")
    evaluation.add_argument("--out")
    evaluation.add_argument(
        "--format", choices=sorted(defaults.bound_output_formats), default="csv"
    )
    evaluation.set_defaults(handler=bound)
    return main_parser


def main(argv=None):
    args = parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.handler(args)
    except (ValueError, TypeError, OSError) as error:
        # InvalidArgument is a ValueError
        LOGGER.error("%s", error)
        return EXIT_INVALID
    except NumericDegeneracy as error:
        LOGGER.error("%s", error)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
