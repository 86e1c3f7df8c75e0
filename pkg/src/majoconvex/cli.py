"""``majoconvex`` command-line entry point.

Exit codes: 0 verified/true, 1 refuted/false, 2 inconclusive, 3 usage or domain error.
"""

import argparse
import json
import sys

from .reporting import COMMANDS, EXIT_USAGE, RunConfig, UsageError, render, run

# flag name -> input key; every value is JSON
JSON_FLAGS = {
    "x": "vector", "y": "vector", "a": "vector", "b": "vector",
    "matrix": "matrix", "matrices": "list of matrices",
    "potential": "potential object or catalog name", "potentials": "list of potentials",
    "deformation": "deformation object or kind name", "box": "[lo, hi]",
}
INT_FLAGS = ("n", "m", "levels")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="majoconvex", description="Majorization and rank-one convexity verifiers.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--input", default=None, help="JSON document (inline or @path) with command inputs")
    p.add_argument("--timing", action="store_true", help="include wall time in the JSON report")
    for name, what in JSON_FLAGS.items():
        p.add_argument(f"--{name}", default=None, help=f"JSON {what}")
    for name in INT_FLAGS:
        p.add_argument(f"--{name}", type=int, default=None)
    return p


def _loads(flag, text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        if flag in ("potential", "deformation") and text.replace("(", "").replace(")", "").replace("_", "").isalnum():
            return text
        raise UsageError(f"{flag}: malformed JSON at position {e.pos}: {e.msg}") from None


def config_from_args(argv):
    args = build_parser().parse_args(argv)
    if args.samples < 1:
        raise UsageError("samples: must be >= 1")
    inputs = {}
    if args.input:
        text = args.input
        if text.startswith("@"):
            try:
                with open(text[1:]) as fh:
                    text = fh.read()
            except OSError as e:
                raise UsageError(f"input: {e}") from None
        doc = _loads("input", text)
        if not isinstance(doc, dict):
            raise UsageError("input: expected a JSON object")
        inputs.update(doc)
    for name in JSON_FLAGS:
        val = getattr(args, name)
        if val is not None:
            inputs[name] = _loads(name, val)
    for name in INT_FLAGS:
        val = getattr(args, name)
        if val is not None:
            inputs[name] = val
    return RunConfig(args.command, inputs, args.seed, args.samples, args.tol, args.out, args.format), args.timing


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        config, timing = config_from_args(argv)
        report = run(config)
    except ValueError as e:
        # UsageError, DomainError and PreconditionError are all ValueErrors
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, timing)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
