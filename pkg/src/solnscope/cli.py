"""Command-line front end.

Problem files are flat ``key = value`` text::

    # comments and blank lines are ignored
    kind = regularized
    function = hinge(x1)
    A = [[0,1]]
    b = [1]
    checks = existence,uniqueness      # optional

``kind`` is ``regularized`` (min f + ½‖Ax − b‖²) or ``constrained``
(min f s.t. Ax = b).  Exit codes: 0 ok, 1 some diagnostic undecidable,
2 parse or dimension error, 3 golden mismatch.
"""
from __future__ import annotations

import argparse
import difflib
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import dsl
from . import funcat as FC
from . import report as R
from . import scalars as S
from .dsl import ParseError, UnknownAtom
from .ratlin import DimensionError, RationalMatrix

__all__ = ["ProblemSpec", "ParseError", "UnknownAtom", "DimensionError", "parse_spec", "render_spec",
           "run", "paper_suite", "main"]

KINDS = ("regularized", "constrained")
KEYS = ("kind", "function", "A", "b", "checks")
EXIT_OK, EXIT_UNDECIDABLE, EXIT_INPUT, EXIT_GOLDEN = 0, 1, 2, 3


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    function: str
    A: tuple  # rows of Fractions
    b: tuple
    checks: tuple | None = None

    @property
    def matrix(self) -> RationalMatrix:
        return RationalMatrix.from_rows(self.A, cols=self.n)

    @property
    def n(self) -> int:
        return len(self.A[0]) if self.A else 0


# --------------------------------------------------------------------------
# spec files


_NUM = re.compile(r"\s*(-?\d+(?:/\d+)?)\s*")


class _Brackets:
    """Scanner for ``[1,2/3]`` and ``[[1,0],[0,1]]`` with column tracking."""

    def __init__(self, text: str, line: int, col0: int):
        self.text, self.line, self.col0, self.i = text, line, col0, 0

    def err(self, msg):
        raise ParseError(msg, self.line, self.col0 + self.i)

    def skip(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def expect(self, ch):
        self.skip()
        if self.i >= len(self.text) or self.text[self.i] != ch:
            self.err(f"expected '{ch}'")
        self.i += 1

    def peek(self):
        self.skip()
        return self.text[self.i] if self.i < len(self.text) else ""

    def number(self) -> Fraction:
        m = _NUM.match(self.text, self.i)
        if not m:
            self.err("expected a rational ('p/q' or an integer)")
        try:
            val = S.parse_rational(m.group(1))
        except (ValueError, ZeroDivisionError):
            self.err(f"bad rational {m.group(1)!r}")
        self.i = m.end()
        return val

    def vector(self) -> tuple:
        self.expect("[")
        out = []
        if self.peek() != "]":
            out.append(self.number())
            while self.peek() == ",":
                self.i += 1
                out.append(self.number())
        self.expect("]")
        return tuple(out)

    def matrix(self) -> tuple:
        self.expect("[")
        rows = []
        if self.peek() != "]":
            rows.append(self.vector())
            while self.peek() == ",":
                self.i += 1
                rows.append(self.vector())
        self.expect("]")
        return tuple(rows)

    def done(self):
        self.skip()
        if self.i != len(self.text):
            self.err("unexpected trailing text")


def _checks(text: str, line: int, col: int) -> tuple:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    for name in names:
        if name not in R.SECTIONS:
            raise ParseError(f"unknown check {name!r} (choose from {', '.join(R.SECTIONS)})", line, col)
    if not names:
        raise ParseError("empty checks list", line, col)
    return names


def parse_spec(text: bytes | str) -> ProblemSpec:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc.reason}", 1, exc.start + 1) from None
    fields, where = {}, {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            raise ParseError("expected 'key = value'", ln, len(body) - len(body.lstrip()) + 1)
        key, value = body.split("=", 1)
        key_col = len(key) - len(key.lstrip()) + 1
        key = key.strip()
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", ln, key_col)
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", ln, key_col)
        col = len(body.split("=", 1)[0]) + 2 + (len(value) - len(value.lstrip()))
        fields[key], where[key] = value.strip(), (ln, col)
    for key in ("kind", "function", "A", "b"):
        if key not in fields:
            raise ParseError(f"missing key {key!r}", len(text.splitlines()) or 1, 1)

    if fields["kind"] not in KINDS:
        raise ParseError(f"kind must be one of {', '.join(KINDS)}", *where["kind"])
    f = dsl.parse_function(fields["function"], *where["function"])
    scan = _Brackets(fields["A"], *where["A"])
    A = scan.matrix()
    scan.done()
    scan = _Brackets(fields["b"], *where["b"])
    b = scan.vector()
    scan.done()
    checks = _checks(fields["checks"], *where["checks"]) if "checks" in fields else None

    if not A or not A[0]:
        raise DimensionError("A must have at least one row and one column")
    if any(len(r) != len(A[0]) for r in A):
        raise DimensionError("rows of A have different lengths")
    if len(b) != len(A):
        raise DimensionError(f"b has {len(b)} entries but A has {len(A)} rows")
    if FC.max_index(f) >= len(A[0]):
        raise DimensionError(f"function reads x{FC.max_index(f) + 1} but A has {len(A[0])} columns")
    return ProblemSpec(fields["kind"], fields["function"], A, b, checks)


def _num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def render_spec(spec: ProblemSpec) -> str:
    lines = [
        f"kind = {spec.kind}",
        f"function = {spec.function}",
        "A = [" + ",".join("[" + ",".join(_num(v) for v in row) + "]" for row in spec.A) + "]",
        "b = [" + ",".join(_num(v) for v in spec.b) + "]",
    ]
    if spec.checks:
        lines.append("checks = " + ",".join(spec.checks))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# reports


def run(spec: ProblemSpec, checks=None, oracle_verify: bool = False, seed: int = 0) -> R.ReportDocument:
    f = dsl.parse_function(spec.function)
    build = R.p1_document if spec.kind == "regularized" else R.p2_document
    doc = build(f, spec.function, spec.matrix, spec.b, seed=seed, oracle_verify=oracle_verify)
    sections = checks or spec.checks
    if sections:
        keep = set(sections)
        if oracle_verify:
            keep.add("checks")
        doc = R.select(doc, keep)
    return doc


def load_schema() -> dict:
    return json.loads(resources.files("solnscope").joinpath("report.schema.json").read_text())


def render_json(doc: R.ReportDocument) -> str:
    payload = R.to_json(doc)
    jsonschema.validate(payload, load_schema())
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# paper suite


def suite_specs() -> list[tuple[str, ProblemSpec]]:
    root = resources.files("solnscope").joinpath("paper_suite")
    names = sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".spec"))
    return [(name, parse_spec(root.joinpath(name + ".spec").read_bytes())) for name in names]


def golden(name: str) -> str:
    return resources.files("solnscope").joinpath("paper_suite").joinpath(name + ".txt").read_text()


def _row_diff(name: str, want: str, got: str) -> list[str]:
    """Readable differences, naming the criterion of each changed row."""
    out = []
    for line in difflib.unified_diff(want.splitlines(), got.splitlines(), "golden", "current", lineterm="", n=0):
        if line.startswith(("---", "+++", "@@")):
            continue
        crit = line[1:].split(" | ", 1)[0].strip()
        out.append(f"{name}: {'golden' if line[0] == '-' else 'current'} row '{crit}': {line[1:]}")
    return out


def paper_suite(output_dir, out=None) -> int:
    out = out or sys.stdout
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    diffs = []
    specs = suite_specs()
    for name, spec in specs:
        text = R.render_text(run(spec))
        (output_dir / f"{name}.txt").write_text(text)
        diffs += _row_diff(name, golden(name), text)
    for line in diffs:
        print(line, file=out)
    print(f"{len(specs)} reports written to {output_dir}; {'mismatch' if diffs else 'all match goldens'}", file=out)
    return EXIT_GOLDEN if diffs else EXIT_OK


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solnscope", description="Existence, compactness and uniqueness diagnostics.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="diagnose one problem file")
    r.add_argument("spec_file")
    r.add_argument("--json", action="store_true", help="emit JSON (validated against the report schema)")
    r.add_argument("--checks", help="comma list from: " + ",".join(R.SECTIONS))
    r.add_argument("--oracle-verify", action="store_true", help="append numerical oracle agreement rows")
    r.add_argument("--seed", type=int, default=0, help="seed for sampled property rows")
    r.add_argument("--paper-suite", metavar="DIR", help="ignore spec_file and run the paper suite into DIR")
    s = sub.add_parser("paper-suite", help="regenerate the table reports and diff against goldens")
    s.add_argument("output_dir")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "paper-suite":
        return paper_suite(args.output_dir)
    if args.paper_suite:
        return paper_suite(args.paper_suite)
    try:
        spec = parse_spec(Path(args.spec_file).read_bytes())
        checks = _checks(args.checks, 0, 0) if args.checks else None
    except (ParseError, DimensionError) as exc:
        print(f"{args.spec_file}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"{args.spec_file}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    doc = run(spec, checks=checks, oracle_verify=args.oracle_verify, seed=args.seed)
    sys.stdout.write(render_json(doc) if args.json else R.render_text(doc))
    return EXIT_UNDECIDABLE if doc.undecidable else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
