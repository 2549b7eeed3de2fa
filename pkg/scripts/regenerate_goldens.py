"""Rewrite the committed paper-suite goldens from the current code.

Only run this after checking every changed row against the tables by hand;
the goldens are the regression contract, not a cache.
"""
import difflib
import sys
from pathlib import Path

from solnscope import cli
from solnscope import report as R

ROOT = Path(__file__).resolve().parents[1] / "src" / "solnscope" / "paper_suite"


def main() -> int:
    for name, spec in cli.suite_specs():
        text = R.render_text(cli.run(spec))
        path = ROOT / f"{name}.txt"
        old = path.read_text() if path.exists() else ""
        if old != text:
            sys.stdout.writelines(difflib.unified_diff(old.splitlines(True), text.splitlines(True), f"{name} (old)", f"{name} (new)"))
            path.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
