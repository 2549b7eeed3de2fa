"""Recession-cone identities on random rational polyhedra.

Checks, for random (C, D) with C a polyhedron and D a subspace:
  rec C equals the cone of directions found by definition,
  rec(C & D) = rec C & D,
  rec(C - x0) = rec C for points x0 of C,
and reports failures and timing per dimension.
"""
import argparse
import random
import sys
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from solnscope import setalg as SA  # noqa: E402
from tests.test_setalg import _random_case, _recession_by_definition  # noqa: E402


@dataclass
class Config:
    cases: int = 200
    seed: int = 20240611


def run(cfg: Config):
    rng = random.Random(cfg.seed)
    stats = defaultdict(lambda: [0, 0, 0.0])  # dim -> [cases, failures, seconds]
    for _ in range(cfg.cases):
        C, D, p = _random_case(rng)
        t = time.perf_counter()
        flat = SA.AffineFlat.subspace(D)
        rec = SA.recession_cone(C)
        ok = SA.equal(rec, _recession_by_definition(C))
        ok &= SA.equal(SA.recession_cone(SA.intersect_flat(C, flat)), SA.intersect_flat(rec, flat))
        ok &= SA.equal(SA.recession_cone(SA.translate(C, [-v for v in p])), rec)
        row = stats[C.n]
        row[0] += 1
        row[1] += not ok
        row[2] += time.perf_counter() - t
    print("dim  cases  failures  mean ms")
    for dim in sorted(stats):
        n, bad, secs = stats[dim]
        print(f"{dim:>3}  {n:>5}  {bad:>8}  {1000 * secs / n:>7.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=Config.cases)
    ap.add_argument("--seed", type=int, default=Config.seed)
    run(Config(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
