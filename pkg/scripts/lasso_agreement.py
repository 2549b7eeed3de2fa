"""Random lasso instances: exact diagnostics vs the numerical references.

For each instance, compares the exact Ax* from solve_p1 against proximal
gradient, and the exact optimum from sign-pattern enumeration against the
proximal-gradient objective.  Also tallies the uniqueness verdicts.

    python3 scripts/lasso_agreement.py --trials 200 --max-n 5
"""
import argparse
import random
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from solnscope import diag1 as D1
from solnscope import dsl, oracle
from solnscope.ratlin import RationalMatrix


@dataclass
class Config:
    trials: int = 100
    max_n: int = 5
    max_m: int = 3
    entry_bound: int = 3
    seed: int = 0


def random_instance(rng, cfg):
    n, m = rng.randint(2, cfg.max_n), rng.randint(1, cfg.max_m)
    k = cfg.entry_bound
    A = RationalMatrix.from_rows([[rng.randint(-k, k) for _ in range(n)] for _ in range(m)])
    b = tuple(Fraction(rng.randint(-k - 1, k + 1)) for _ in range(m))
    return A, b


def run(cfg: Config):
    f = dsl.parse_function("norm1()")
    rng = random.Random(cfg.seed)
    worst_fit = worst_obj = 0.0
    verdicts = Counter()
    t0 = time.perf_counter()
    for _ in range(cfg.trials):
        A, b = random_instance(rng, cfg)
        sol = D1.solve_p1(f, A, b)
        verdicts[D1.uniqueness_p1(sol, f, A).value] += 1
        pg = oracle.prox_grad(f, A, b)
        x = pg.minimizer_candidates[0]
        Ax = [sum(float(a) * v for a, v in zip(A.row(i), x)) for i in range(A.shape[0])]
        worst_fit = max(worst_fit, max(abs(p - float(q)) for p, q in zip(Ax, sol.Ax_star)))
        worst_obj = max(worst_obj, abs(pg.objective_value - float(oracle.lasso_enumerate(A, b).objective)))
    elapsed = time.perf_counter() - t0
    print(f"trials           {cfg.trials}")
    print(f"max |Ax diff|    {worst_fit:.2e}")
    print(f"max obj gap      {worst_obj:.2e}")
    print(f"unique yes/no    {verdicts[True]}/{verdicts[False]}")
    print(f"time             {elapsed:.1f}s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(Config()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=int, default=default)
    run(Config(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
