"""TLBO weight optimisation of a bundled problem over several seeds.

    python scripts/optimize_problem.py problem1 --seeds 10
    python scripts/optimize_problem.py problem3 --seeds 1 --workers 4
"""
import argparse
from pathlib import Path

import numpy as np

from scissorcable import fixtures, reporting
from scissorcable.document import optimizer_settings, to_model
from scissorcable.optimizer import DesignSpace, TLBOConfig, optimize


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("problem", choices=fixtures.NAMES)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--population", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()

    doc = fixtures.load(args.problem)
    spec = optimizer_settings(doc)
    if spec is None:
        parser.error(f"{args.problem} has no optimizer settings")
    model = to_model(doc)
    space = DesignSpace.for_model(model, spec.lower, spec.upper, spec.stress_limit, spec.deflection_limit,
                                  spec.penalty_exponent, spec.catalog, spec.groups)
    population = args.population or spec.population
    iterations = args.iterations or spec.iterations
    out = Path(args.out_dir) / args.problem
    out.mkdir(parents=True, exist_ok=True)

    print(f"{args.problem}: {space.n_vars} design variables, NP={population}, {iterations} iterations, "
          f"stress limit {spec.stress_limit} N/mm2, deflection limit {spec.deflection_limit} mm")
    reductions = []
    best = None
    for seed in range(args.seeds):
        result = optimize(model, space, TLBOConfig(population, iterations, seed, args.workers))
        reductions.append(result.weight_reduction)
        flag = "feasible" if result.best.feasible else f"psi-1={result.best.penalty - 1:.1e}"
        print(f"  seed {seed}: {result.initial.weight:.4f} -> {result.best.weight:.4f} kg "
              f"({100 * result.weight_reduction:+.1f}%), {flag}")
        (out / f"convergence_seed{seed}.csv").write_text(result.history.to_csv())
        if best is None or result.best.fitness < best.best.fitness:
            best = result
    print(f"median reduction {100 * np.median(reductions):.1f}%")
    (out / "optimization_summary.csv").write_text(reporting.optimization_summary(model, best))
    reporting.plot_convergence(best.history, out / "convergence.svg")
    print(reporting.optimization_summary(model, best), end="")


if __name__ == "__main__":
    main()
