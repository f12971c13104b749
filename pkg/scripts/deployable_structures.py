"""Problems 3 and 4: cable status and member forces of the polar scissor arches.

    python scripts/deployable_structures.py [--out-dir results]
"""
import argparse
from pathlib import Path

from scissorcable import fixtures, reporting
from scissorcable.document import to_model
from scissorcable.model import MemberKind
from scissorcable.solver import iterate_cable_status


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()
    for name in ("problem3", "problem4"):
        model = to_model(fixtures.load(name))
        result = iterate_cable_status(model)
        state = result.cable_state
        print(f"{name}: {len(model.nodes)} nodes, {len(model.members)} members, {len(model.cables)} cables")
        for k, flags in enumerate(state.history):
            print(f"  iteration {k + 1}: {sum(flags)} active")
        print(f"  converged after {state.iterations} solves; passive cables {list(state.passive_ids)}")
        print(f"  max displacement {result.max_displacement:.3f} mm")
        uniplets = [(m.id, f) for m, f in zip(model.members, result.forces) if m.kind is MemberKind.UNIPLET]
        # reported with compression positive, as in the published figures
        print("  uniplet forces (N, compression +): "
              + ", ".join(f"{mid}:{round(-f) + 0}" for mid, f in uniplets))
        out = Path(args.out_dir) / name
        reporting.write_analysis(out, model, result)
        reporting.plot_structure(model, result, out / "structure.svg")


if __name__ == "__main__":
    main()
