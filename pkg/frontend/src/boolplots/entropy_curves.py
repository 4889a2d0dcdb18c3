"""Normalized function-space entropy against depth, one series per file."""
import sys

from .recipes import FigureRecipe, build_parser, run, save
from .schema import read_csv_rows


def load_series(path):
    rows = read_csv_rows(path, "entropy_curve")
    x_name = next(iter(rows[0]))
    xs = [float(r[x_name]) for r in rows]
    ys = [float(r["entropy_normalized"]) for r in rows]
    return x_name, xs, ys


def render(recipe: FigureRecipe) -> None:
    import matplotlib.pyplot as plt

    series = [(path, *load_series(path)) for path in recipe.inputs]
    x_names = {s[1] for s in series}
    if len(x_names) > 1:
        raise ValueError(
            f"cannot mix x columns {sorted(x_names)} in one figure"
        )

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for path, _, xs, ys in series:
        marker = "o" if len(xs) == 1 else None
        ax.plot(xs, ys, marker=marker, lw=1.6, label=path.stem)
    x_name = x_names.pop()
    ax.set_xlabel("depth L" if x_name == "L" else "sigma_b")
    ax.set_ylabel("normalized entropy")
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    save(fig, recipe.output)


def main(argv=None) -> int:
    parser = build_parser("plot-entropy-curves", __doc__, many_inputs=True)
    return run(render, argv, parser)


if __name__ == "__main__":
    sys.exit(main())
