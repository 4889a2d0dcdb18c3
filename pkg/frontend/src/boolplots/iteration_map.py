"""Iteration map of the overlap: q against q', with its fixed points."""
import sys

from .recipes import FigureRecipe, build_parser, run, save
from .schema import read_csv_rows


def load_map(path) -> list[tuple[float, float]]:
    rows = read_csv_rows(path, "kernel_scan")
    return [(float(r["q"]), float(r["q_next"])) for r in rows]


def diagonal_crossings(points) -> list[float]:
    """Fixed points of the plotted map: zeros of q' - q along the grid.

    Exact zeros are taken as they stand; sign changes between neighbours are
    resolved by linear interpolation.  Purely geometric, on data the figure
    already shows.
    """
    residuals = [(q, qn - q) for q, qn in points]
    out = []
    for (q0, r0), (q1, r1) in zip(residuals, residuals[1:]):
        if r0 == 0.0:
            out.append(q0)
        elif r0 * r1 < 0:
            out.append(q0 + r0 * (q1 - q0) / (r0 - r1))
    if residuals and residuals[-1][1] == 0.0:
        out.append(residuals[-1][0])
    deduped = []
    for q in out:
        if not deduped or abs(q - deduped[-1]) > 1e-9:
            deduped.append(q)
    return deduped


def render(recipe: FigureRecipe) -> None:
    import matplotlib.pyplot as plt

    points = load_map(recipe.inputs[0])
    crossings = diagonal_crossings(points)
    qs = [p[0] for p in points]
    qns = [p[1] for p in points]

    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    ax.plot([-1, 1], [-1, 1], color="0.7", lw=0.8)
    ax.plot(qs, qns, color="C0", lw=1.6, label="overlap map")
    for q in crossings:
        ax.plot([q], [q], "o", color="C3", ms=6, zorder=5)
    ax.set_xlabel("q")
    ax.set_ylabel("q'")
    ax.set_xlim(-1.02, 1.02)
    ax.set_ylim(-1.02, 1.02)
    ax.set_aspect("equal")
    label = ", ".join(f"{q:.3f}" for q in crossings) or "none on grid"
    ax.set_title(f"fixed points: {label}", fontsize=10)
    fig.tight_layout()
    save(fig, recipe.output)


def main(argv=None) -> int:
    parser = build_parser("plot-iteration-map", __doc__)
    return run(render, argv, parser)


if __name__ == "__main__":
    sys.exit(main())
