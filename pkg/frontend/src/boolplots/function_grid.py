"""Circle-area grid of the function distribution across layers.

Each layer becomes a panel holding a 4 x 4 grid of circles, one per n=2
truth table, with circle area proportional to that table's probability.
Input is either the trajectory CSV the producer writes or a JSON list of
its per-layer distribution documents.
"""
import json
import math
import sys
from collections import OrderedDict

from .recipes import FigureRecipe, build_parser, run, save
from .schema import SchemaError, check_json_keys, read_csv_rows

GRID = 4  # n=2: 16 truth tables
MAX_PANELS = 12


def load_trajectory(path) -> "OrderedDict[int, dict[int, float]]":
    if str(path).endswith(".json"):
        with open(path) as fh:
            documents = json.load(fh)
        if not isinstance(documents, list) or not documents:
            raise SchemaError(f"{path}: expected a non-empty JSON list of layers")
        layers: "OrderedDict[int, dict[int, float]]" = OrderedDict()
        for i, doc in enumerate(documents):
            check_json_keys(doc, "function_distribution", path)
            layer = int(doc.get("layer", i))
            layers[layer] = {int(e["f"], 16): float(e["p"]) for e in doc["entries"]}
        return layers
    rows = read_csv_rows(path, "distribution_trajectory")
    layers: "OrderedDict[int, dict[int, float]]" = OrderedDict()
    for r in rows:
        layers.setdefault(int(r["layer"]), {})[int(r["f_hex"], 16)] = float(r["p"])
    return layers


def pick_panels(layer_ids) -> list:
    if len(layer_ids) <= MAX_PANELS:
        return list(layer_ids)
    step = (len(layer_ids) - 1) / (MAX_PANELS - 1)
    return [layer_ids[round(i * step)] for i in range(MAX_PANELS)]


def circle_radii(dist: dict[int, float], p_ref: float) -> list[float]:
    """Cell-unit radii for tables 0..15; area tracks probability."""
    if p_ref <= 0:
        raise ValueError("trajectory carries no probability mass")
    return [0.45 * math.sqrt(dist.get(f, 0.0) / p_ref) for f in range(GRID * GRID)]


def render(recipe: FigureRecipe) -> None:
    import matplotlib.pyplot as plt

    layers = load_trajectory(recipe.inputs[0])
    for layer, dist in layers.items():
        if any(f >= GRID * GRID for f in dist):
            raise SchemaError(
                f"{recipe.inputs[0]}: layer {layer} holds tables beyond n=2"
            )
    panels = pick_panels(list(layers))
    p_ref = max(max(d.values()) for d in layers.values())

    fig, axes = plt.subplots(
        1, len(panels), figsize=(1.7 * len(panels), 2.1), squeeze=False
    )
    for ax, layer in zip(axes[0], panels):
        radii = circle_radii(layers[layer], p_ref)
        for f, radius in enumerate(radii):
            if radius > 0:
                ax.add_patch(
                    plt.Circle(
                        (f % GRID + 0.5, GRID - 0.5 - f // GRID),
                        radius,
                        color="C0",
                    )
                )
        ax.set_xlim(0, GRID)
        ax.set_ylim(0, GRID)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_aspect("equal")
        ax.set_title(f"L = {layer}", fontsize=9)
    fig.tight_layout()
    save(fig, recipe.output)


def main(argv=None) -> int:
    parser = build_parser("plot-function-grid", __doc__)
    return run(render, argv, parser)


if __name__ == "__main__":
    sys.exit(main())
