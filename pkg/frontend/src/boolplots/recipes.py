"""Figure recipes and the shared rendering plumbing."""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .schema import SchemaError  # noqa: E402

# Same figures on every rerun: fixed SVG hash salt, no embedded dates.
plt.rcParams["svg.hashsalt"] = "boolplots"

FORMATS = (".png", ".svg")


@dataclass(frozen=True)
class FigureRecipe:
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("a recipe needs at least one input file")
        if self.output.suffix not in FORMATS:
            raise ValueError(
                f"output {self.output} must end in one of {', '.join(FORMATS)}"
            )


def save(fig, output: Path) -> None:
    output.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if output.suffix == ".svg" else None
    fig.savefig(output, metadata=metadata)
    plt.close(fig)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser(prog: str, description: str, many_inputs: bool = False) -> _Parser:
    parser = _Parser(prog=prog, description=description)
    if many_inputs:
        parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    else:
        parser.add_argument("--in", dest="inputs", nargs=1, required=True)
    parser.add_argument("--out", required=True)
    return parser


def run(render, argv, parser, **options) -> int:
    """Parse argv, render, convert contract failures to exit code 2."""
    args = parser.parse_args(argv)
    try:
        recipe = FigureRecipe(
            kind=parser.prog,
            inputs=tuple(Path(p) for p in args.inputs),
            output=Path(args.out),
            options={**options, **{
                k: v for k, v in vars(args).items() if k not in ("inputs", "out")
            }},
        )
        render(recipe)
    except (SchemaError, OSError, KeyError, ValueError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 2
    return 0
