"""Column contracts shared with the producing package.

The contract file `figure_schemas.json` lives at the repository root and is
the only coupling between the two packages: these scripts never import the
producer, they just hold it to its columns.
"""
import csv
import json
import os
from pathlib import Path

ENV_VAR = "BOOLSPACE_SCHEMAS"
FILENAME = "figure_schemas.json"


class SchemaError(ValueError):
    """Input file does not match the shared column contract."""


def locate_schema_file() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        path = Path(override)
        if not path.is_file():
            raise SchemaError(f"{ENV_VAR}={override} does not point at a file")
        return path
    for start in (Path(__file__).resolve(), Path.cwd().resolve()):
        for base in (start, *start.parents):
            candidate = base / FILENAME
            if candidate.is_file():
                return candidate
    raise SchemaError(
        f"cannot locate {FILENAME} above this package or the working "
        f"directory; set {ENV_VAR} to its path"
    )


def load_schemas() -> tuple[dict, Path]:
    path = locate_schema_file()
    with open(path) as fh:
        return json.load(fh), path


def read_csv_rows(path, kind: str) -> list[dict]:
    """Read a producer CSV, holding its header to the schema for ``kind``.

    A schema listing ``x_column_variants`` accepts the declared columns with
    the first column swapped for any variant.  The mismatch diagnostic names
    the offending file, the expected and found headers, and the contract
    file, so a renamed column fails loudly rather than plotting garbage.
    """
    schemas, schema_path = load_schemas()
    spec = schemas[kind]
    expected = list(spec["columns"])
    accepted = [expected]
    for variant in spec.get("x_column_variants", []):
        accepted.append([variant] + expected[1:])
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header not in accepted:
            want = " or ".join(",".join(h) for h in accepted)
            raise SchemaError(
                f"{path}: header {header} does not match the '{kind}' "
                f"contract ({want}) from {schema_path}"
            )
        rows = [dict(zip(header, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows under the '{kind}' header")
    return rows


def check_json_keys(document: dict, kind: str, path) -> None:
    schemas, schema_path = load_schemas()
    expected = set(schemas[kind]["keys"])
    found = set(document)
    if not expected <= found:
        raise SchemaError(
            f"{path}: missing keys {sorted(expected - found)} for the "
            f"'{kind}' contract from {schema_path}"
        )
