import json
import shutil

import pytest

from boolplots.schema import (
    ENV_VAR,
    SchemaError,
    load_schemas,
    locate_schema_file,
    read_csv_rows,
)

from conftest import FIXTURES


def test_schema_file_found_above_package():
    path = locate_schema_file()
    assert path.name == "figure_schemas.json"
    schemas, _ = load_schemas()
    assert "kernel_scan" in schemas


def test_env_override_wins(tmp_path, monkeypatch):
    copy = tmp_path / "figure_schemas.json"
    shutil.copy(locate_schema_file(), copy)
    monkeypatch.setenv(ENV_VAR, str(copy))
    assert locate_schema_file() == copy


def test_env_override_missing_file_is_loud(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "/nonexistent/schemas.json")
    with pytest.raises(SchemaError, match="does not point at a file"):
        locate_schema_file()


def test_read_valid_fixture():
    rows = read_csv_rows(FIXTURES / "sign_map.csv", "kernel_scan")
    assert set(rows[0]) == {"q", "q_next"}
    assert len(rows) == 201


def test_renamed_column_diagnostic_names_contract(tmp_path):
    source = (FIXTURES / "sign_map.csv").read_text().splitlines()
    source[0] = source[0].replace("q_next", "qnext")
    bad = tmp_path / "renamed.csv"
    bad.write_text("\n".join(source) + "\n")
    with pytest.raises(SchemaError) as err:
        read_csv_rows(bad, "kernel_scan")
    message = str(err.value)
    assert "qnext" in message and "q,q_next" in message
    assert "figure_schemas.json" in message


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="does not match"):
        read_csv_rows(empty, "kernel_scan")
    header_only = tmp_path / "header_only.csv"
    header_only.write_text("q,q_next\n")
    with pytest.raises(SchemaError, match="no data rows"):
        read_csv_rows(header_only, "kernel_scan")


def test_x_column_variant_accepted():
    rows = read_csv_rows(FIXTURES / "entropy_vs_bias.csv", "entropy_curve")
    assert next(iter(rows[0])) == "sigma_b"


def test_json_keys_checked(tmp_path):
    from boolplots.schema import check_json_keys

    with pytest.raises(SchemaError, match="missing keys"):
        check_json_keys({"n": 2, "entries": []}, "function_distribution", "x.json")
    doc = json.loads('{"n": 2, "kind": "exact", "entries": []}')
    check_json_keys(doc, "function_distribution", "x.json")
