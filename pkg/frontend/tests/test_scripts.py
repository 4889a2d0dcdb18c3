"""Script-level acceptance: each figure kind renders its reference fixture
to a non-empty image and fails loudly on a renamed column."""
import pytest

from boolplots import entropy_curves, function_grid, iteration_map

from conftest import FIXTURES

SCRIPTS = [
    (iteration_map, "sign_map.csv", "q_next", "qn"),
    (entropy_curves, "sign_entropy.csv", "entropy_normalized", "h_norm"),
    (function_grid, "maj3_traj.csv", "f_hex", "fhex"),
]


@pytest.mark.parametrize("module,fixture,_old,_new", SCRIPTS)
@pytest.mark.parametrize("suffix", [".png", ".svg"])
def test_renders_reference_fixture(module, fixture, _old, _new, suffix, tmp_path):
    out = tmp_path / f"figure{suffix}"
    code = module.main(["--in", str(FIXTURES / fixture), "--out", str(out)])
    assert code == 0
    assert out.stat().st_size > 0


@pytest.mark.parametrize("module,fixture,old,new", SCRIPTS)
def test_renamed_column_fails_with_diagnostic(
    module, fixture, old, new, tmp_path, capsys
):
    source = (FIXTURES / fixture).read_text().splitlines()
    source[0] = source[0].replace(old, new)
    bad = tmp_path / fixture
    bad.write_text("\n".join(source) + "\n")
    out = tmp_path / "figure.png"
    code = module.main(["--in", str(bad), "--out", str(out)])
    assert code == 2
    assert not out.exists()
    message = capsys.readouterr().err
    assert new in message and "figure_schemas.json" in message


@pytest.mark.parametrize("suffix", [".png", ".svg"])
def test_rerun_is_byte_identical(suffix, tmp_path):
    out = tmp_path / f"map{suffix}"
    argv = ["--in", str(FIXTURES / "relu_map.csv"), "--out", str(out)]
    assert iteration_map.main(argv) == 0
    first = out.read_bytes()
    assert iteration_map.main(argv) == 0
    assert out.read_bytes() == first


def test_entropy_overlay_and_single_point(tmp_path):
    out = tmp_path / "curves.png"
    code = entropy_curves.main([
        "--in",
        str(FIXTURES / "sign_entropy.csv"),
        str(FIXTURES / "relu_entropy.csv"),
        str(FIXTURES / "single_point.csv"),
        "--out",
        str(out),
    ])
    assert code == 0 and out.stat().st_size > 0


def test_entropy_bias_scan_variant(tmp_path):
    out = tmp_path / "bias.svg"
    code = entropy_curves.main(
        ["--in", str(FIXTURES / "entropy_vs_bias.csv"), "--out", str(out)]
    )
    assert code == 0 and out.stat().st_size > 0


def test_mixed_x_columns_rejected(tmp_path, capsys):
    code = entropy_curves.main([
        "--in",
        str(FIXTURES / "sign_entropy.csv"),
        str(FIXTURES / "entropy_vs_bias.csv"),
        "--out",
        str(tmp_path / "mix.png"),
    ])
    assert code == 2
    assert "cannot mix x columns" in capsys.readouterr().err


def test_json_trajectory_renders(tmp_path):
    out = tmp_path / "grid.png"
    code = function_grid.main(
        ["--in", str(FIXTURES / "maj3_traj.json"), "--out", str(out)]
    )
    assert code == 0 and out.stat().st_size > 0


def test_empty_csv_is_schema_error(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code = iteration_map.main(
        ["--in", str(empty), "--out", str(tmp_path / "x.png")]
    )
    assert code == 2
    assert "contract" in capsys.readouterr().err


def test_bad_output_extension_rejected(tmp_path, capsys):
    code = iteration_map.main(
        ["--in", str(FIXTURES / "sign_map.csv"), "--out", str(tmp_path / "x.pdf")]
    )
    assert code == 2
    assert ".png" in capsys.readouterr().err


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as err:
        iteration_map.main(["--out", "x.png"])
    assert err.value.code == 1


def test_and_collapse_renders(tmp_path):
    out = tmp_path / "and.png"
    code = function_grid.main(
        ["--in", str(FIXTURES / "and_traj.csv"), "--out", str(out)]
    )
    assert code == 0 and out.stat().st_size > 0
