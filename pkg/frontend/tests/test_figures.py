"""Figure-level behavior on the committed producer fixtures."""
import math

import pytest

from boolplots.function_grid import circle_radii, load_trajectory, pick_panels
from boolplots.iteration_map import diagonal_crossings, load_map
from boolplots.schema import SchemaError

from conftest import FIXTURES


class TestIterationMap:
    def test_sign_map_crosses_diagonal_at_zero(self):
        crossings = diagonal_crossings(load_map(FIXTURES / "sign_map.csv"))
        assert any(abs(q) < 1e-12 for q in crossings)

    def test_relu_map_tangent_at_one(self):
        crossings = diagonal_crossings(load_map(FIXTURES / "relu_map.csv"))
        assert crossings and abs(crossings[-1] - 1.0) < 1e-12

    def test_interpolated_crossing(self):
        # residual flips sign between the grid points, root at 0.25
        points = [(0.0, 0.1), (0.5, 0.4)]
        (q,) = diagonal_crossings(points)
        assert math.isclose(q, 0.25)


class TestFunctionGrid:
    def test_csv_and_json_trajectories_agree(self):
        by_csv = load_trajectory(FIXTURES / "maj3_traj.csv")
        by_json = load_trajectory(FIXTURES / "maj3_traj.json")
        assert list(by_csv) == list(by_json)
        for layer in by_csv:
            assert by_csv[layer] == pytest.approx(by_json[layer])

    def test_uniform_mass_gives_equal_circles(self):
        uniform = {f: 1 / 16 for f in range(16)}
        radii = circle_radii(uniform, 1 / 16)
        assert all(r == pytest.approx(0.45) for r in radii)

    def test_point_mass_gives_single_circle(self):
        radii = circle_radii({0x8: 1.0}, 1.0)
        assert radii[0x8] == pytest.approx(0.45)
        assert sum(1 for r in radii if r > 0) == 1

    def test_maj3_trajectory_spreads_toward_uniform(self):
        layers = load_trajectory(FIXTURES / "maj3_traj.csv")
        first, last = layers[0], layers[20]
        assert len(first) == 6 and len(last) == 16
        assert max(last.values()) / min(last.values()) < 1.05

    def test_no_mass_rejected(self):
        with pytest.raises(ValueError, match="no probability mass"):
            circle_radii({}, 0.0)

    def test_panel_capping_keeps_ends(self):
        ids = list(range(21))
        panels = pick_panels(ids)
        assert len(panels) == 12
        assert panels[0] == 0 and panels[-1] == 20
        assert panels == sorted(panels)

    def test_overwide_table_rejected(self, tmp_path):
        bad = tmp_path / "wide.csv"
        bad.write_text("layer,f_hex,p\n0,0x1ff,1.0\n")
        from boolplots.function_grid import render
        from boolplots.recipes import FigureRecipe

        recipe = FigureRecipe(
            kind="grid", inputs=(bad,), output=tmp_path / "wide.png"
        )
        with pytest.raises(SchemaError, match="beyond n=2"):
            render(recipe)
