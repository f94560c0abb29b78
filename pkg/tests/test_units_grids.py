import numpy as np
import pytest

from lgtweezer.grids import ComplexVectorGrid, ScalarGrid, write_line_csv
from lgtweezer.units import UnitError, parse_quantity


@pytest.mark.parametrize(
    "text,dim,expect",
    [
        ("600 um", "length", 600e-6),
        ("1.5mm", "length", 1.5e-3),
        ("20 ms", "time", 20e-3),
        ("100 uK", "temperature", 100e-6),
        ("1 mK", "temperature", 1e-3),
        ("-1 m/s^2", "acceleration", -1.0),
        ("2.20694650e-25 kg", "mass", 2.20694650e-25),
        ("0 m/s^2", "acceleration", 0.0),
    ],
)
def test_parse_quantity_valid(text, dim, expect):
    assert parse_quantity(text, dim) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize(
    "text,dim",
    [
        ("600", "length"),  # missing suffix
        ("600 parsec", "length"),  # unknown suffix
        ("600 um", "time"),  # dimension mismatch
        ("abc um", "length"),  # malformed number
        (600e-6, "length"),  # bare number needs units
        (None, "length"),
    ],
)
def test_parse_quantity_invalid(text, dim):
    with pytest.raises(UnitError):
        parse_quantity(text, dim)


def test_parse_dimensionless():
    assert parse_quantity(0.36, "dimensionless") == 0.36
    assert parse_quantity("0.36", "dimensionless") == 0.36
    with pytest.raises(UnitError):
        parse_quantity("0.36 um", "dimensionless")


def test_scalar_grid_roundtrip(tmp_path):
    vals = np.arange(24.0).reshape(2, 3, 4)
    grid = ScalarGrid(vals, (0.0, 1.0, 2.0), (0.5, 0.5, 0.5))
    path = tmp_path / "grid.json"
    grid.save(path)
    back = ScalarGrid.load(path)
    np.testing.assert_array_equal(back.values, vals)
    np.testing.assert_array_equal(back.origin, grid.origin)
    xs, ys, zs = back.axes()
    assert xs[1] - xs[0] == 0.5 and ys[0] == 1.0 and zs[-1] == 3.5


def test_scalar_grid_validation():
    with pytest.raises(ValueError):
        ScalarGrid(np.zeros((2, 2)), (0, 0, 0), (1, 1, 1))
    with pytest.raises(ValueError):
        ScalarGrid(np.zeros((2, 2, 2)), (0, 0, 0), (1, 0.0, 1))


def test_complex_vector_grid_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    e = [rng.normal(size=(2, 2, 3)) + 1j * rng.normal(size=(2, 2, 3)) for _ in range(3)]
    grid = ComplexVectorGrid(e[0], e[1], e[2], (0, 0, 0), (1, 1, 1))
    path = tmp_path / "vec.json"
    grid.save(path)
    back = ComplexVectorGrid.load(path)
    np.testing.assert_array_equal(back.ex, e[0])
    np.testing.assert_array_equal(back.ez, e[2])
    np.testing.assert_allclose(
        grid.intensity(), sum(np.abs(c) ** 2 for c in e), rtol=1e-15
    )
    with pytest.raises(ValueError):
        ComplexVectorGrid(e[0], e[1], np.zeros((1, 1, 1)), (0, 0, 0), (1, 1, 1))


def test_write_line_csv_format(tmp_path):
    path = tmp_path / "line.csv"
    write_line_csv(path, {"x_m": [1.0, 2.0], "value": [0.125, 1.0 / 3.0]})
    lines = path.read_text().splitlines()
    assert lines[0] == "x_m,value"
    assert lines[1].split(",")[0] == "1"
    # full-precision round trip
    assert float(lines[2].split(",")[1]) == 1.0 / 3.0
