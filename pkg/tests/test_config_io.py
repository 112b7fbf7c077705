import json

import numpy as np
import pytest

from coolshape.config import DEFAULTS, ConfigError, RunConfig, apply_override, build_field, load_config
from coolshape.fem import Space, interpolate
from coolshape.io import (HISTORY_COLUMNS, read_history_csv, read_vtk_points, vertex_values, write_history_csv,
                          write_json, write_vtk)
from coolshape.mesh import unit_square


def test_defaults_validate():
    cfg = load_config()
    assert cfg.raw == DEFAULTS
    assert cfg.optimizer_config().max_iters == 10


@pytest.mark.parametrize("data", [{"bogus": 1}, {"physics": {"viscosity": 1.0}}, {"physics": {"mu": -1}},
                                  {"optimizer": {"c1": 1.5}}, {"objective": {"weights": [1, 2]}},
                                  {"geometry": {"type": "sphere"}}, {"output": {"formats": ["png"]}}])
def test_schema_rejects(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_non_object_rejected():
    with pytest.raises(ConfigError):
        RunConfig.from_dict([1, 2])


def test_override_parsing():
    raw = apply_override({}, "a.b=3")
    assert raw == {"a": {"b": 3}}
    assert apply_override(raw, "a.c=[1, 2]")["a"] == {"b": 3, "c": [1, 2]}
    assert apply_override(raw, "a.b=x*y")["a"]["b"] == "x*y"
    for bad in ("novalue", "=3"):
        with pytest.raises(ConfigError):
            apply_override(raw, bad)


def test_overrides_applied_after_defaults():
    cfg = load_config(None, ["geometry.h_target=0.125", "objective.weights=[1, 0, 0]"])
    assert cfg["geometry"]["h_target"] == 0.125
    assert cfg["geometry"]["n_fins"] == DEFAULTS["geometry"]["n_fins"]
    assert cfg["objective"]["weights"] == [1, 0, 0]


def test_partial_blocks_merge():
    cfg = RunConfig.from_dict({"physics": {"kappa": 0.5}})
    assert cfg["physics"]["kappa"] == 0.5 and cfg["physics"]["mu"] == 1.0


def test_geometry_of_other_type_replaces():
    cfg = RunConfig.from_dict({"geometry": {"type": "rectangle", "nx": 4, "ny": 2}})
    assert cfg["geometry"] == {"type": "rectangle", "nx": 4, "ny": 2}
    assert cfg.build().mesh.n_cells == 16


def test_load_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"optimizer": {"max_iters": 3}}))
    assert load_config(p)["optimizer"]["max_iters"] == 3
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_msh_path_relative_to_config(tmp_path):
    from coolshape.mesh import write_msh
    m = unit_square(2)
    write_msh(m, tmp_path / "m.msh")
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"geometry": {"type": "msh", "path": "m.msh"}}))
    built = load_config(p).build().mesh
    assert np.allclose(built.vertices, m.vertices)


def test_build_wraps_errors(tmp_path):
    cfg = RunConfig.from_dict({"geometry": {"type": "msh", "path": str(tmp_path / "nope.msh")}})
    with pytest.raises(ConfigError):
        cfg.build()


def test_fields():
    cfg = load_config()
    V = cfg.field("center_bump")
    assert V.name == "center_bump"
    with pytest.raises(ConfigError):
        cfg.field("missing")
    W = build_field({"type": "expression", "components": ["x", "0"]}, "lin")
    assert W.name == "lin"


def test_vtk_roundtrip(tmp_path):
    m = unit_square(3)
    T = interpolate("x + 2*y", Space(m, "P2"))
    u = interpolate(["x", "-y"], Space(m, "P2v"))
    path = write_vtk(tmp_path / "a.vtk", m, {"T": vertex_values(T), "u": vertex_values(u)})
    assert np.array_equal(read_vtk_points(path), m.vertices)
    text = path.read_text()
    assert "SCALARS T double 1" in text and "VECTORS u double" in text and "SCALARS subdomain" in text
    assert np.allclose(vertex_values(T), m.vertices[:, 0] + 2 * m.vertices[:, 1], atol=1e-14)


def test_vtk_size_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_vtk(tmp_path / "b.vtk", unit_square(2), {"bad": np.zeros(3)})


def test_history_csv_roundtrip(tmp_path):
    rows = [{k: (i if k == "iter" else 0.1 * i + 1 / 3) for k in HISTORY_COLUMNS} for i in range(3)]
    back = read_history_csv(write_history_csv(tmp_path / "h.csv", rows))
    assert back == rows


def test_json_deterministic(tmp_path):
    data = {"b": np.float64(1.5), "a": [np.int64(2), np.bool_(True)], "c": float("nan"), "d": np.arange(2)}
    p1 = write_json(tmp_path / "1.json", data).read_text()
    p2 = write_json(tmp_path / "2.json", dict(reversed(list(data.items())))).read_text()
    assert p1 == p2
    assert json.loads(p1) == {"a": [2, True], "b": 1.5, "c": "nan", "d": [0, 1]}
