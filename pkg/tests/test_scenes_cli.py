import json
from pathlib import Path

import pytest

from lgtweezer.cli import main
from lgtweezer.scenes import (
    SceneConfig,
    SceneError,
    compare_against_reference,
    default_out_dir,
    list_presets,
    preset_config,
    run_scene,
)

# a cheap scene used throughout: reflection fringes run in well under a second
CHEAP = {"kind": "reflection-fringes", "params": {"nz": 4001}, "seed": 3}


def test_schema_unknown_kind():
    with pytest.raises(SceneError, match="kind"):
        SceneConfig.from_dict({"kind": "nope"})


def test_schema_unknown_param_named():
    with pytest.raises(SceneError, match=r"params\.zmax"):
        SceneConfig.from_dict(
            {"kind": "reflection-fringes", "params": {"zmax": "8 um"}}
        )


def test_schema_unit_error_carries_path():
    with pytest.raises(SceneError, match=r"params\.z_max"):
        SceneConfig.from_dict(
            {"kind": "reflection-fringes", "params": {"z_max": "8 ms"}}
        )
    with pytest.raises(SceneError, match=r"params\.z_max"):
        SceneConfig.from_dict(
            {"kind": "reflection-fringes", "params": {"z_max": 8e-6}}
        )


def test_schema_type_checks():
    with pytest.raises(SceneError, match=r"params\.nz"):
        SceneConfig.from_dict(
            {"kind": "reflection-fringes", "params": {"nz": 1.5}}
        )
    with pytest.raises(SceneError, match=r"params\.modes"):
        SceneConfig.from_dict(
            {"kind": "reflection-fringes", "params": {"modes": [[0.5, 1.0]]}}
        )
    with pytest.raises(SceneError, match="seed"):
        SceneConfig.from_dict({"kind": "reflection-fringes", "seed": "abc"})
    with pytest.raises(SceneError, match="top-level"):
        SceneConfig.from_dict({"kind": "reflection-fringes", "bogus": 1})


def test_default_out_dir_env(monkeypatch):
    monkeypatch.delenv("LGTWEEZER_OUT", raising=False)
    assert default_out_dir() == "lgtweezer-out"
    monkeypatch.setenv("LGTWEEZER_OUT", "/tmp/elsewhere")
    assert default_out_dir() == "/tmp/elsewhere"
    cfg = preset_config("fig9b")
    assert cfg.out_dir == str(Path("/tmp/elsewhere") / "fig9b")


def test_presets_catalog():
    presets = list_presets()
    assert len(presets) >= 11
    assert "fig11-r08-1d" in presets
    with pytest.raises(SceneError, match="unknown preset"):
        preset_config("fig0")


def test_run_scene_manifest(tmp_path):
    cfg = SceneConfig.from_dict(CHEAP, out_dir=str(tmp_path))
    manifest = run_scene(cfg)
    assert (tmp_path / "manifest.json").is_file()
    assert manifest["kind"] == "reflection-fringes"
    assert manifest["seed"] == 3
    assert manifest["backend"] in ("numba", "numpy")
    names = [o["name"] for o in manifest["outputs"]]
    assert "fringes.csv" in names and "plot.gp" in names
    for entry in manifest["outputs"]:
        assert (tmp_path / entry["name"]).is_file()
        assert len(entry["sha256"]) == 64
    # the resolved config re-runs the scene identically elsewhere
    cfg2 = SceneConfig.from_dict(manifest["config"], out_dir=str(tmp_path / "re"))
    manifest2 = run_scene(cfg2)
    assert manifest2["metrics"] == manifest["metrics"]
    assert [o["sha256"] for o in manifest2["outputs"]] == [
        o["sha256"] for o in manifest["outputs"]
    ]


def test_verify_pass_and_tamper(tmp_path):
    cfg = SceneConfig.from_dict(CHEAP, out_dir=str(tmp_path))
    run_scene(cfg)
    ref = tmp_path / "reference.json"
    ref.write_text(
        json.dumps(
            {
                "reflection-fringes": {
                    "spacing_over_half_lambda": {"expected": 1.0, "tol_rel": 0.02},
                    "visibility_ratio": {"max": 0.25},
                }
            }
        )
    )
    rows, passed = compare_against_reference(tmp_path / "manifest.json", ref)
    assert passed and all(r["pass"] for r in rows)
    # hash rows are included
    assert any(r["tolerance"] == "hash" for r in rows)

    # tampering with an output is caught by its digest
    (tmp_path / "fringes.csv").write_text("tampered\n")
    rows, passed = compare_against_reference(tmp_path / "manifest.json", ref)
    assert not passed

    # missing metric in the manifest is a config error, not a silent pass
    ref.write_text(json.dumps({"reflection-fringes": {"nope": {"max": 1.0}}}))
    with pytest.raises(SceneError, match="missing from manifest"):
        compare_against_reference(tmp_path / "manifest.json", ref)


def test_cli_run_and_verify_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "scene.json"
    cfg_path.write_text(json.dumps(CHEAP))
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "spacing_over_half_lambda" in text

    ref = tmp_path / "ref.json"
    ref.write_text(
        json.dumps(
            {
                "reflection-fringes": {
                    "spacing_over_half_lambda": {"expected": 1.0, "tol_rel": 0.02}
                }
            }
        )
    )
    assert main(["verify", str(out / "manifest.json"), str(ref)]) == 0
    assert "PASS" in capsys.readouterr().out

    # numerical-acceptance failure exits 2
    ref.write_text(
        json.dumps(
            {
                "reflection-fringes": {
                    "spacing_over_half_lambda": {"expected": 2.0, "tol_rel": 0.01}
                }
            }
        )
    )
    assert main(["verify", str(out / "manifest.json"), str(ref)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    assert main([]) == 1
    capsys.readouterr()
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 1
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"kind": "reflection-fringes", "params": {"z_max": "8 s"}}))
    assert main(["run", str(wrong)]) == 1
    err = capsys.readouterr().err
    assert "config error" in err and "z_max" in err
    assert main(["preset", "no-such-preset", "--out", str(tmp_path)]) == 1


def test_cli_preset_seed_override(tmp_path):
    out = tmp_path / "p"
    assert main(["preset", "fig9b", "--out", str(out), "--seed", "99"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 99
    assert manifest["scene_id"] == "fig9b"


def test_cli_list_presets(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out
    assert "fig11-r08-1d" in out and "fig1" in out
