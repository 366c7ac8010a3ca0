import json
import subprocess
import sys

import pytest

from liouville.cli import ConfigError, RunConfig, main


def _report(tmp_path, command):
    return json.loads((tmp_path / f"{command}.json").read_text())


def test_integrate_crossing_mass(tmp_path):
    assert main(["integrate", "--ell", "1", "--output", str(tmp_path)]) == 0
    rep = _report(tmp_path, "integrate")
    assert rep["status"] == "pass"
    assert rep["results"]["value"] == pytest.approx(4.0, abs=1e-4)


def test_verify_lemma_elemshear(tmp_path):
    assert main(["verify-lemma", "--lemma", "elemshear", "--output", str(tmp_path)]) == 0
    rep = _report(tmp_path, "verify-lemma")
    assert "agreement" in rep["results"]
    assert rep["checks"] and all(c["passed"] for c in rep["checks"])


def test_series_dirac_exit_codes(tmp_path, capsys):
    argv = ["series", "--cocycle", "dirac:0/1,1/1", "--n", "6", "--output", str(tmp_path)]
    # the telescoping gap at depth 6 is a few 1e-3: loose tolerance passes, default fails
    assert main(argv + ["--tolerance", "1e-2"]) == 0
    assert main(argv) == 2
    out = capsys.readouterr().out
    assert "FAIL telescoping" in out


def test_deterministic_reports(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["kernel", "--leaf", "0,inf", "--output", str(d)]) == 0
    ra, rb = _report(a, "kernel"), _report(b, "kernel")
    ra.pop("timestamp"), rb.pop("timestamp")
    ra["config"].pop("output_path", None), rb["config"].pop("output_path", None)
    assert ra == rb


@pytest.mark.parametrize("config, field", [
    ({"n": -3}, "n"),
    ({"radius": "far"}, "radius"),
    ({"fd_steps": [0.01, 0.02]}, "fd_steps"),
    ({"bogus": 1}, "bogus"),
    ({"quadrature": {"refinement_tol": -1}}, "quadrature"),
])
def test_malformed_config_names_field(tmp_path, capsys, config, field):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert main(["series", "--config", str(path), "--output", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith(f"liouville: error: {field}")


def test_bad_arguments_exit_1(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["series", "--n", "six"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 1


def test_config_hash_ignores_output():
    a = RunConfig(command="series", output_path="x")
    b = RunConfig(command="series", output_path="y")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != RunConfig(command="series", n=8).config_hash()


def test_validate_rejects_bad_cocycle(tmp_path):
    cfg = RunConfig(command="series", cocycle="wobbly:1", output_path=str(tmp_path))
    with pytest.raises(ConfigError, match="^cocycle"):
        cfg.validate()


def test_module_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "liouville", "kernel", "--leaf", "0,inf",
                        "--output", str(tmp_path)], capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert (tmp_path / "kernel.json").exists()
