import json

import pytest

from modcyl.cli import ConfigError, load_config, main


def _write(p, text):
    p.write_text(text)
    return str(p)


def test_defaults():
    cfg = load_config({})
    assert cfg.geometry.L == 4.0 and cfg.state.is_ns and cfg.N == 256


@pytest.mark.parametrize("raw, field", [
    ({"geometry": {"L": 2.0, "ell": 1.0}}, "geometry.ell"),
    ({"geometry": {"L": -1.0}}, "geometry.L"),
    ({"geometry": {"size": 1}}, "geometry.size"),
    ({"colour": 1}, "colour"),
    ({"state": {"bc": "R", "h1": 0.0}}, "state.h2"),
    ({"state": {"bc": "R", "h1": 0.0, "h2": 0.5}}, "state.h2"),
    ({"state": {"bc": "R", "h1": 0.0, "h2": 0.0, "psi": 5.0}}, "state.psi"),
    ({"state": {"bc": "NS", "h1": 0.0}}, "state.h1"),
    ({"state": {"preset": "tip-plus", "h1": 0.0}}, "state.h1"),
    ({"state": {"preset": "warm"}}, "state.preset"),
    ({"grid": {"N": 33}}, "grid.N"),
    ({"grid": {"N": 64.0}}, "grid.N"),
    ({"grid": {"probe": "square"}}, "grid.probe"),
    ({"times": []}, "times"),
    ({"times": [0.1, "x"]}, "times[1]"),
    ({"output": {"formats": ["png"]}}, "output.formats[0]"),
])
def test_named_diagnostics(raw, field):
    with pytest.raises(ConfigError) as exc:
        load_config(raw)
    assert exc.value.field == field


def test_kernel_outputs_and_determinism(tmp_path):
    cfg = _write(tmp_path / "run.toml", 'times = [0.25]\n[state]\npreset = "rim(pi/2,pi/2)"\n[grid]\nN = 16\n')
    for d in ("a", "b"):
        assert main(["kernel", "--config", cfg, "--out", str(tmp_path / d), "--format", "csv,json,svg"]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(f"{n}.{e}" for n in ("two_point", "hamiltonian", "flow_t0.25") for e in ("csv", "json", "svg"))
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    assert ",mirror," in (tmp_path / "a" / "hamiltonian.csv").read_text()


def test_flags_override_config(tmp_path):
    cfg = _write(tmp_path / "run.toml", '[state]\npreset = "tip-plus"\n[grid]\nN = 64\n')
    out = tmp_path / "o"
    assert main(["kernel", "--config", cfg, "--preset", "ns-vacuum", "--N", "16", "--t", "0.5",
                 "--out", str(out), "--format", "json"]) == 0
    doc = json.loads((out / "hamiltonian.json").read_text())
    assert doc["config"]["state"] == {"bc": "NS"}
    assert doc["config"]["grid"]["N"] == 16
    assert {r["part"] for r in doc["rows"]} == {"delta_prime"}


def test_invalid_config_writes_nothing(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.toml", "[geometry]\nL = 2.0\nell = 1.0\n")
    out = tmp_path / "o"
    assert main(["kernel", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()
    assert "geometry.ell" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["kernel", "--N", "15"], ["kernel", "--t", "a,b"], ["kernel", "--preset", "hot"],
                                  ["kernel", "--format", "pdf"], ["verify", "--format", "csv"],
                                  ["verify", "--desk", "12"]])
def test_invalid_flags(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "o")]) == 2


def test_malformed_toml(tmp_path):
    cfg = _write(tmp_path / "x.toml", "[geometry\n")
    assert main(["kernel", "--config", cfg]) == 2


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["kernel", "--N", "16", "--out", str(blocker / "sub")]) == 3


def test_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MODCYL_THREADS", "0")
    assert main(["kernel", "--N", "16", "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("MODCYL_THREADS", "1")
    assert main(["kernel", "--N", "16", "--out", str(tmp_path), "--format", "csv"]) == 0


def test_plot(tmp_path):
    out = tmp_path / "k"
    assert main(["kernel", "--preset", "zero-temperature", "--N", "16", "--t", "0.1", "--out", str(out)]) == 0
    assert main(["plot", str(out / "hamiltonian.csv"), str(out / "two_point.json"), "--out", str(tmp_path / "p")]) == 0
    assert sorted(p.name for p in (tmp_path / "p").iterdir()) == ["hamiltonian.svg", "two_point.svg"]
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["plot", str(bad)]) == 2


def test_spectrum(tmp_path):
    out = tmp_path / "s"
    assert main(["spectrum", "--preset", "ns-vacuum", "--N", "64", "--bins", "8", "--out", str(out),
                 "--format", "csv,json,svg"]) == 0
    doc = json.loads((out / "spectrum.json").read_text())
    assert doc["kind"] == "spectrum" and len(doc["rows"]) == 2 * 4 * 8
    assert main(["plot", str(out / "spectrum.csv"), "--out", str(tmp_path / "p")]) == 0


@pytest.mark.slow
def test_verify_ns(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--preset", "ns-vacuum", "--N", "256", "--out", str(out), "--format", "json,svg"]) == 0
    doc = json.loads((out / "verify.json").read_text())
    assert doc["kind"] == "verify" and doc["passed"]
    assert {c["criterion"] for c in doc["criteria"]} == {1, 2, 3, 4, 5, 6, 9}
    assert main(["plot", str(out / "verify.json"), "--out", str(tmp_path / "p")]) == 0
