import json
import re

import pytest
import yaml

from phonon_bem import cli

DISK = {
    "version": 1,
    "geometry": {"shape": "circle", "center": [0.5, 0.5], "radius": 0.3},
    "materials": {"inclusion": {"lam": 1.0, "mu": 1.0}, "matrix": {"lam": 1000.0, "mu": 1000.0}},
    "discretization": {"N": 32, "N_scan": 16},
    "window": {"lo": 10.8, "hi": 13.0, "step": 0.1},
}


def _write(tmp_path, cfg, name="run.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return p


def _with(**patch):
    cfg = json.loads(json.dumps(DISK))
    for dotted, value in patch.items():
        node = cfg
        keys = dotted.split("__")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return cfg


def test_radius_outside_cell_names_field(tmp_path, capsys):
    code = cli.main(["dirichlet", "--config", str(_write(tmp_path, _with(geometry__radius=0.6))),
                     "--out", str(tmp_path / "o")])
    assert code == cli.EXIT_CONFIG
    assert "geometry.radius" in capsys.readouterr().err


@pytest.mark.parametrize("patch, field", [
    ({"discretization__N": "many"}, "discretization.N"),
    ({"materials__inclusion__mu": -1.0}, "materials.inclusion.mu"),
    ({"discretization__N": 33}, "discretization.N"),
    ({"window__hi": 5.0}, "window.hi"),
])
def test_schema_errors_exit_2(tmp_path, capsys, patch, field):
    code = cli.main(["dirichlet", "--config", str(_write(tmp_path, _with(**patch)))])
    assert code == cli.EXIT_CONFIG
    assert field in capsys.readouterr().err


def test_unknown_key_and_missing_file(tmp_path):
    cfg = _with()
    cfg["extra"] = 1
    assert cli.main(["validate", "--config", str(_write(tmp_path, cfg))]) == cli.EXIT_CONFIG
    assert cli.main(["validate", "--config", str(tmp_path / "nope.yaml")]) == cli.EXIT_CONFIG


def test_lame_ellipticity_rejected(tmp_path, capsys):
    code = cli.main(["dirichlet", "--config", str(_write(tmp_path, _with(materials__inclusion__lam=-5.0)))])
    assert code == cli.EXIT_CONFIG
    assert "materials.inclusion" in capsys.readouterr().err


def test_threads_precedence(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli._threads(None) == 3
    assert cli._threads(1) == 1
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    with pytest.raises(cli.ConfigError):
        cli._threads(None)
    monkeypatch.delenv(cli.THREADS_ENV)
    assert cli._threads(None) is None


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 11.216131558712345, -6.4629964e-300):
        s = cli.fmt(x)
        assert float(s) == x
        assert len(re.sub(r"[-.]|e.*", "", s).lstrip("0")) <= 17
    assert cli.fmt(7) == "7"


@pytest.fixture(scope="module")
def dirichlet_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = _write(tmp, DISK, "run.json")
    cfg.write_text(json.dumps(DISK))
    code = cli.main(["dirichlet", "--config", str(cfg), "--out", str(tmp / "out"), "--threads", "1"])
    return code, tmp / "out"


def test_dirichlet_run_outputs(dirichlet_run):
    code, out = dirichlet_run
    assert code == cli.EXIT_OK
    raw = (out / "spectrum.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode("ascii").splitlines()
    assert lines[0] == ",".join(cli.SPECTRUM_HEADER)
    rows = [ln.split(",") for ln in lines[1:]]
    assert [int(r[0]) for r in rows] == list(range(1, len(rows) + 1))
    omegas = [float(r[1]) for r in rows]
    mult = [int(r[2]) for r in rows]
    assert mult[:2] == [2, 1]
    assert abs(omegas[0] - 11.2161315587) < 1e-3
    assert abs(omegas[1] - 12.7723532340) < 1e-3


def test_manifest_contents(dirichlet_run):
    _, out = dirichlet_run
    man = json.loads((out / "manifest.json").read_text())
    for key in ("schema_version", "task", "config", "versions", "files", "status", "timings", "threads"):
        assert key in man
    assert man["task"] == "dirichlet"
    assert man["status"] == {"dirichlet": "ok"}
    assert man["threads"] == 1
    assert man["files"] == ["spectrum.csv"]
    assert man["config"]["geometry"]["radius"] == 0.3
