"""Command-line interface: exit codes, output, overrides, server delegation."""

import httpx
import pytest
from fastapi.testclient import TestClient

from froglab.cli import main
from froglab.service import create_app

GOOD = """\
kind = symmetry
rank = 2
generators = [(1, 0), (-1, 0), (0, 1), (0, -1)]
master_seed = 31
param.horizon = 6
param.replicas = 2
tol.ratio_max = 2.0
"""


@pytest.fixture()
def cfg_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(GOOD)
    return path


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("froglab ")


def test_subcommand_required():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_validate_ok(cfg_file, capsys):
    assert main(["validate", str(cfg_file)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("OK symmetry ")
    assert len(out.split()[-1]) == 12


def test_validate_reports_problems(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("kind = mystery\nrank = 2\n")
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "unknown kind" in err and "line 1" in err


def test_run_local_and_report(cfg_file, tmp_path, capsys):
    out_root = tmp_path / "results"
    assert main(["run", str(cfg_file), "--output-dir", str(out_root)]) == 0
    out = capsys.readouterr().out
    assert "PASS symmetry_ratio" in out
    assert "result: PASS (1/1 checks)" in out
    run_dir = out.rsplit("run directory: ", 1)[1].strip()
    assert run_dir.startswith(str(out_root))

    assert main(["report", run_dir]) == 0
    assert "result: PASS" in capsys.readouterr().out


def test_run_failing_tolerance_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "strict.cfg"
    path.write_text(GOOD.replace("tol.ratio_max = 2.0", "tol.ratio_max = 0.0"))
    rc = main(["run", str(path), "--output-dir", str(tmp_path / "r")])
    assert rc == 1
    assert "result: FAIL" in capsys.readouterr().out


def test_run_surfaces_runner_errors(tmp_path, capsys):
    path = tmp_path / "broken.cfg"
    path.write_text("kind = torsion_compare\nrank = 2\n"
                    "generators = [(1, 0), (-1, 0), (0, 1), (0, -1)]\n"
                    "master_seed = 9\nparam.horizon = 5\nparam.replicas = 1\n")
    rc = main(["run", str(path), "--output-dir", str(tmp_path / "r")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_report_missing_directory(tmp_path, capsys):
    assert main(["report", str(tmp_path / "nothing")]) == 1
    assert "error:" in capsys.readouterr().err


def test_parallelism_override_accepted(cfg_file, tmp_path, capsys):
    rc = main(["run", str(cfg_file), "--output-dir", str(tmp_path / "r"),
               "--parallelism", "2"])
    assert rc == 0
    capsys.readouterr()


@pytest.fixture()
def fake_server(tmp_path, monkeypatch):
    client = TestClient(create_app(default_output_dir=str(tmp_path / "srv")))
    base = "http://testserver"

    def fake_post(url, json=None, timeout=None):
        assert url.startswith(base)
        return client.post(url[len(base):], json=json)

    def fake_get(url, timeout=None):
        assert url.startswith(base)
        return client.get(url[len(base):])

    monkeypatch.setattr(httpx, "post", fake_post)
    monkeypatch.setattr(httpx, "get", fake_get)
    return base


def test_validate_against_server(cfg_file, fake_server, capsys):
    assert main(["validate", str(cfg_file), "--server", fake_server]) == 0
    assert capsys.readouterr().out.startswith("OK symmetry ")


def test_run_against_server(cfg_file, fake_server, tmp_path, capsys):
    rc = main(["run", str(cfg_file), "--server", fake_server,
               "--output-dir", str(tmp_path / "via-server")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "result: PASS (1/1 checks)" in out
    assert "run directory:" in out
