import json
import subprocess
import sys

import numpy as np
import pytest

from chanpurify import cli
from chanpurify.optics import wrap_phase
from chanpurify.tomography import MLEInfo


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def specs(tmp_path):
    return {
        "bit": write(tmp_path / "bit.json", {"type": "bit_flip", "p0": 0.5}),
        "phase": write(tmp_path / "phase.json", {"type": "phase_flip", "p0": 0.5}),
        "dep": write(tmp_path / "dep.json", {"type": "depolarizing", "p": 0.5}),
        "ident": write(tmp_path / "id.json", {"type": "identity"}),
        "bad_sum": write(tmp_path / "bad.json", {"type": "pauli", "probs": {"I": 0.5, "X": 0.4}}),
        "broken": str(tmp_path / "broken.json"),
    }


@pytest.fixture(autouse=True)
def _broken_file(tmp_path):
    (tmp_path / "broken.json").write_text('{"type": "identity",')


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_channel_command(specs, capsys):
    code, out, err = run(["channel", specs["dep"]], capsys)
    assert code == 0
    doc = json.loads(out)
    diag = [doc["chi"]["entries"][k][0] for k in (0, 5, 10, 15)]
    np.testing.assert_allclose(diag, [0.625, 0.125, 0.125, 0.125])
    assert doc["cptp"]["ok"]
    code, out, _ = run(["channel", specs["ident"]], capsys)
    assert json.loads(out)["chi"]["entries"][0] == [1.0, 0.0]


def test_channel_rejects_unnormalized(specs, capsys):
    code, _, err = run(["channel", specs["bad_sum"]], capsys)
    assert code == cli.EXIT_VALIDATION
    assert "normalization" in err


def test_purify_command(specs, capsys):
    code, out, err = run(["purify", specs["bit"], specs["phase"]], capsys)
    assert code == 0
    doc = json.loads(out)
    entries = doc["circuit"]["plus_chi"]["entries"]
    assert entries[0][0] == pytest.approx(0.6, abs=1e-12)
    assert doc["circuit"]["virtual_chi"]["entries"][0][0] == pytest.approx(1.0, abs=1e-12)
    assert doc["experimental_reference"]["plus_chi_II"] == 0.594
    assert "0.925" in err and "experimental (reported)" in err


def test_purify_identity_and_depolarizing(specs, capsys):
    code, out, _ = run(["purify", specs["ident"], specs["ident"]], capsys)
    assert code == 0 and json.loads(out)["circuit"]["p_plus"] == pytest.approx(1.0)
    code, out, _ = run(["purify", specs["dep"], specs["dep"]], capsys)
    assert json.loads(out)["circuit"]["plus_chi"]["entries"][0][0] == pytest.approx(0.706522, abs=1e-6)


def test_sweep_rows(capsys):
    code, out, err = run(["sweep"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "p,F_unpurified,F_physical,F_virtual"
    assert len(lines) == 24
    row = next(list(map(float, l.split(","))) for l in lines[1:] if abs(float(l.split(",")[0]) - 0.5) < 1e-12)
    np.testing.assert_allclose(row[1:], [0.75, 0.804348, 0.928571], atol=1e-6)
    code, out, _ = run(["sweep", "--start", "1", "--stop", "1", "--steps", "1"], capsys)
    assert out.strip().splitlines()[1] == "1.0,1.0,1.0,1.0"


def test_sweep_json_format(capsys):
    code, out, _ = run(["sweep", "--format", "json", "--steps", "3"], capsys)
    rows = json.loads(out)
    assert len(rows) == 3 and set(rows[0]) == {"p", "F_unpurified", "F_physical", "F_virtual"}


def test_distribute_rows(capsys):
    code, out, err = run(["distribute"], capsys)
    assert code == 0
    rows = {round(float(l.split(",")[0]), 12): l.split(",") for l in out.strip().splitlines()[1:]}
    r = rows[0.33]
    assert float(r[1]) == pytest.approx(0.4975, abs=1e-9)
    assert float(r[2]) == pytest.approx(0.5594, abs=1e-4)
    assert r[3] == "false" and r[4] == "true"
    assert "0.528" in err and "(0.03, 0.28, 0.33, 0.36)" in err and "partial-transpose eigenvalues" in err
    code, out, _ = run(["distribute", "--start", str(1 / 3), "--stop", str(1 / 3), "--steps", "1"], capsys)
    assert float(out.strip().splitlines()[1].split(",")[1]) == pytest.approx(0.5, abs=1e-12)


def test_tomo_exact_and_shots(specs, capsys, tmp_path):
    code, out, _ = run(["tomo", specs["ident"], "--shots", "exact"], capsys)
    assert code == 0 and json.loads(out)["max_abs_error"] <= 1e-6
    rec = tmp_path / "records.jsonl"
    code, out, _ = run(["tomo", specs["dep"], "--shots", "100000", "--seed", "7", "--records", str(rec)], capsys)
    doc = json.loads(out)
    assert abs(doc["chi_II"] - 0.625) < 0.02
    assert len(rec.read_text().splitlines()) == 12
    code, again, _ = run(["tomo", specs["dep"], "--shots", "100000", "--from-records", str(rec)], capsys)
    assert json.loads(again)["chi"] == doc["chi"]


def test_optics_command(tmp_path, capsys):
    code, out, _ = run(["optics", "--seed", "3"], capsys)
    assert code == 0 and json.loads(out)["verified"]
    zero = write(tmp_path / "zero.json", {})
    code, out, _ = run(["optics", zero], capsys)
    doc = json.loads(out)
    assert doc["compensation"]["delta"] == 0.0
    assert wrap_phase(doc["compensation"]["theta1"] - doc["compensation"]["theta2"]) == pytest.approx(np.pi)
    unbalanced = write(tmp_path / "r06.json", {"R": 0.6, "T": 0.4})
    code, _, err = run(["optics", unbalanced], capsys)
    assert code == cli.EXIT_VALIDATION and "balanced" in err


def test_exit_codes(specs, tmp_path, capsys, monkeypatch):
    assert run(["channel", specs["broken"]], capsys)[0] == cli.EXIT_PARSE
    assert run(["tomo", specs["broken"]], capsys)[0] == cli.EXIT_PARSE
    assert run(["nonsense"], capsys)[0] == cli.EXIT_PARSE
    assert run(["sweep", "--shots", "zero"], capsys)[0] == cli.EXIT_PARSE
    assert run(["sweep", "--start", "0.9", "--stop", "0.1"], capsys)[0] == cli.EXIT_VALIDATION
    assert run(["channel", specs["dep"], "--format", "csv"], capsys)[0] == cli.EXIT_VALIDATION
    assert run(["channel", str(tmp_path / "missing.json")], capsys)[0] == cli.EXIT_IO
    assert run(["sweep", "--out", str(tmp_path / "no" / "dir.csv")], capsys)[0] == cli.EXIT_IO

    def stuck(records, full_output=False, **kw):
        return np.eye(4) / 4, MLEInfo(loglik=[0.0], iterations=10_000, converged=False)

    monkeypatch.setattr(cli, "mle_process", stuck)
    assert run(["tomo", specs["ident"]], capsys)[0] == cli.EXIT_CONVERGENCE


def test_manifest_written_next_to_output(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = run(["sweep", "--seed", "5", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert manifest["command"] == "sweep" and manifest["seed"] == 5
    assert manifest["artifacts"] == [str(out)]
    assert manifest["argv"] == ["sweep", "--seed", "5", "--out", str(out)]
    assert manifest["config"]["shots"] == "exact"


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--shots", "200", "--steps", "4", "--seed", "11"],
        ["distribute", "--shots", "300", "--steps", "5", "--seed", "2", "--format", "json"],
        ["optics", "--seed", "9"],
    ],
)
def test_manifest_argv_rerun_is_byte_identical(argv, tmp_path, capsys):
    first = tmp_path / "first.out"
    assert run(argv + ["--out", str(first)], capsys)[0] == 0
    manifest = json.loads((tmp_path / "first.out.manifest.json").read_text())
    replay = tmp_path / "replay.out"
    rerun = [a if a != str(first) else str(replay) for a in manifest["argv"]]
    assert run(rerun, capsys)[0] == 0
    assert first.read_bytes() == replay.read_bytes()


def test_workers_do_not_change_output(capsys):
    base = ["sweep", "--shots", "100", "--steps", "6", "--seed", "4"]
    _, one, _ = run(base, capsys)
    _, four, _ = run(base + ["--workers", "4"], capsys)
    assert one == four


def test_module_entry_point(specs):
    proc = subprocess.run([sys.executable, "-m", "chanpurify", "channel", specs["ident"]], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n_qubits"] == 1


def test_global_flags_before_subcommand(capsys):
    _, before, _ = run(["--seed", "6", "--format", "json", "sweep", "--steps", "3", "--shots", "80"], capsys)
    _, after, _ = run(["sweep", "--steps", "3", "--shots", "80", "--seed", "6", "--format", "json"], capsys)
    assert before == after
    _, other, _ = run(["sweep", "--steps", "3", "--shots", "80", "--seed", "7", "--format", "json"], capsys)
    assert other != after
