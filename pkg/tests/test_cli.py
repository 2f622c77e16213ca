"""End-to-end command line checks, each one in a fresh subprocess.

Cross-process runs are the point: every artifact the pipeline consumes is
re-read from disk by a different interpreter than the one that wrote it,
so nothing can lean on in-memory state.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from hhw_pir.serialization import load_matrix

TIGHT = '{"p": 2, "e": 1, "s": 2, "v": 1, "n": 4, "k": 2, "m": 6, "L": 3}'


def run_cli(*args, expect: int = 0):
    proc = subprocess.run(
        [sys.executable, "-m", "hhw_pir.cli", *args],
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert proc.returncode == expect, (proc.stdout, proc.stderr)
    return proc


def test_analyze_table_and_json():
    proc = run_cli("analyze")
    assert "delta=8" in proc.stdout
    assert "k0=24" in proc.stdout
    assert "m0=4" in proc.stdout
    doc = json.loads(run_cli("analyze", "--format", "json").stdout)
    assert doc["derived"]["k0"] == 24
    assert doc["failure_bound"]["simplified"] == f"1/{2**256}"
    assert doc["rates"]["r_pir_approx"] == "1/4"


def test_analyze_accepts_inline_params_and_overrides():
    doc = json.loads(
        run_cli("analyze", "--params", TIGHT, "--m", "8", "--format", "json").stdout
    )
    assert doc["params"]["m"] == 6  # the declared instance is echoed as is
    assert doc["failure_bound"]["m"] == 8  # the override lands in the bounds
    assert doc["rates"]["m"] == 8
    assert doc["derived"] == {"delta": 2, "k0": 6, "m0": 4}
    doc = json.loads(
        run_cli("analyze", "--params", TIGHT, "--file-rows", "16384", "--format", "json").stdout
    )
    assert doc["measured_rate"]["L"] == 16384


def test_analyze_params_from_file(tmp_path):
    path = tmp_path / "params.json"
    path.write_text(TIGHT)
    doc = json.loads(run_cli("analyze", "--params", str(path), "--format", "json").stdout)
    assert doc["params"]["n"] == 4


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gendb -> query -> respond executed once; several tests read the artifacts."""
    root = tmp_path_factory.mktemp("pipeline")
    db = str(root / "db.hhwm")
    query = str(root / "query.hhwm")
    secrets = str(root / "query.hhwm.secrets.json")
    response = str(root / "response.hhwm")
    run_cli("gendb", "--params", TIGHT, "--seed", "101", "--out", db)
    out = json.loads(
        run_cli("query", "--params", TIGHT, "--target", "4", "--seed", "202", "--out", query).stdout
    )
    assert out["secrets"] == secrets
    run_cli("respond", "--params", TIGHT, "--db", db, "--query", query, "--out", response)
    return {"root": root, "db": db, "query": query, "secrets": secrets, "response": response}


def test_decode_recovers_and_matches_database(pipeline):
    out = str(pipeline["root"] / "file.hhwm")
    doc = json.loads(
        run_cli(
            "decode", "--params", TIGHT,
            "--response", pipeline["response"], "--secrets", pipeline["secrets"],
            "--database", pipeline["db"], "--out", out,
        ).stdout
    )
    assert doc["target"] == 4
    assert doc["match"] is True
    assert doc["path"] == "direct"

    # byte-exactness against the database slice, independently of the CLI check
    recovered = load_matrix(out)
    db = load_matrix(pipeline["db"])
    assert np.array_equal(recovered.data[:, :, 0], db.data[:, 6:8, 0])


def test_decode_textbook_path_identical(pipeline):
    direct = str(pipeline["root"] / "direct.hhwm")
    textbook = str(pipeline["root"] / "textbook.hhwm")
    run_cli("decode", "--params", TIGHT, "--response", pipeline["response"],
            "--secrets", pipeline["secrets"], "--out", direct)
    doc = json.loads(
        run_cli("decode", "--params", TIGHT, "--response", pipeline["response"],
                "--secrets", pipeline["secrets"], "--out", textbook, "--textbook").stdout
    )
    assert doc["path"] == "textbook"
    assert open(direct, "rb").read() == open(textbook, "rb").read()


def test_decode_detects_database_mismatch(pipeline):
    other_db = str(pipeline["root"] / "other.hhwm")
    run_cli("gendb", "--params", TIGHT, "--seed", "999", "--out", other_db)
    out = str(pipeline["root"] / "junk.hhwm")
    proc = run_cli(
        "decode", "--params", TIGHT, "--response", pipeline["response"],
        "--secrets", pipeline["secrets"], "--database", other_db, "--out", out,
        expect=1,
    )
    err = json.loads(proc.stderr)
    assert err["error"]["type"] == "BadArguments"
    assert "does not match" in err["error"]["message"]


def test_attack_recovers_target_cross_process(pipeline):
    report_path = str(pipeline["root"] / "attack.json")
    proc = run_cli("attack", "--params", TIGHT, "--query", pipeline["query"],
                   "--out", report_path)
    doc = json.loads(proc.stdout)
    assert doc["recovered_index"] == 4
    assert doc["candidates"] == [4]
    assert doc["threshold"] == 6
    assert json.loads(open(report_path).read()) == doc


def test_attack_exit_code_on_ambiguity(tmp_path):
    # an all-zero query file: every deletion has rank 0, nothing distinguishes
    import struct

    path = tmp_path / "zero.hhwm"
    header = struct.pack("<4sBIIIII", b"HHWM", 1, 2, 1, 2, 12, 4)
    path.write_bytes(header + bytes(48))
    proc = run_cli("attack", "--params", TIGHT, "--query", str(path), expect=2)
    doc = json.loads(proc.stdout)
    assert doc["recovered_index"] is None
    assert doc["candidates"] == [1, 2, 3, 4, 5, 6]


def test_attack_fallback_argmin(tmp_path):
    import struct

    path = tmp_path / "zero.hhwm"
    header = struct.pack("<4sBIIIII", b"HHWM", 1, 2, 1, 2, 12, 4)
    path.write_bytes(header + bytes(48))
    proc = run_cli("attack", "--params", TIGHT, "--query", str(path), "--fallback-argmin")
    assert json.loads(proc.stdout)["recovered_index"] == 1


def test_malformed_query_file_is_reported(tmp_path):
    path = tmp_path / "broken.hhwm"
    path.write_bytes(b"HHWMgarbage")
    proc = run_cli("attack", "--params", TIGHT, "--query", str(path), expect=1)
    err = json.loads(proc.stderr)
    assert err["error"]["type"] == "MatrixFileError"


def test_bad_params_json_is_reported():
    proc = run_cli("analyze", "--params", '{"p": 4, "e": 1}', expect=1)
    err = json.loads(proc.stderr)
    assert err["error"]["type"] == "InvalidParams"


def test_query_rejects_out_of_range_target(tmp_path):
    out = str(tmp_path / "q.hhwm")
    proc = run_cli("query", "--params", TIGHT, "--target", "7", "--out", out, expect=1)
    err = json.loads(proc.stderr)
    assert err["error"]["type"] == "IndexOutOfRange"


def test_experiment_json_and_csv(tmp_path):
    json_out = tmp_path / "report.json"
    proc = run_cli(
        "experiment", "--params", TIGHT, "--trials", "6", "--seed", "31",
        "--out", str(json_out),
    )
    summary = json.loads(proc.stdout)
    assert summary["trials"] == 6
    full = json.loads(json_out.read_text())
    assert len(full["trials"]) == 6
    assert full["config"]["master_seed"] == 31

    csv_out = tmp_path / "report.csv"
    run_cli(
        "experiment", "--params", TIGHT, "--trials", "6", "--seed", "31",
        "--format", "csv", "--out", str(csv_out),
    )
    lines = csv_out.read_text().strip().splitlines()
    assert lines[0].startswith("trial,seed,target,recovered")
    assert len(lines) == 7


def test_experiment_deterministic_across_processes(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        run_cli("experiment", "--params", TIGHT, "--trials", "5", "--seed", "77",
                "--out", str(out))
        doc = json.loads(out.read_text())
        doc.pop("digest")
        doc["aggregate"].pop("elapsed_ms")
        for t in doc["trials"]:
            t.pop("elapsed_ms")
        outs.append(json.dumps(doc, sort_keys=True))
    assert outs[0] == outs[1]


def test_selftest_passes():
    proc = run_cli("selftest", "--seed", "1")
    assert "selftest passed" in proc.stdout


def test_unknown_subcommand_fails():
    proc = subprocess.run(
        [sys.executable, "-m", "hhw_pir.cli", "frobnicate"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode != 0
