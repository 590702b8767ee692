import json

import numpy as np
import pytest

from covsep import maximally_entangled, mix_with_white_noise, random_density_matrix
from covsep.cli import main, read_state_file, state_file_text, write_state_file
from covsep.errors import ValidationError

from conftest import max_mixed


def write_state(tmp_path, rho, name="state.json"):
    path = tmp_path / name
    write_state_file(rho, path)
    return str(path)


def strip_timing(text):
    data = json.loads(text)
    data.pop("timing", None)
    return json.dumps(data, sort_keys=True)


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_round_trip_bit_identical(tmp_path, rng):
    rho = random_density_matrix(2, 3, seed=rng)
    text = state_file_text(rho)
    path = tmp_path / "s.json"
    path.write_text(text)
    parsed = read_state_file(str(path))
    assert state_file_text(parsed) == text
    assert np.array_equal(parsed.matrix, rho.matrix)


def test_parse_errors_name_the_invariant(tmp_path):
    bad = {"dimA": 2, "dimB": 2, "matrix": [[1.0, 0.0]] * 15}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(ValidationError, match="16"):
        read_state_file(str(path))

    ident = np.eye(4) / 4
    entries = [[float(z.real), float(z.imag)] for z in ident.reshape(-1)]
    entries[1] = [0.5, 0.0]  # breaks hermiticity against entry (1,0)
    path.write_text(json.dumps({"dimA": 2, "dimB": 2, "matrix": entries}))
    with pytest.raises(ValidationError, match="Hermitian"):
        read_state_file(str(path))

    entries = [[float(z.real), float(z.imag)] for z in (np.eye(4) / 2).reshape(-1)]
    path.write_text(json.dumps({"dimA": 2, "dimB": 2, "matrix": entries}))
    with pytest.raises(ValidationError, match="trace"):
        read_state_file(str(path))


def test_analyze_bell_all_criteria(tmp_path, capsys, bell):
    path = write_state(tmp_path, bell)
    code, out, _ = run_cli(
        ["analyze", "--state", path, "--json",
         "--criteria", "ppt,ccnr,prop3,prop4,prop6,eq8,dv,cmc-sdp,lur-extract"],
        capsys,
    )
    assert code == 0
    report = json.loads(out)
    verdicts = {v["criterion"]: v for v in report["criteria"]}
    assert all(v["detected"] for v in verdicts.values())
    assert verdicts["ppt"]["left"] == pytest.approx(0.5, abs=1e-12)


def test_analyze_max_mixed_nothing_detected(tmp_path, capsys):
    path = write_state(tmp_path, max_mixed(2, 2))
    code, out, _ = run_cli(
        ["analyze", "--state", path, "--json",
         "--criteria", "ppt,ccnr,prop3,prop4,prop6,eq8,dv,cmc-sdp,lur-extract"],
        capsys,
    )
    assert code == 0
    report = json.loads(out)
    assert not any(v["detected"] for v in report["criteria"])


def test_analyze_cmc_needs_two_qubits(tmp_path, capsys):
    path = write_state(tmp_path, max_mixed(3, 3))
    code, _, err = run_cli(
        ["analyze", "--state", path, "--criteria", "cmc-sdp"], capsys
    )
    assert code == 1
    assert "cmc-sdp requires a 2x2 system" in err


def test_analyze_unknown_criterion(tmp_path, capsys, bell):
    path = write_state(tmp_path, bell)
    code, _, err = run_cli(
        ["analyze", "--state", path, "--criteria", "bogus"], capsys
    )
    assert code == 1
    assert "unknown criterion" in err


def test_unknown_flag_exits_one(capsys):
    code, _, err = run_cli(["analyze", "--nope"], capsys)
    assert code == 1
    assert "usage" in err.lower()


def test_unknown_family_exits_one(capsys):
    code, _, err = run_cli(
        ["scan", "--family", "nope", "--criterion", "ppt"], capsys
    )
    assert code == 1
    assert "unknown family" in err


def test_fnf_rank_deficient_exit_two(tmp_path, capsys, bell):
    path = write_state(tmp_path, bell)
    code, out, _ = run_cli(["fnf", "--state", path, "--json"], capsys)
    assert code == 2
    report = json.loads(out)
    assert report["error"]["type"] == "SingularReducedStateError"


def test_fnf_bell_with_regularization(tmp_path, capsys, bell):
    path = write_state(tmp_path, bell)
    code, out, _ = run_cli(
        ["fnf", "--state", path, "--json", "--regularize", "1e-9"], capsys
    )
    assert code == 0
    report = json.loads(out)
    assert np.allclose(report["fnf"]["xi"], [2, 2, 2], atol=1e-6)


def test_fnf_max_mixed(tmp_path, capsys):
    path = write_state(tmp_path, max_mixed(2, 2))
    code, out, _ = run_cli(["fnf", "--state", path, "--json"], capsys)
    assert code == 0
    report = json.loads(out)
    assert np.allclose(report["fnf"]["xi"], 0, atol=1e-10)


def test_scan_werner(tmp_path, capsys):
    code, out, _ = run_cli(
        ["scan", "--family", "werner", "--criterion", "prop6", "--json"],
        capsys,
    )
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "ok"
    assert abs(report["threshold"]["value"] - 1 / 3) <= 1e-4


def test_scan_no_threshold(capsys):
    code, out, _ = run_cli(
        ["scan", "--family", "upb-noise", "--criterion", "ppt", "--json"],
        capsys,
    )
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "no_threshold"
    assert report["threshold"] is None


def test_batch_deterministic_and_worker_independent(tmp_path, capsys):
    args = ["batch", "--family", "chessboard", "--n", "24", "--seed", "7",
            "--criteria", "ccnr,prop6", "--json", "--per-state"]
    code1, out1, _ = run_cli(args + ["--workers", "1"], capsys)
    code2, out2, _ = run_cli(args + ["--workers", "1"], capsys)
    code3, out3, _ = run_cli(args + ["--workers", "2"], capsys)
    assert code1 == code2 == code3 == 0
    assert strip_timing(out1) == strip_timing(out2)
    assert strip_timing(out1) == strip_timing(out3)


def test_batch_random_family(capsys):
    code, out, _ = run_cli(
        ["batch", "--family", "random-2x2", "--n", "30", "--seed", "3",
         "--criteria", "ppt,prop6", "--workers", "1", "--json", "--per-state"],
        capsys,
    )
    assert code == 0
    report = json.loads(out)
    stats = report["rates"]
    assert stats["ppt"]["evaluated"] == 30
    # two-qubit completeness on clearly decided states
    ppt_flags = stats["ppt"]["per_state_detected"]
    ppt_margins = stats["ppt"]["margins"]
    p6_flags = stats["prop6"]["per_state_detected"]
    for flag_ppt, margin, flag_p6 in zip(ppt_flags, ppt_margins, p6_flags):
        if abs(margin) > 1e-6:
            assert flag_ppt == flag_p6


def test_batch_rejects_parametric_family(capsys):
    code, _, err = run_cli(
        ["batch", "--family", "werner", "--n", "5"], capsys
    )
    assert code == 1
    assert "parametric" in err


def test_report_out_file(tmp_path, capsys, bell):
    path = write_state(tmp_path, bell)
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(
        ["analyze", "--state", path, "--criteria", "ppt", "--json",
         "--out", str(out_path)],
        capsys,
    )
    assert code == 0
    assert out == ""
    report = json.loads(out_path.read_text())
    assert report["criteria"][0]["criterion"] == "ppt"


def test_text_report_renders(tmp_path, capsys, bell):
    path = write_state(tmp_path, bell)
    code, out, _ = run_cli(["analyze", "--state", path, "--criteria", "ppt"], capsys)
    assert code == 0
    assert "criteria" in out and "detected" in out
