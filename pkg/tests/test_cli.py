"""Tests for maxleak.cli -- argument parsing, exit codes and report output."""

import json

import pytest

from maxleak.cli import build_parser, config_from_args, main
from maxleak.config import BUDGET_ENV_VAR
from maxleak.suite import EXIT_BUDGET, EXIT_OK, EXIT_USAGE
from tests.conftest import WORKED_EXAMPLE, spec_path


def _run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


# --- Parsing ---


def test_config_from_nested_subcommand():
    args = build_parser().parse_args(["fse", "types", "--machine", "toggle", "--n", "4"])
    cfg = config_from_args(args)
    assert cfg.command == "fse types"
    assert cfg.machine == "toggle"
    assert cfg.n == 4


def test_config_options():
    args = build_parser().parse_args(
        ["encrypt", "--x", "abba", "--seed", "1", "--lambda", "1/3", "--padded", "--raw"]
    )
    cfg = config_from_args(args)
    assert str(cfg.lam) == "1/3"
    assert cfg.padded
    assert cfg.options == {"compressor": "raw"}


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv(BUDGET_ENV_VAR, "4096")
    cfg = config_from_args(build_parser().parse_args(["selftest", "--budget", "quick"]))
    assert cfg.budget.max_enumeration == 4096
    assert cfg.budget.name == "Quick"


# --- Exit codes ---


def test_compress_prints_report(capsys):
    code, out = _run(capsys, ["compress", "--x", WORKED_EXAMPLE])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["schema"] == "maxleak.report/1"
    assert data["command"] == "compress"
    assert data["passed"] is True


def test_missing_input_is_usage_error(capsys):
    assert main(["compress"]) == EXIT_USAGE


def test_argparse_errors_use_usage_code():
    with pytest.raises(SystemExit) as exc:
        main(["leakage", "--machine", "toggle"])
    assert exc.value.code == EXIT_USAGE


def test_bad_lambda_is_usage_error():
    assert main(["encrypt", "--x", "ab", "--seed", "1", "--lambda", "-1"]) == EXIT_USAGE


def test_unknown_budget_is_usage_error():
    assert main(["selftest", "--budget", "huge"]) == EXIT_USAGE


def test_alphabet_error_is_usage_error():
    assert main(["compress", "--x", "abc", "--alpha", "2"]) == EXIT_USAGE


def test_unwritable_alpha_is_usage_error(tmp_dir):
    src = f"{tmp_dir}/x.bin"
    with open(src, "wb") as fh:
        fh.write(b"\x01\x02")
    argv = ["compress", "--in", src, "--alpha", "70000", "--out", f"{tmp_dir}/x.lz"]
    assert main(argv) == EXIT_USAGE


def test_unwritable_lambda_is_usage_error(tmp_dir):
    argv = ["encrypt", "--x", "ab", "--seed", "1", "--lambda", "1/4294967296"]
    argv += ["--out", f"{tmp_dir}/x.ct"]
    assert main(argv) == EXIT_USAGE


def test_budget_exceeded_exit_code():
    argv = ["fse", "audit-il", "--machine", "xor", "--horizon", "20", "--budget", "quick"]
    assert main(argv) == EXIT_BUDGET


def test_malformed_spec_is_usage_error(tmp_dir):
    path = f"{tmp_dir}/bad.json"
    with open(path, "w") as fh:
        fh.write('{"alpha": 2}')
    assert main(["fse", "audit-il", "--spec", path]) == EXIT_USAGE


# --- End to end ---


def test_json_flag_writes_file(tmp_json_path, capsys):
    code, out = _run(capsys, ["fse", "types", "--spec", spec_path("toggle"), "--n", "4", "--json", tmp_json_path])
    assert code == EXIT_OK
    assert out == ""
    with open(tmp_json_path) as fh:
        data = json.load(fh)
    assert data["results"][0]["data"]["type_classes"] == 9


def test_encrypt_decrypt_round_trip(tmp_dir, capsys):
    ct = f"{tmp_dir}/x.ct"
    pt = f"{tmp_dir}/x.txt"
    common = ["--seed", "9", "--lambda", "1/2", "--padded"]
    assert main(["encrypt", "--x", WORKED_EXAMPLE, "--out", ct] + common) == EXIT_OK
    assert main(["decrypt", "--in", ct, "--out", pt] + common) == EXIT_OK
    with open(pt, "rb") as fh:
        assert fh.read() == WORKED_EXAMPLE.encode()


@pytest.mark.parametrize(
    "data, alpha", [(b"0110", "2"), (b"A1b\n", "255"), (b"\x00\xff\x10", "256")]
)
def test_compress_decompress_cli_keeps_bytes(tmp_dir, capsys, data, alpha):
    src = f"{tmp_dir}/x.in"
    cw = f"{tmp_dir}/x.lz"
    out = f"{tmp_dir}/x.out"
    with open(src, "wb") as fh:
        fh.write(data)
    code, report = _run(capsys, ["compress", "--in", src, "--alpha", alpha, "--out", cw])
    assert code == EXIT_OK
    assert json.loads(report)["passed"] is True
    assert main(["decompress", "--in", cw, "--out", out]) == EXIT_OK
    with open(out, "rb") as fh:
        assert fh.read() == data


def test_decrypt_with_wrong_lambda_fails(tmp_dir):
    ct = f"{tmp_dir}/x.ct"
    assert main(["encrypt", "--x", "abba", "--seed", "1", "--out", ct]) == EXIT_OK
    assert main(["decrypt", "--in", ct, "--seed", "1", "--lambda", "1"]) == EXIT_USAGE


def test_key_file(tmp_dir, capsys):
    key = f"{tmp_dir}/key.bin"
    with open(key, "wb") as fh:
        fh.write(b"\x00" * 4)
    code, out = _run(capsys, ["encrypt", "--x", "abba", "--key", key])
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["data"]["m"] > 0


def test_short_key_file_is_usage_error(tmp_dir):
    key = f"{tmp_dir}/key.bin"
    with open(key, "wb") as fh:
        fh.write(b"")
    assert main(["encrypt", "--x", "abba", "--key", key]) == EXIT_USAGE


def test_leakage_scheme_padded(capsys):
    code, out = _run(capsys, ["leakage", "--scheme", "lz-otp", "--n", "6", "--padded"])
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    leak = next(r for r in results if r["kind"] == "leakage")
    assert leak["data"]["leakage_bits"] == 0.0


def test_bounds_audit_cli(capsys):
    code, out = _run(capsys, ["bounds", "audit", "--machine", "xor", "--n", "4", "--all-x"])
    assert code == EXIT_OK
    kinds = {r["kind"] for r in json.loads(out)["results"]}
    assert kinds == {"lztype", "converse"}


def test_selftest_cli(capsys):
    code, out = _run(capsys, ["selftest"])
    assert code == EXIT_OK
    assert json.loads(out)["passed"] is True


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "maxleak" in capsys.readouterr().out
