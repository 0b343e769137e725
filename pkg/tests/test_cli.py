import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from manin_axb.cli import main, parse_config, UsageError
from manin_axb.surface_models import load_model, mutate, to_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_tables(text):
    """Split the sectioned CSV into {name: rows}; the first block is 'fields'."""
    blocks = text.strip("\n").split("\n\n")
    out = {"fields": list(csv.reader(io.StringIO(blocks[0])))}
    for b in blocks[1:]:
        rows = list(csv.reader(io.StringIO(b)))
        out[rows[0][0].removeprefix("table:")] = rows[1:]
    return out


def test_b_grid_parsing():
    cfg = parse_config(["count", "--model", "ex1", "--B", "1e4,1e5,1e6"])
    assert cfg.B == [10_000, 100_000, 1_000_000]


def test_b_grid_must_increase():
    with pytest.raises(UsageError):
        parse_config(["count", "--model", "ex1", "--B", "1e5,1e4,1e6"])


def test_peyre_rejects_model_without_heights(capsys):
    code, out, err = run(capsys, "peyre", "--model", "ex2")
    assert code == 1
    assert "no height model" in err


def test_negative_tolerance_in_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model=ex1\ntolerance=-1\n")
    code, _, err = run(capsys, "peyre", "--config", str(cfg))
    assert code == 1 and "tolerance" in err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nmodel=ex1\npmax=200\nformat=csv\n")
    args = parse_config(["peyre", "--config", str(cfg), "--pmax", "300"])
    assert args.pmax == 300 and args.format == "csv" and args.model == "ex1"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model=ex1\nbogus=1\n")
    code, _, err = run(capsys, "peyre", "--config", str(cfg))
    assert code == 1 and "bogus" in err


def test_unknown_flag_and_missing_model(capsys):
    assert run(capsys, "peyre", "--no-such-flag")[0] == 1
    assert run(capsys, "check")[0] == 1


def test_check_ex1_json(capsys):
    code, out, _ = run(capsys, "check", "--model", "ex1", "--no-timestamp")
    assert code == 0
    obj = json.loads(out)
    assert obj["schema_version"] == 1
    assert "generated_at" not in obj
    names = {c["name"] for c in obj["checks"]}
    for expected in ("rank_equals_J_minus_1", "critical_index_bound", "gcd_u_is_1", "d_le_1_minus_v[x1=0]",
                     "c_star_differences_units", "character_consistency"):
        assert expected in names
    assert all(c["passed"] for c in obj["checks"]) and obj["all_passed"]


def test_check_failure_exit_status(tmp_path, capsys):
    bad = mutate(load_model("ex1"), 0, d=1)
    path = tmp_path / "bad.txt"
    path.write_text(to_table(bad))
    code, out, _ = run(capsys, "check", "--model-file", str(path), "--no-timestamp")
    assert code == 2
    failed = [c["name"] for c in json.loads(out)["checks"] if not c["passed"]]
    assert "d_le_1_minus_v[x1=0]" in failed


def test_timestamp_present_by_default(capsys):
    _, out, _ = run(capsys, "check", "--model", "ex2")
    assert "generated_at" in json.loads(out)


def test_cone_ex1(capsys):
    code, out, _ = run(capsys, "cone", "--model", "ex1", "--points", "3", "--no-timestamp")
    assert code == 0
    t = csv_tables(out)
    fields = dict(r for r in t["fields"][1:])
    assert Fraction(fields["alpha_peyre"]) == Fraction(1, 4)
    assert t["rays"][0] == ["ray"] and {r[0] for r in t["rays"][1:]} == {"0 0 1", "1 1 0"}
    assert t["shifted_vs_x"][0][:3] == ["z", "shifted", "x_function"]
    assert len(t["shifted_vs_x"]) == 4


def test_count_columns(capsys):
    code, out, _ = run(capsys, "count", "--model", "ex1", "--B", "100,1000", "--no-timestamp")
    assert code == 0
    t = csv_tables(out)
    assert t["counts"][0] == ["B", "N", "N/(B log B)"]
    assert [r[0] for r in t["counts"][1:]] == ["100", "1000"]


def test_count_values_match_library(capsys):
    from manin_axb.point_count import count_sharp

    _, out, _ = run(capsys, "count", "--model", "ex1", "--B", "100,1000", "--no-timestamp")
    rows = csv_tables(out)["counts"][1:]
    assert [int(r[1]) for r in rows] == [count_sharp(100), count_sharp(1000)]


def test_csv_byte_identical_without_timestamp(capsys):
    argv = ["count", "--model", "ex1", "--B", "100,1000,10000", "--no-timestamp"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_threads_capped_by_environment(monkeypatch):
    monkeypatch.setenv("MANIN_THREADS", "2")
    assert parse_config(["count", "--model", "ex1", "--threads", "8"]).threads == 2
    assert parse_config(["count", "--model", "ex1"]).threads == 2
    monkeypatch.delenv("MANIN_THREADS")
    assert parse_config(["count", "--model", "ex1"]).threads == 1


def test_peyre_json_rationals_and_floats(capsys):
    code, out, _ = run(capsys, "peyre", "--model", "ex1", "--pmax", "1000", "--no-timestamp")
    assert code == 0
    obj = json.loads(out)
    assert obj["alpha_peyre"] == "1/4"
    assert abs(obj["peyre_constant"] - 0.9118906) < 3 * obj["peyre_tail_bound"] + 1e-6
    assert len(repr(obj["tau_inf"]).replace(".", "").lstrip("0")) <= 16


def test_local_json(capsys):
    code, out, _ = run(capsys, "local", "--model", "ex1", "--p", "5", "--alpha", "1/5", "--s", "auto", "--no-timestamp")
    assert code == 0
    obj = json.loads(out)
    for key in ("value", "main_term", "residual", "bound_ratio"):
        assert key in obj
    assert obj["regime"] == "denominator"
    assert obj["main_term"]["re"] == pytest.approx(0.008)


def test_local_rejects_ex2(capsys):
    assert run(capsys, "local", "--model", "ex2", "--p", "5", "--alpha", "1")[0] == 1


@pytest.mark.parametrize("argv", [
    ["expsum", "weyl", "--exponents", "2,1", "--M", "8,8", "--q", "97"],
    ["expsum", "gauss", "--u", "2", "--N", "13"],
    ["expsum", "poisson", "--M", "1000", "--qs", "1,7", "--Qs", "30"],
    ["expsum", "clausen", "--theta", "1/3", "--s1", "1.5", "--M", "100,1000"],
    ["expsum", "double", "--M", "200"],
])
def test_expsum_kinds(capsys, argv):
    code, out, _ = run(capsys, *argv, "--no-timestamp")
    assert code == 0
    assert out.startswith("key,value\nschema_version,1\n")


def test_expsum_weyl_table(capsys):
    code, out, _ = run(capsys, "expsum", "weyl", "--table", "5", "--no-timestamp")
    assert code == 0
    rows = csv_tables(out)["weyl_ratios"]
    assert rows[0][6] == "ratio" and len(rows) == 6


def test_expsum_gauss_bad_unit(capsys):
    assert run(capsys, "expsum", "gauss", "--u", "2", "--N", "9", "--C", "3")[0] == 1


def test_output_file_and_io_error(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["check", "--model", "ex1", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["command"] == "check"
    assert main(["check", "--model", "ex1", "--output", str(tmp_path / "missing" / "r.json")]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "manin_axb", "check", "--model", "ex3(3)", "--format", "csv",
                        "--no-timestamp"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "table:checks" in r.stdout
