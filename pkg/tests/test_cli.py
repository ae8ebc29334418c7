import csv
import json
import subprocess
import sys

import pytest

from staticlab import cli
from staticlab.cli import main, parse_range
from staticlab.errors import StepFailure


@pytest.fixture(autouse=True)
def _no_cache(monkeypatch):
    monkeypatch.delenv("STATICLAB_DATA_DIR", raising=False)


def run(*argv):
    return subprocess.run([sys.executable, "-m", "staticlab.cli", *argv],
                          capture_output=True, text=True, timeout=300)


def read_json(path):
    return json.loads(path.read_text())


def without_out(path):
    doc = read_json(path)
    doc["config"].pop("out")
    return doc


class TestRanges:
    @pytest.mark.parametrize("text,vals", [("2", [2.0]), ("0:1:0.5", [0.0, 0.5, 1.0]),
                                           ("1:-1:1", [1.0, 0.0, -1.0]),
                                           ("-1:1:-1", [-1.0, 0.0, 1.0]), ("3:3:1", [3.0])])
    def test_parse(self, text, vals):
        assert parse_range(text) == vals

    @pytest.mark.parametrize("text", ["a", "0:1", "0:1:0"])
    def test_bad(self, text):
        with pytest.raises(Exception):
            parse_range(text)


class TestSubprocess:
    def test_verify_golden(self, tmp_path):
        out = tmp_path / "r.json"
        res = run("verify", "--catalog", "type_i_x1", "--no-timestamp", "--oracle",
                  "--out", str(out))
        assert res.returncode == 0, res.stderr
        rep = read_json(out)
        assert rep["pass"] is True and rep["R"] == 6.0
        assert rep["master_max"] < 1e-10 and rep["oracle_master_max"] < 1e-4
        assert rep["config"]["catalog"] == "type_i_x1" and "timestamp" not in rep

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert run("classify", "--catalog", "type_iii_a1", "--no-timestamp",
                       "--out", str(p)).returncode == 0
        assert without_out(a) == without_out(b)

    def test_version_and_usage(self):
        assert run("--version").stdout.strip() == "0.1.0"
        assert run("verify", "--samples", "2").returncode == 2
        assert run().returncode == 2


class TestVerify:
    def test_stdout_and_timestamp(self, capsys):
        assert main(["verify", "--catalog", "type_v"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert "timestamp" in rep and rep["model_id"] == "type_v"

    def test_spec_failure_exit_1(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["verify", "--catalog", "type_i_R6", "--spec", "miao-tam",
                     "--out", str(out)]) == 1
        err = capsys.readouterr().err
        assert "xR3_plus_y_zero" in err and "constant_f" not in err
        assert read_json(out)["pass"] is False

    def test_threshold(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["verify", "--catalog", "type_iv_a03", "--threshold", "1e-30",
                     "--out", str(out)]) == 1

    def test_seeded_oracle_reproducible(self, tmp_path):
        outs = [tmp_path / f"{i}.json" for i in range(2)]
        for p in outs:
            assert main(["verify", "--catalog", "type_i_R6", "--oracle", "--seed", "7",
                         "--samples", "21", "--no-timestamp", "--out", str(p)]) == 0
        assert without_out(outs[0]) == without_out(outs[1])

    @pytest.mark.parametrize("argv", [["verify"], ["verify", "--catalog", "nope"],
                                      ["verify", "--model", "/nonexistent.json"],
                                      ["verify", "--catalog", "type_v", "--model", "x.json"]])
    def test_input_errors(self, argv):
        assert main(argv) == 2

    def test_bad_model_file(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text("{not json")
        assert main(["verify", "--model", str(bad)]) == 2

    def test_model_file_with_spec(self, tmp_path):
        assert main(["catalog", "build", "type_iii_a1", "--out", str(tmp_path)]) == 0
        path = tmp_path / "type_iii_a1.json"
        out = tmp_path / "r.json"
        assert main(["verify", "--model", str(path), "--out", str(out)]) == 0
        # the entry carries x = 1; a spec only overrides constants
        assert main(["verify", "--model", str(path), "--spec", "general:1,0",
                     "--out", str(out)]) == 0
        assert main(["verify", "--model", str(path), "--spec", "static",
                     "--out", str(out)]) == 1


class TestClassify:
    def test_expect(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["classify", "--catalog", "type_ii_Rm6", "--expect", "II",
                     "--out", str(out)]) == 0
        assert read_json(out)["theorem1_type"] == "II"
        assert main(["classify", "--catalog", "type_ii_Rm6", "--expect", "I",
                     "--out", str(out)]) == 1

    def test_oracle_source(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["classify", "--catalog", "type_iv_s4", "--source", "oracle",
                     "--samples", "21", "--cluster-tol", "1e-4", "--out", str(out)]) == 0
        assert read_json(out)["theorem1_type"] == "IV"

    def test_unclassified_exit_1(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["classify", "--catalog", "type_i_R6", "--spec", "miao-tam",
                     "--out", str(out)]) == 1
        assert read_json(out)["theorem1_type"] == "Unclassified"


class TestCatalogCommands:
    def test_list_csv(self, tmp_path):
        out = tmp_path / "l.csv"
        assert main(["catalog", "list", "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        byid = {r["id"]: r for r in rows}
        assert byid["type_i_R6"]["type"] == "I" and byid["type_iv_5_external"]["R"] == ""

    def test_list_json(self, capsys):
        assert main(["catalog", "list", "--format", "json"]) == 0
        assert len(json.loads(capsys.readouterr().out)) == 16

    def test_data_dir_cache(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STATICLAB_DATA_DIR", str(tmp_path / "cache"))
        outs = [tmp_path / f"{i}.json" for i in range(2)]
        for p in outs:
            assert main(["verify", "--catalog", "type_iv_a03", "--no-timestamp",
                         "--out", str(p)]) == 0
        assert without_out(outs[0]) == without_out(outs[1])
        assert (tmp_path / "cache" / "type_iv_a03" / "default" / "type_iv_a03_h.txt").exists()


class TestSweep:
    def test_csv(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--R", "12:-12:12", "--a", "0:0.3:0.3", "--span", "2",
                     "--samples", "21", "--jobs", "1", "--no-timestamp",
                     "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert [(float(r["R"]), float(r["a"])) for r in rows] == \
            [(12, 0), (12, 0.3), (0, 0), (0, 0.3), (-12, 0), (-12, 0.3)]
        assert all(float(r["max_drift"]) < 1e-8 for r in rows)

    def test_jobs_keep_order(self, tmp_path):
        out1, out2 = tmp_path / "1.json", tmp_path / "2.json"
        common = ["sweep", "--R", "12", "--a=-0.2:0.2:0.1", "--span", "1", "--samples", "11",
                  "--format", "json", "--no-timestamp"]
        assert main([*common, "--jobs", "1", "--out", str(out1)]) == 0
        assert main([*common, "--jobs", "3", "--out", str(out2)]) == 0
        assert read_json(out1)["rows"] == read_json(out2)["rows"]

    def test_h3(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--family", "h3", "--R", "0", "--a", "1", "--h0", "4",
                     "--h0p", "0.7", "--span", "2", "--samples", "21", "--jobs", "1",
                     "--out", str(out)]) == 0
        text = out.read_text()
        assert text.startswith("# ")
        row = list(csv.DictReader(text.splitlines()[1:]))[0]
        assert float(row["master_max"]) < 1e-8

    def test_error_row_exit_1(self, tmp_path, monkeypatch):
        def fail(*args, **kwargs):
            raise StepFailure("step size underflow")

        monkeypatch.setattr(cli, "integrate_h3", fail)
        out = tmp_path / "s.csv"
        assert main(["sweep", "--family", "h3", "--R", "0", "--a", "1", "--jobs", "1",
                     "--no-timestamp", "--out", str(out)]) == 1
        assert list(csv.DictReader(out.open()))[0]["termination"] == "error"
