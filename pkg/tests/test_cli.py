import csv
import json
import math

import pytest

from clothoid_arm import __version__
from clothoid_arm.cli import main
from clothoid_arm.dataset import load
from clothoid_arm.learn.mlp import MlpModel

SMALL_GRID = {"grid": {"pressures": [20, 50, 80, 100], "payloads": [3.61, 10.0, 16.0, 22.0, 29.05]}}


def manifest(path):
    return json.loads(open(str(path) + ".manifest.json").read())


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "grid.json").write_text(json.dumps(SMALL_GRID))
    assert main(["generate", "--config", str(d / "grid.json"), "--out", str(d / "n2.jsonl")]) == 0
    assert main(["generate", "--config", str(d / "grid.json"), "--order", "1", "--out", str(d / "n1.jsonl")]) == 0
    for role in ("forward", "inverse"):
        for n in (1, 2):
            argv = ["train", "--data", str(d / f"n{n}.jsonl"), "--role", role, "--epochs", "5",
                    "--n-val", "4", "--out", str(d / f"{role}{n}.json")]
            assert main(argv) == 0
    return d


class TestSimulate:
    def test_outputs_and_manifest(self, tmp_path):
        out = tmp_path / "sim.csv"
        assert main(["simulate", "--P", "40", "--W", "23.7", "--out", str(out), "--svg", str(tmp_path / "s.svg")]) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["s", "x", "y", "theta"] and len(rows) == 242
        assert (tmp_path / "s.svg").read_text().startswith("<svg")
        m = manifest(out)
        assert m["command"] == "simulate" and m["seed"] == 42 and m["tool_version"] == __version__
        assert set(m) >= {"config", "inputs", "outputs", "duration_s"}
        assert m["config"]["load"]["W_g"] == 23.7

    def test_idempotent(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            assert main(["simulate", "--P", "70", "--W", "5", "--kind", "contact", "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_flags_override_config(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"beam": {"flexural_rigidity": 0.02}, "seed": 5}))
        out = tmp_path / "sim.csv"
        argv = ["simulate", "--config", str(tmp_path / "c.json"), "--EI", "0.03", "--P", "10", "--W", "0", "--out", str(out)]
        assert main(argv) == 0
        m = manifest(out)
        assert m["config"]["beam"]["flexural_rigidity"] == 0.03 and m["seed"] == 5

    def test_manifest_as_config(self, tmp_path):
        first = tmp_path / "a.csv"
        assert main(["simulate", "--EI", "0.02", "--P", "30", "--W", "1", "--out", str(first)]) == 0
        second = tmp_path / "b.csv"
        argv = ["simulate", "--config", str(first) + ".manifest.json", "--P", "30", "--W", "1", "--out", str(second)]
        assert main(argv) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_numeric_failure(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"beam": {"max_iter": 2}}))
        argv = ["simulate", "--config", str(tmp_path / "c.json"), "--P", "50", "--W", "20", "--out", str(tmp_path / "x.csv")]
        assert main(argv) == 3

    def test_config_errors(self, tmp_path):
        out = str(tmp_path / "x.csv")
        assert main(["simulate", "--P", "-5", "--W", "1", "--out", out]) == 2
        assert main(["simulate", "--nodes", "3", "--P", "5", "--W", "1", "--out", out]) == 2
        (tmp_path / "bad.json").write_text("{oops")
        assert main(["simulate", "--config", str(tmp_path / "bad.json"), "--P", "5", "--W", "1", "--out", out]) == 2

    def test_missing_config_file(self, tmp_path):
        argv = ["simulate", "--config", str(tmp_path / "none.json"), "--P", "5", "--W", "1", "--out", str(tmp_path / "x")]
        assert main(argv) == 4

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--P", "5"])
        assert exc.value.code == 2


class TestFit:
    def test_arc_to_stdout(self, tmp_path, capsys):
        L = 0.15
        r = 2 * L / math.pi
        (tmp_path / "b.json").write_text(
            json.dumps({"p0": [0, 0], "theta0": 0, "p1": [r, r], "theta1": math.pi / 2, "L": L})
        )
        assert main(["fit", "--boundary", str(tmp_path / "b.json"), "--order", "0"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["kappa"][0] == pytest.approx(math.pi / (2 * L), rel=1e-10)
        assert rep["converged"] is True

    def test_straight_to_file(self, tmp_path):
        (tmp_path / "b.json").write_text(json.dumps({"p0": [0, 0], "theta0": 0, "p1": [0.15, 0], "theta1": 0, "L": 0.15}))
        out = tmp_path / "fit.json"
        assert main(["fit", "--boundary", str(tmp_path / "b.json"), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["kappa"] == [0.0, 0.0, 0.0]
        assert manifest(out)["inputs"] == [str(tmp_path / "b.json")]

    def test_infeasible_and_bad_order(self, tmp_path):
        (tmp_path / "b.json").write_text(json.dumps({"p0": [0, 0], "theta0": 0, "p1": [0.3, 0], "theta1": 0, "L": 0.15}))
        assert main(["fit", "--boundary", str(tmp_path / "b.json")]) == 2
        (tmp_path / "ok.json").write_text(json.dumps({"p0": [0, 0], "theta0": 0, "p1": [0.1, 0], "theta1": 0, "L": 0.15}))
        assert main(["fit", "--boundary", str(tmp_path / "ok.json"), "--order", "7"]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["fit", "--boundary", str(tmp_path / "nope.json")]) == 4


class TestStudy:
    def test_tables(self, tmp_path):
        out = tmp_path / "study.csv"
        argv = ["study", "--p-step", "50", "--w-min", "0.1", "--w-max", "0.5", "--w-step", "0.2", "--out", str(out)]
        assert main(argv) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 2 * 3 * 3 * 2
        summary = list(csv.DictReader((tmp_path / "study_summary.csv").open()))
        assert [(r["kind"], r["degree"]) for r in summary] == [("contact", "1"), ("contact", "2"), ("payload", "1"), ("payload", "2")]
        assert len(manifest(out)["outputs"]) == 2


class TestPipeline:
    def test_generate(self, workdir):
        ds = load(workdir / "n2.jsonl")
        assert len(ds.records) == 20 and ds.order == 2
        assert (workdir / "n2.jsonl.quarantine.jsonl").read_text() == ""
        m = manifest(workdir / "n2.jsonl")
        assert m["config"]["grid"]["pressures"] == [20.0, 50.0, 80.0, 100.0]
        assert m["inputs"] == [] and len(m["outputs"]) == 2

    def test_generate_idempotent(self, workdir, tmp_path):
        out = tmp_path / "again.jsonl"
        assert main(["generate", "--config", str(workdir / "grid.json"), "--out", str(out)]) == 0
        assert out.read_bytes() == (workdir / "n2.jsonl").read_bytes()

    def test_train_idempotent(self, workdir, tmp_path):
        out = tmp_path / "f.json"
        argv = ["train", "--data", str(workdir / "n2.jsonl"), "--role", "forward", "--epochs", "5",
                "--n-val", "4", "--out", str(out), "--history", str(tmp_path / "h.csv")]
        assert main(argv) == 0
        assert out.read_bytes() == (workdir / "forward2.json").read_bytes()
        assert len((tmp_path / "h.csv").read_text().splitlines()) == 5
        model = MlpModel.load(out)
        assert model.meta["n_val"] == 4 and model.layer_sizes == [2, 64, 32, 16, 4]

    def test_eval(self, workdir):
        out = workdir / "eval.csv"
        argv = ["eval", "--data", str(workdir / "n1.jsonl"), str(workdir / "n2.jsonl"),
                "--forward", str(workdir / "forward1.json"), str(workdir / "forward2.json"),
                "--inverse", str(workdir / "inverse1.json"), str(workdir / "inverse2.json"), "--out", str(out)]
        assert main(argv) == 0
        rows = list(csv.DictReader(out.open()))
        assert [r["order"] for r in rows] == ["2", "1"]
        assert all(float(r["err_tip_mean"]) >= 0 for r in rows)
        assert len(manifest(out)["inputs"]) == 6

    def test_eval_role_mismatch(self, workdir, tmp_path):
        argv = ["eval", "--data", str(workdir / "n1.jsonl"), "--forward", str(workdir / "forward2.json"),
                "--out", str(tmp_path / "e.csv")]
        assert main(argv) == 2

    def test_plot(self, workdir, tmp_path):
        sim = tmp_path / "sim.csv"
        assert main(["simulate", "--P", "40", "--W", "23.7", "--out", str(sim)]) == 0
        out = tmp_path / "p.svg"
        assert main(["plot", "--csv", str(sim), "--forward", str(workdir / "forward2.json"), "--out", str(out)]) == 0
        assert out.read_text().count("<polyline") == 2
        assert main(["plot", "--out", str(tmp_path / "empty.svg")]) == 2

    def test_io_errors(self, workdir, tmp_path):
        base = ["train", "--role", "forward", "--out", str(tmp_path / "m.json")]
        assert main(base + ["--data", str(tmp_path / "missing.jsonl")]) == 4
        bad = tmp_path / "bad.jsonl"
        lines = (workdir / "n2.jsonl").read_text().splitlines()
        bad.write_text("\n".join([lines[0], "{broken"]) + "\n")
        assert main(base + ["--data", str(bad)]) == 4
        other = tmp_path / "other.jsonl"
        other.write_text(json.dumps({"schema": "clothoid-arm/0"}) + "\n")
        assert main(base + ["--data", str(other)]) == 4

    def test_bad_split(self, workdir, tmp_path):
        argv = ["train", "--data", str(workdir / "n2.jsonl"), "--role", "forward", "--n-val", "50",
                "--out", str(tmp_path / "m.json")]
        assert main(argv) == 2
