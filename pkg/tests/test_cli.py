import json

import numpy as np
import pytest
from click.testing import CliRunner

from depthrank.main import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def samples(write_csv, normal_pair):
    X, Y = normal_pair
    return write_csv("x.csv", X), write_csv("y.csv", Y + 0.2)


def run(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


class TestDepthCommand:
    def test_one_dimensional_center(self, runner, write_csv, five_points_1d):
        ref = write_csv("ref.csv", five_points_1d)
        query = write_csv("q.csv", [[3.0], [0.0]])
        result = run(runner, "depth", query, ref, "--method", "projection")
        assert result.exit_code == 0
        assert result.stdout == "row_index,depth\n0,1\n1,0.25\n"

    def test_halfspace_outside(self, runner, write_csv, five_points_1d):
        ref = write_csv("ref.csv", five_points_1d)
        query = write_csv("q.csv", [[0.0]])
        result = run(runner, "depth", query, ref)
        assert result.stdout.splitlines()[1] == "0,0"

    def test_threads_do_not_change_output(self, runner, samples):
        x, y = samples
        args = ("depth", y, x, "--method", "projection", "--mode", "approximate", "--directions", "100", "--seed", "4")
        single = run(runner, *args, "--threads", 1)
        double = run(runner, *args, "--threads", 2)
        assert single.exit_code == 0
        assert single.stdout == double.stdout

    def test_dimension_mismatch(self, runner, write_csv, five_points_1d):
        ref = write_csv("ref.csv", five_points_1d)
        query = write_csv("q.csv", [[0.0, 1.0]])
        result = run(runner, "depth", query, ref)
        assert result.exit_code == 3
        assert json.loads(result.stdout)["error"] == "DataFileError"


class TestQTestCommand:
    def test_same_sample(self, runner, samples):
        x, _ = samples
        result = run(runner, "qtest", x, x, "--method", "mahalanobis")
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["q"] == pytest.approx(31 / 60)
        assert payload["reject"] is False
        assert payload["method"] == "mahalanobis"
        assert "q0" not in payload

    def test_general_hypothesis(self, runner, samples):
        x, y = samples
        payload = json.loads(run(runner, "qtest", x, y, "--method", "mahalanobis", "--q0", "0.5").stdout)
        assert payload["q0"] == 0.5
        assert payload["ci_low"] <= payload["q"] <= payload["ci_high"]

    def test_seeded_output_is_reproducible(self, runner, samples):
        x, y = samples
        args = ("qtest", x, y, "--method", "projection", "--mode", "approximate", "--directions", "200", "--seed", "9")
        first = run(runner, *args)
        second = run(runner, *args)
        assert first.exit_code == 0
        assert first.stdout == second.stdout

    def test_threads_do_not_change_output(self, runner, samples):
        x, y = samples
        outputs = [run(runner, "qtest", x, y, "--q0", "0.5", "--threads", t).stdout for t in (1, 4)]
        assert json.loads(outputs[0])["method"] == "halfspace"
        assert outputs[0] == outputs[1]

    def test_unreadable_file(self, runner, samples, tmp_path):
        x, _ = samples
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n3,oops\n")
        result = run(runner, "qtest", x, bad)
        assert result.exit_code == 3
        payload = json.loads(result.stdout)
        assert payload["error"] == "DataFileError"
        assert payload["details"]["line"] == 3

    def test_missing_file(self, runner, samples, tmp_path):
        x, _ = samples
        result = run(runner, "qtest", x, tmp_path / "missing.csv")
        assert result.exit_code == 3

    def test_alpha_out_of_range(self, runner, samples):
        x, y = samples
        assert run(runner, "qtest", x, y, "--alpha", "1.5").exit_code == 2


class TestCompetitorCommand:
    def test_t2_mirrored(self, runner, write_csv, normal_pair):
        X, _ = normal_pair
        x = write_csv("x.csv", X)
        y = write_csv("y.csv", 2.0 * X.mean(axis=0) - X)
        payload = json.loads(run(runner, "competitor", x, y).stdout)
        assert payload["test"] == "t2"
        assert payload["statistic"] == pytest.approx(0.0, abs=1e-9)
        assert payload["reject"] is False

    def test_oja_sampled_with_all_subsets(self, runner, write_csv, gen):
        x = write_csv("x.csv", gen.standard_normal((4, 2)))
        y = write_csv("y.csv", gen.standard_normal((4, 2)))
        exact = json.loads(run(runner, "competitor", x, y, "--test", "oja").stdout)
        sampled = json.loads(
            run(runner, "competitor", x, y, "--test", "oja", "--oja-mode", "subset-sampled", "--subsets", "28").stdout
        )
        assert sampled["statistic"] == pytest.approx(exact["statistic"], rel=1e-12)
        assert "mc_se" not in sampled

    def test_singular_sample(self, runner, write_csv):
        t = np.arange(6.0)
        x = write_csv("x.csv", np.column_stack([t, 2 * t]))
        y = write_csv("y.csv", np.column_stack([t + 1, 2 * t + 2]))
        result = run(runner, "competitor", x, y)
        assert result.exit_code == 4
        payload = json.loads(result.stdout)
        assert payload["error"] == "DegenerateSampleError"
        assert payload["hint"] == "more data or lower d"


class TestPowerCommands:
    def test_power(self, runner, tmp_path):
        result = run(
            runner, "power", "--family", "pure-location", "--param-grid", "0:0.5:0.5", "--test", "t2",
            "--reps", 1, "--m", 10, "--n", 10, "--out", tmp_path, "--threads", 1,
        )
        assert result.exit_code == 0
        text = (tmp_path / "power-pure-location-t2.csv").read_text()
        assert len(text.splitlines()) == 3
        manifest = json.loads((tmp_path / "power-pure-location-t2.manifest.json").read_text())
        assert manifest["replications"] == 1
        assert manifest["plan"]["params"] == [0.0, 0.5]

    def test_bad_grid(self, runner, tmp_path):
        result = run(runner, "power", "--family", "pure-location", "--param-grid", "a,b", "--out", tmp_path)
        assert result.exit_code == 2

    def test_reproduce_fig1(self, runner, tmp_path):
        result = run(runner, "reproduce", "--target", "fig1", "--out", tmp_path, "--svg")
        assert result.exit_code == 0
        assert result.stdout.startswith("fig1:")
        lines = (tmp_path / "fig1.csv").read_text().splitlines()
        assert len(lines) == 1 + 13 * 21
        assert lines[1] == "0,Q,0.5,,analytic,sigma2=1"
        assert (tmp_path / "fig1.svg").exists()

    def test_reproduce_is_deterministic(self, runner, tmp_path):
        run(runner, "reproduce", "--target", "table1", "--analytic-only", "--out", tmp_path / "a")
        run(runner, "reproduce", "--target", "table1", "--analytic-only", "--out", tmp_path / "b")
        assert (tmp_path / "a" / "table1.csv").read_text() == (tmp_path / "b" / "table1.csv").read_text()

    def test_unknown_target(self, runner, tmp_path):
        assert run(runner, "reproduce", "--target", "table9", "--out", tmp_path).exit_code == 2


class TestSchemaAndRender:
    def test_schema_files(self, runner, tmp_path):
        result = run(runner, "schema", "--out", tmp_path)
        assert result.exit_code == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == [f"{k}.schema.json" for k in ("competitor", "error", "manifest", "mixture", "qtest")]
        schema = json.loads((tmp_path / "qtest.schema.json").read_text())
        assert "p_value" in schema["properties"]

    def test_schema_single(self, runner):
        schema = json.loads(run(runner, "schema", "--name", "error").stdout)
        assert schema["title"] == "ErrorResponse"

    def test_render(self, runner, tmp_path):
        run(runner, "reproduce", "--target", "fig1", "--out", tmp_path)
        result = run(runner, "render", tmp_path / "fig1.csv", "--out", tmp_path / "plot.svg")
        assert result.exit_code == 0
        assert (tmp_path / "plot.svg").read_text().lstrip().startswith("<?xml")

    def test_render_rejects_other_csv(self, runner, write_csv):
        result = run(runner, "render", write_csv("x.csv", [[1.0, 2.0]]))
        assert result.exit_code == 3

    def test_version(self, runner):
        assert "depthrank" in run(runner, "--version").stdout
