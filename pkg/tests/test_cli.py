import io
import json

import numpy as np
import pytest

from ddcor.cli import DatasetFile, Experiment, RunConfig, main, parse_overrides, resolve_parameters
from ddcor.errors import ConfigurationError, DataParseError
from ddcor.output import read_table

from tests.config import SEED


def _csv(columns, rows):
    lines = [",".join(columns)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def monotone_csv(write_csv):
    return write_csv("monotone.csv", "x,y\n1,1\n2,2\n3,3\n4,4\n5,5\n")


@pytest.fixture
def linear_csv(write_csv):
    x = np.random.default_rng(SEED).uniform(-1.0, 1.0, 200)
    return write_csv("linear.csv", _csv(["x", "y"], np.column_stack([x, x])))


@pytest.fixture
def wide_csv(write_csv):
    rng = np.random.default_rng(SEED)
    predictors = rng.uniform(-1.0, 1.0, size=(60, 8))
    response = predictors[:, 5] ** 2
    columns = ["resp"] + [f"g{j}" for j in range(8)]
    return write_csv("wide.csv", _csv(columns, np.column_stack([response, predictors])))


class TestCompute:
    def test_monotone_ddc(self, capsys, monotone_csv):
        code, out, _ = _run(capsys, "compute", monotone_csv, "--response", "y")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert table["method"].tolist() == ["DDC"]
        assert table["value"].iloc[0] == pytest.approx(0.5, rel=1e-14)
        assert (table["n"].iloc[0], table["p"].iloc[0]) == (5, 1)

    def test_constant_predictor(self, capsys, write_csv):
        path = write_csv("const.csv", "x,y\n3,1\n3,2\n3,5\n3,4\n")
        code, out, _ = _run(capsys, "compute", path, "-y", "y")
        assert code == 0
        assert read_table(io.StringIO(out))["value"].iloc[0] == 0.0

    def test_missing_column(self, capsys, monotone_csv):
        code, _, err = _run(capsys, "compute", monotone_csv, "--response", "income")
        assert code == 2
        assert "income" in err

    def test_unparseable_cell(self, capsys, write_csv):
        path = write_csv("bad.csv", "x,y\n1,2\n3,abc\n4,5\n")
        code, _, err = _run(capsys, "compute", path, "--response", "y")
        assert code == 2
        assert "line 3" in err
        assert "'y'" in err

    def test_non_finite_cell(self, capsys, write_csv):
        path = write_csv("inf.csv", "x,y\n1,2\ninf,3\n4,5\n")
        code, _, err = _run(capsys, "compute", path, "--response", "y")
        assert code == 2
        assert "line 3" in err

    def test_undecodable_file(self, capsys, tmp_path):
        path = tmp_path / "latin.csv"
        path.write_bytes(b"x,y\n1,2\n\xff\xfe,3\n")
        code, _, err = _run(capsys, "compute", path, "--response", "y")
        assert code == 2
        assert "UTF-8" in err

    def test_directory_instead_of_file(self, capsys, tmp_path):
        code, _, err = _run(capsys, "compute", tmp_path, "--response", "y")
        assert code == 2
        assert "ddcor: error:" in err

    def test_line_numbers_count_blank_lines(self, capsys, write_csv):
        path = write_csv("gaps.csv", "x,y\n1,2\n\n3,4\n\n5,oops\n")
        code, _, err = _run(capsys, "compute", path, "--response", "y")
        assert code == 2
        assert "line 6" in err

    def test_metadata_header(self, capsys, monotone_csv):
        _, out, _ = _run(capsys, "compute", monotone_csv, "--response", "y", "--seed", 42)
        header = [line for line in out.splitlines() if line.startswith("#")]
        assert "# command: \"compute\"" in header
        assert any(line.startswith("# config:") and '"seed": 42' in line for line in header)

    def test_json_output(self, capsys, monotone_csv):
        _, out, _ = _run(capsys, "compute", monotone_csv, "-y", "y", "--methods", "ddc", "dc", "--format", "json")
        payload = json.loads(out)
        assert payload["metadata"]["command"] == "compute"
        assert [row["method"] for row in payload["rows"]] == ["DDC", "DC"]

    def test_no_header(self, capsys, write_csv):
        path = write_csv("plain.csv", "1,1\n2,2\n3,3\n4,4\n5,5\n")
        code, out, _ = _run(capsys, "compute", path, "--no-header", "--response", "2")
        assert code == 0
        assert read_table(io.StringIO(out))["value"].iloc[0] == pytest.approx(0.5)

    def test_output_file(self, capsys, monotone_csv, tmp_path):
        target = tmp_path / "out.csv"
        code, out, _ = _run(capsys, "compute", monotone_csv, "-y", "y", "--output", target)
        assert code == 0
        assert out == ""
        assert read_table(str(target))["value"].iloc[0] == pytest.approx(0.5)

    def test_missing_response_flag_is_usage_error(self, monotone_csv):
        with pytest.raises(SystemExit) as excinfo:
            main(["compute", monotone_csv])
        assert excinfo.value.code == 2


class TestTest:
    def test_permutation_source_for_dc(self, capsys, linear_csv):
        code, out, _ = _run(capsys, "test", linear_csv, "-y", "y", "--methods", "dc", "--permutations", 500)
        assert code == 0
        row = read_table(io.StringIO(out)).iloc[0]
        assert row["p_source"] == "permutation"
        assert row["permutations"] == 500

    def test_strong_dependence_rejected_by_all(self, capsys, linear_csv):
        code, out, _ = _run(capsys, "test", linear_csv, "-y", "y", "--permutations", 99,
                            "--methods", "ddc", "chatterjee", "dc", "hsic", "pcor")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert table["reject"].all()

    def test_reproducible(self, capsys, write_csv):
        rng = np.random.default_rng(SEED)
        path = write_csv("null.csv", _csv(["x", "y"], rng.normal(size=(80, 2))))
        argv = ("test", path, "-y", "y", "--methods", "ddc", "hsic", "--permutations", 99, "--seed", 5)
        _, first, _ = _run(capsys, *argv)
        _, second, _ = _run(capsys, *argv)
        assert first == second

    def test_constant_predictor_is_degenerate(self, capsys, write_csv):
        path = write_csv("const.csv", "x,y\n1,1\n1,2\n1,3\n1,4\n")
        code, _, err = _run(capsys, "test", path, "-y", "y")
        assert code == 3
        assert "error" in err

    def test_invalid_level(self, capsys, monotone_csv):
        code, _, _ = _run(capsys, "test", monotone_csv, "-y", "y", "--level", "1.5")
        assert code == 2


class TestScreen:
    def test_ranking(self, capsys, wide_csv):
        code, out, _ = _run(capsys, "screen", wide_csv, "--response", "resp")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert table["predictor"].iloc[0] == "g5"
        assert table["rank"].tolist() == list(range(1, 9))
        assert set(table.columns) >= {"value", "p_value", "p_source", "significant"}

    def test_compare(self, capsys, wide_csv):
        code, out, _ = _run(capsys, "screen", wide_csv, "-y", "resp", "--compare", "dc", "hsic",
                            "--permutations", 19, "--format", "json")
        assert code == 0
        payload = json.loads(out)
        row = payload["rows"][0]
        assert {"rank_dc", "significant_dc", "rank_hsic", "significant_hsic"} <= set(row)
        assert set(payload["metadata"]["exclusive"]) == {"DDC", "DC", "HSIC"}
        assert payload["metadata"]["concordance"][0]["method"] == "DDC"

    def test_scatter_export(self, capsys, wide_csv, tmp_path):
        target = tmp_path / "scatter.csv"
        code, _, _ = _run(capsys, "screen", wide_csv, "-y", "resp", "--scatter", target, "--scatter-top", 2)
        assert code == 0
        scatter = read_table(str(target))
        assert list(scatter.columns) == ["predictor", "x", "resp"]
        assert len(scatter) == 2 * 60
        assert scatter["predictor"].iloc[0] == "g5"

    def test_overlapping_columns(self, capsys, wide_csv):
        code, _, err = _run(capsys, "screen", wide_csv, "-y", "resp", "-x", "g1", "resp")
        assert code == 2
        assert "resp" in err

    def test_desk_scale_pipeline(self, capsys, write_csv):
        rng = np.random.default_rng(SEED)
        data = rng.normal(size=(30, 501))
        path = write_csv("genes.csv", _csv(["Ro1"] + [f"gene{j}" for j in range(500)], data))
        code, out, _ = _run(capsys, "screen", path, "-y", "Ro1")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert len(table) == 500
        assert (table["p_source"] == "asymptotic").all()

    @pytest.mark.slow
    def test_desk_scale_pipeline_with_permutation_methods(self, capsys, write_csv):
        rng = np.random.default_rng(SEED)
        data = rng.normal(size=(30, 501))
        path = write_csv("genes.csv", _csv(["Ro1"] + [f"gene{j}" for j in range(500)], data))
        code, out, _ = _run(capsys, "screen", path, "-y", "Ro1", "--compare", "dc", "hsic", "pcor",
                            "--permutations", 500, "--threads", "auto")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert {"rank_dc", "rank_hsic", "rank_pcor"} <= set(table.columns)


class TestSimulate:
    def test_example1_means_key_set(self, capsys):
        code, out, _ = _run(capsys, "simulate", "Example1Means", "--set", "reps=2", "--set", "n=20")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert len(table) == 3 * 5 * 5
        assert set(table["model"]) == {"quadratic", "sinusoid", "step"}
        assert "# parameters:" in out

    def test_wide_layout(self, capsys):
        code, out, _ = _run(capsys, "simulate", "example1-means", "--set", "reps=2", "--set", "n=20",
                            "--set", "models=step", "--set", "methods=ddc,dc", "--wide")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert list(table.columns) == ["model", "method"] + [f"lambda={lam}" for lam in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert len(table) == 2

    def test_example2_screening(self, capsys):
        code, out, _ = _run(capsys, "simulate", "example2_screening", "--set", "rho=0.3", "--set", "methods=ddc",
                            "--set", "reps=2", "--set", "n=50", "--set", "p=20")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert {"P1", "P2", "P3", "P4", "MMS", "SD"} <= set(table.columns)
        assert table["method"].tolist() == ["DDC"]

    def test_example2_power(self, capsys):
        code, out, _ = _run(capsys, "simulate", "example2-power", "--set", "rho=0.5", "--set", "methods=ddc",
                            "--set", "reps=2", "--set", "n=40", "--set", "p=8", "--set", "predictors=X3")
        assert code == 0
        table = read_table(io.StringIO(out))
        assert table["predictor"].tolist() == ["X3"]

    def test_unknown_parameter(self, capsys):
        code, _, err = _run(capsys, "simulate", "example1-means", "--set", "sigma=2")
        assert code == 2
        assert "valid keys" in err
        assert "lambdas" in err

    def test_unknown_experiment(self, capsys):
        code, _, err = _run(capsys, "simulate", "example9")
        assert code == 2
        assert "example1_power" in err

    def test_byte_identical(self, capsys):
        argv = ("simulate", "example1-power", "--set", "reps=3", "--set", "n=20", "--set", "models=linear",
                "--set", "lambdas=0.5", "--set", "methods=ddc,hsic", "--set", "permutations=19")
        _, first, _ = _run(capsys, *argv)
        _, second, _ = _run(capsys, *argv)
        assert first == second


class TestParsing:
    def test_experiment_names(self):
        assert Experiment.parse("Example2Power") is Experiment.EXAMPLE2_POWER
        assert Experiment.parse("example-1-means") is Experiment.EXAMPLE1_MEANS

    def test_overrides(self):
        params = resolve_parameters(Experiment.EXAMPLE2_POWER, parse_overrides(["rho=0.3,0.7", "predictors=X1,4"]))
        assert params["rho"] == [0.3, 0.7]
        assert params["predictors"] == [0, 3]
        assert params["n"] == 200

    def test_malformed_override(self):
        with pytest.raises(ConfigurationError):
            parse_overrides(["reps"])

    def test_bad_override_value(self):
        with pytest.raises(ConfigurationError):
            resolve_parameters(Experiment.EXAMPLE1_MEANS, {"reps": "many"})

    def test_run_config_validation(self):
        with pytest.raises(ConfigurationError):
            RunConfig(seed=-1)
        assert RunConfig().standardize_or(True) is True
        assert RunConfig(standardize=False).standardize_or(True) is False

    def test_dataset_selects_remaining_columns(self, write_csv):
        path = write_csv("d.csv", "a,b,c\n1,2,3\n4,5,6\n")
        response, predictors, names = DatasetFile(path, ["b"]).load()
        assert names == ["a", "c"]
        np.testing.assert_array_equal(predictors, [[1.0, 3.0], [4.0, 6.0]])
        np.testing.assert_array_equal(response[:, 0], [2.0, 5.0])

    def test_parse_error_location(self, write_csv):
        path = write_csv("d.csv", "a;b\n1;2\n;5\n")
        with pytest.raises(DataParseError) as excinfo:
            DatasetFile(path, ["b"], delimiter=";").load()
        assert excinfo.value.line == 3
        assert excinfo.value.column == "a"

    def test_blank_lines_are_skipped(self, write_csv):
        path = write_csv("d.csv", "a,b\n1,2\n\n3,4\n\n")
        response, predictors, _ = DatasetFile(path, ["b"]).load()
        np.testing.assert_array_equal(response[:, 0], [2.0, 4.0])
        np.testing.assert_array_equal(predictors[:, 0], [1.0, 3.0])

    def test_header_only_dataset(self, write_csv):
        path = write_csv("d.csv", "a,b\n")
        with pytest.raises(DataParseError):
            DatasetFile(path, ["b"]).load()

    def test_runs_dir_keeps_records(self, capsys, monotone_csv, tmp_path):
        runs = tmp_path / "runs"
        code, _, _ = _run(capsys, "compute", monotone_csv, "-y", "y", "--runs-dir", runs)
        assert code == 0
        records = [json.loads(p.read_text()) for p in runs.glob("*.json")]
        assert len(records) == 1
        assert records[0]["name"] == "compute"
        assert records[0]["status"] == "completed"
