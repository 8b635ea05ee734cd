"""Tests for the command line interface."""

import pytest
from click.testing import CliRunner

from halo_slopes.cli import POLYGON_COLUMNS, cli
from halo_slopes.modules.coset_data import gen_synthetic, parse_dataset, serialize_dataset


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def dataset_file(tmp_path):
    """A small synthetic dataset at p = 3 on disk."""
    path = tmp_path / "small.qcd"
    path.write_bytes(serialize_dataset(gen_synthetic(5, 3)))
    return str(path)


def _body(output):
    return [line for line in output.splitlines() if not line.startswith("#")]


class TestLambdaCommand:
    """Test cases for the lambda command."""

    def test_values(self, runner):
        """Test the CSV table of lambda(n)."""
        result = runner.invoke(cli, ["lambda", "--t", "1", "--n", "4", "--p", "3"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "# halo-slopes 1.0.0 lambda"
        assert lines[2] == "# dataset sha256 none"
        assert _body(result.output) == ["n,lambda", "0,0", "1,0", "2,1", "3,3"]

    def test_row_count(self, runner):
        """Test that --n gives the number of rows, starting at n = 0."""
        result = runner.invoke(cli, ["lambda", "--p", "3", "--t", "1", "--n", "7"])
        assert result.exit_code == 0
        body = _body(result.output)
        assert len(body) == 8
        assert body[1:] == ["0,0", "1,0", "2,1", "3,3", "4,5", "5,8", "6,12"]

    def test_invalid_input_exit_code(self, runner):
        """Test exit code 2 for a bad t'."""
        result = runner.invoke(cli, ["lambda", "--t", "0", "--n", "4"])
        assert result.exit_code == 2

    def test_invalid_config_exit_code(self, runner):
        """Test exit code 2 for a composite p."""
        result = runner.invoke(cli, ["lambda", "--t", "1", "--n", "4", "--p", "4"])
        assert result.exit_code == 2

    def test_output_file(self, runner, tmp_path):
        """Test writing the report to a file."""
        path = tmp_path / "lambda.csv"
        result = runner.invoke(cli, ["lambda", "--t", "2", "--n", "3", "-o", str(path)])
        assert result.exit_code == 0
        assert _body(path.read_text()) == ["n,lambda", "0,0", "1,0", "2,0"]


class TestDatasetCommands:
    """Test cases for gen-synthetic and validate."""

    def test_gen_synthetic_is_deterministic(self, runner):
        """Test that the same seed prints the same dataset."""
        args = ["gen-synthetic", "--seed", "7", "--p", "3", "--t", "2"]
        first = runner.invoke(cli, args)
        second = runner.invoke(cli, args)
        assert first.exit_code == 0
        assert first.output == second.output
        assert parse_dataset(first.output) == gen_synthetic(7, 3, t=2)

    def test_validate(self, runner, dataset_file):
        """Test that a synthetic dataset validates."""
        result = runner.invoke(cli, ["validate", "--dataset", dataset_file])
        assert result.exit_code == 0
        assert "# halo-slopes 1.0.0 validate" in result.output

    def test_validate_failure(self, runner, tmp_path):
        """Test exit code 2 for membership failures."""
        text = serialize_dataset(gen_synthetic(0, 3, perturb=False)).decode("ascii")
        path = tmp_path / "bad.qcd"
        path.write_text(text.replace("| 1 0 3 3", "| 1 0 1 3"))
        result = runner.invoke(cli, ["validate", "--dataset", str(path)])
        assert result.exit_code == 2


class TestComputationCommands:
    """Test cases for commands that build Hecke matrices."""

    def test_newton_columns(self, runner, dataset_file):
        """Test the CSV columns of the Newton polygon."""
        args = ["newton", "--dataset", dataset_file, "--moments", "4", "--prec", "10", "--xprec", "6"]
        result = runner.invoke(cli, args + ["--z", "cyc:1", "--n-max", "4"])
        assert result.exit_code == 0
        assert ",".join(POLYGON_COLUMNS) in result.output.splitlines()

    def test_halo_precision_exit_code(self, runner, dataset_file):
        """Test exit code 3 when N cannot see lambda(n)."""
        args = ["halo", "--dataset", dataset_file, "--k-max", "2", "--moments", "4", "--prec", "3", "--xprec", "2"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 3

    def test_bad_eps(self, runner, dataset_file):
        """Test exit code 2 for a malformed character pair."""
        result = runner.invoke(cli, ["classical", "--dataset", dataset_file, "--k", "4", "--eps", "1:2"])
        assert result.exit_code == 2

    def test_parity(self, runner, dataset_file):
        """Test exit code 2 when k and w disagree mod 2."""
        result = runner.invoke(cli, ["charpoly", "--dataset", dataset_file, "--k", "3", "--w", "0"])
        assert result.exit_code == 2

    def test_prime_mismatch(self, runner, dataset_file):
        """Test that --p must agree with the dataset."""
        result = runner.invoke(cli, ["charpoly", "--dataset", dataset_file, "--p", "5", "--moments", "2"])
        assert result.exit_code == 2

    def test_classical(self, runner, dataset_file):
        """Test the classical slopes at k = 2."""
        result = runner.invoke(cli, ["classical", "--dataset", dataset_file, "--k", "2", "--prec", "10"])
        assert result.exit_code == 0
        assert "0,1,true" in result.output.splitlines()

    def test_scan_levels(self, runner, dataset_file, tmp_path):
        """Test that --levels bounds the number of scanned weights."""
        path = tmp_path / "scan.csv"
        args = ["scan", "--dataset", dataset_file, "--k", "2", "--moments", "4", "--prec", "10", "--xprec", "6"]
        result = runner.invoke(cli, args + ["--levels", "1", "-o", str(path)])
        assert result.exit_code == 0
        text = path.read_text()
        body = _body(text)
        assert body[0] == "weight,z_valuation,slope_bound,below"
        assert len(body) == 2
        assert '"scan_levels": 1' in text

    def test_scan_levels_from_config(self, runner, dataset_file, tmp_path):
        """Test that HALO_SCAN_LEVELS reaches the scan."""
        env_file = tmp_path / "scan.env"
        env_file.write_text("HALO_SCAN_LEVELS=1\n")
        path = tmp_path / "scan.csv"
        args = ["scan", "--dataset", dataset_file, "--k", "2", "--moments", "4", "--prec", "10", "--xprec", "6"]
        result = runner.invoke(cli, args + ["--config", str(env_file), "-o", str(path)])
        assert result.exit_code == 0
        assert len(_body(path.read_text())) == 2

    def test_scan_needs_k(self, runner, dataset_file):
        """Test exit code 2 without --k."""
        result = runner.invoke(cli, ["scan", "--dataset", dataset_file, "--moments", "4"])
        assert result.exit_code == 2


class TestDeterminism:
    """Test that repeated runs write byte-identical reports."""

    @pytest.mark.parametrize(
        "args",
        [
            ["charpoly", "--moments", "4", "--prec", "10", "--xprec", "6", "--n-max", "4"],
            ["newton", "--moments", "4", "--prec", "10", "--xprec", "6", "--z", "cyc:1", "--n-max", "4"],
            ["halo", "--k-max", "2", "--moments", "4", "--prec", "30", "--xprec", "30", "--z", "cyc:1"],
            ["classical", "--k", "4", "--prec", "10"],
            ["scan", "--k", "2", "--moments", "4", "--prec", "10", "--xprec", "6", "--levels", "2"],
        ],
    )
    def test_repeated_runs(self, runner, dataset_file, tmp_path, args):
        """Test two runs of the same command on the same dataset."""
        outputs = []
        for name in ("first.csv", "second.csv"):
            path = tmp_path / name
            result = runner.invoke(cli, args + ["--dataset", dataset_file, "-o", str(path)])
            assert result.exit_code == 0
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]
        assert outputs[0].startswith(b"# halo-slopes 1.0.0")
