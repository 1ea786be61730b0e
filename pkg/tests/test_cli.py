import json

import pytest
from click.testing import CliRunner

from dyckmoments.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def run_json(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def validate_envelope(payload):
    import importlib.resources as res

    import jsonschema

    schema = json.loads(
        res.files("dyckmoments.schemas").joinpath("output.schema.json").read_text()
    )
    jsonschema.validate(payload, schema)


class TestMoments:
    def test_rational_mu(self, runner):
        payload = run_json(runner, ["moments", "--p", "1", "--smax", "10", "--bits", "192"])
        assert payload["results"]["mu"][2] == "5/64"
        assert payload["results"]["rational_mode"] is True
        validate_envelope(payload)

    def test_half_point_hint(self, runner):
        result = runner.invoke(main, ["moments", "--p", "0.5"])
        assert result.exit_code == 2
        assert "limit-half" in result.output

    def test_deterministic_output(self, runner):
        args = ["moments", "--p", "3/4", "--smax", "6", "--bits", "192"]
        a = runner.invoke(main, args).output
        b = runner.invoke(main, args).output
        assert a == b


class TestAlpha:
    def test_both_methods_agree(self, runner):
        payload = run_json(runner, ["alpha", "--cost", "gamma-ratio", "--a", "1/2",
                                    "--p", "3/4", "--bits", "192"])
        assert float(payload["results"]["abs_difference"]) < 1e-10
        validate_envelope(payload)

    def test_pole_exit_code(self, runner):
        result = runner.invoke(main, ["alpha", "--cost", "gamma-ratio", "--a", "1",
                                      "--p", "3/2", "--method", "closed"])
        assert result.exit_code == 3

    def test_half_is_validation_error(self, runner):
        result = runner.invoke(main, ["alpha", "--cost", "gamma-ratio", "--p", "1/2"])
        assert result.exit_code == 2

    def test_numeric_only_for_power_family(self, runner):
        payload = run_json(runner, ["alpha", "--cost", "power-one", "--p", "1",
                                    "--method", "numeric", "--bits", "160"])
        assert abs(float(payload["results"]["numeric"])) < 1e-12


class TestFiniteN:
    def test_selected_moments_and_csv(self, runner, tmp_path):
        out = tmp_path / "t.csv"
        payload = run_json(runner, ["finite-n", "--p", "1", "--nmax", "64", "--smax", "2",
                                    "--mode", "rat", "--csv", str(out), "--bits", "160"])
        assert payload["results"]["moments"]["1"]["2"] == "3/2"
        header = out.read_text().splitlines()[0]
        assert header == "ensemble,s,N,moment,rescaled"

    def test_convergence_report(self, runner):
        payload = run_json(runner, ["finite-n", "--p", "1", "--eps", "alpha",
                                    "--nmax", "512", "--smax", "2", "--convergence",
                                    "--bits", "160"])
        decays = payload["results"]["convergence"]["fitted_decay"]
        assert decays[1] > 0.3

    def test_rejects_convergence_at_half(self, runner):
        result = runner.invoke(main, ["finite-n", "--p", "1/2", "--convergence"])
        assert result.exit_code == 2


class TestSample:
    def test_summary_schema_and_determinism(self, runner, tmp_path):
        import importlib.resources as res

        import jsonschema

        args = ["sample", "--p", "1", "--size", "30", "--count", "2000",
                "--seed", "11", "--bits", "160"]
        out_a = runner.invoke(main, args, catch_exceptions=False).output
        out_b = runner.invoke(main, args, catch_exceptions=False).output
        assert out_a == out_b
        payload = json.loads(out_a)
        schema = json.loads(
            res.files("dyckmoments.schemas").joinpath("sample_summary.schema.json").read_text()
        )
        jsonschema.validate(payload, schema)

    def test_hist_csv(self, runner, tmp_path):
        out = tmp_path / "h.csv"
        result = runner.invoke(main, ["sample", "--p", "1", "--size", "10",
                                      "--count", "500", "--hist-csv", str(out),
                                      "--bits", "160"])
        assert result.exit_code == 0
        assert out.read_text().startswith("bin_left,bin_right,count")


class TestChecks:
    def test_tree_check_passes(self, runner):
        payload = run_json(runner, ["tree-check", "--p", "1", "--smax", "5", "--bits", "192"])
        assert float(payload["results"]["max_rel_deviation"]) < 1e-25

    def test_tree_check_mismatch_exit(self, runner):
        result = runner.invoke(main, ["tree-check", "--p", "3/4", "--smax", "4",
                                      "--tol", "1e-90", "--bits", "192"])
        assert result.exit_code == 4

    def test_bounds(self, runner):
        payload = run_json(runner, ["bounds", "--p", "1/4", "--smax", "20", "--bits", "192"])
        assert payload["results"]["ok"] is True

    def test_limit_half_values(self, runner):
        payload = run_json(runner, ["limit-half", "--smax", "3", "--bits", "224"])
        vals = [float(v) for v in payload["results"]["values"]]
        assert abs(vals[2] - 0.610375) < 5e-5
        assert abs(vals[3] - 0.266217) < 5e-5

    def test_log_case(self, runner):
        payload = run_json(runner, ["log-case", "--smax", "6", "--nmax", "256",
                                    "--bits", "160"])
        taus = [float(v) for v in payload["results"]["tau"]]
        assert abs(taus[2] - 0.144304) < 1e-5
        assert payload["results"]["tau_rational_coefficients"][1] == "1/4"

    def test_airy(self, runner, tmp_path):
        dcsv = tmp_path / "d.csv"
        payload = run_json(runner, ["airy", "--zeros", "3", "--moments", "1",
                                    "--density-csv", str(dcsv), "--bits", "160"])
        zeros = [float(z) for z in payload["results"]["airy_zero_magnitudes"]]
        assert abs(zeros[0] - 2.3381074105) < 1e-9
        assert zeros == sorted(zeros)
        assert dcsv.read_text().startswith("x,density")


class TestVerifyAll:
    def test_quick_suite(self, runner):
        result = runner.invoke(main, ["verify-all", "--quick", "--bits", "192"])
        assert result.exit_code == 0, result.output
        assert "all checks passed" in result.output
        assert "FAIL" not in result.output
