import pytest

from brokersim.cli import main, parse_config


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestSimulate:
    ARGS = [
        "simulate",
        "--stream", "(SB)^10",
        "--policy", "median",
        "--seller-dist", "uniform:0,1",
        "--buyer-dist", "uniform:0,1",
        "--trials", "300",
        "--seed", "6",
    ]

    def test_emits_one_record(self, capsys):
        code, out, err = run(self.ARGS, capsys)
        assert code == 0
        line = out.strip().splitlines()[0]
        assert line.startswith("objective=profit mean=")
        assert "std_err=" in line and "ci95_low=" in line and "trials=300" in line

    def test_trace_file(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        code, out, _ = run(self.ARGS + ["--trace", str(trace)], capsys)
        assert code == 0
        lines = trace.read_text().splitlines()
        assert lines[0] == "t,role,price,value,traded,stock"
        assert len(lines) == 21
        assert lines[1].split(",")[1] == "S"

    def test_bad_stream_is_usage_error(self, capsys):
        argv = list(self.ARGS)
        argv[2] = "SB)"
        code, _, err = run(argv, capsys)
        assert code == 2
        assert "error:" in err

    def test_bad_policy_is_usage_error(self, capsys):
        argv = list(self.ARGS)
        argv[4] = "haggle:3"
        code, _, err = run(argv, capsys)
        assert code == 2


class TestSolveFractional:
    def test_prints_solution_and_certificates(self, capsys):
        code, out, _ = run(
            ["solve-fractional", "--alpha", "1", "--seller-dist", "uniform:0,1", "--buyer-dist", "uniform:0,1"],
            capsys,
        )
        assert code == 0
        assert "p=0.75" in out and "q=0.25" in out and "per_buyer_value=0.125" in out
        assert "value-lower-bound=PASS" in out

    def test_regularity_failure_is_usage_error(self, capsys):
        code, _, err = run(
            ["solve-fractional", "--alpha", "1", "--seller-dist", "uniform:0,1", "--buyer-dist", "pareto-eps:0.5"],
            capsys,
        )
        assert code == 2
        assert "MHR" in err


class TestExperiment:
    def test_writes_csv(self, capsys, tmp_path):
        out_path = tmp_path / "rows.csv"
        code, out, _ = run(
            ["experiment", "balanced", "--n-values", "20,40", "--trials", "200", "--seed", "3", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert len(lines) == 3
        assert "csv written" in out

    def test_unknown_scenario_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["experiment", "mystery"])
        assert exc.value.code == 2


class TestVerify:
    def test_matching_suite_passes(self, capsys):
        code, out, _ = run(["verify", "matching"], capsys)
        assert code == 0
        assert "PASS" in out and "failures=0" in out


class TestConfigAndEnv:
    def test_env_seed_used_as_default(self, capsys, monkeypatch):
        monkeypatch.setenv("BROKERSIM_SEED", "123")
        code, out, _ = run(TestSimulate.ARGS[:-2], capsys)  # drop --seed 6
        assert code == 0
        assert "seed=123" in out

    def test_explicit_seed_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("BROKERSIM_SEED", "123")
        code, out, _ = run(TestSimulate.ARGS, capsys)
        assert "seed=6" in out

    def test_config_file_overrides_flags(self, capsys, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("trials = 150  # fewer trials\nseed = 99\n")
        code, out, _ = run(TestSimulate.ARGS + ["--config", str(conf)], capsys)
        assert code == 0
        assert "trials=150" in out and "seed=99" in out

    def test_unknown_config_key_is_usage_error(self, capsys, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("quantum = 3\n")
        code, _, err = run(TestSimulate.ARGS + ["--config", str(conf)], capsys)
        assert code == 2
        assert "quantum" in err

    def test_parse_config_types(self, tmp_path):
        conf = tmp_path / "typed.conf"
        conf.write_text("# comment only\nn_values = 4, 8,16\ndecay_eps = 0.25\nout = results.csv\n")
        values = parse_config(str(conf))
        assert values == {"n_values": (4, 8, 16), "decay_eps": 0.25, "out": "results.csv"}

    def test_parse_config_rejects_bad_lines(self, tmp_path):
        conf = tmp_path / "broken.conf"
        conf.write_text("just words\n")
        from brokersim import SpecParseError

        with pytest.raises(SpecParseError):
            parse_config(str(conf))
