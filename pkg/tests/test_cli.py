import json

import pytest

from fpboot import PopulationParseError, load_population
from fpboot.cli import cli_dispatch, emit_report, load_report
from fpboot.study import StudyConfig, SynthSpec, coverage_study
from fpboot.estimators import EstimatorKind
from fpboot.intervals import CiType
from fpboot.resampling import Method


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadPopulation:
    def test_basic_parse(self, tmp_path):
        path = write(tmp_path / "pop.csv", "ncs,top10\n1.0,0\n2.0,1\n")
        pop = load_population(path)
        assert pop.size == 2
        assert pop.ncs.tolist() == [1.0, 2.0]
        assert pop.top10.tolist() == [False, True]

    def test_flag_spellings(self, tmp_path):
        path = write(tmp_path / "pop.csv", "ncs,top10\n1.0,true\n2.0,false\n3.0,1\n")
        pop = load_population(path)
        assert pop.top10.tolist() == [True, False, True]

    def test_bad_header(self, tmp_path):
        path = write(tmp_path / "pop.csv", "score,flag\n1.0,0\n")
        with pytest.raises(PopulationParseError, match=":1:"):
            load_population(path)

    def test_bad_row_names_line(self, tmp_path):
        path = write(tmp_path / "pop.csv", "ncs,top10\n1.0,0\nxyz,0\n")
        with pytest.raises(PopulationParseError, match=":3:"):
            load_population(path)

    def test_bad_flag_names_line(self, tmp_path):
        path = write(tmp_path / "pop.csv", "ncs,top10\n1.0,2\n")
        with pytest.raises(PopulationParseError, match=":2:"):
            load_population(path)

    def test_negative_ncs_is_validation_error(self, tmp_path):
        path = write(tmp_path / "pop.csv", "ncs,top10\n-1.0,0\n")
        with pytest.raises(ValueError) as err:
            load_population(path)
        assert not isinstance(err.value, PopulationParseError)

    def test_empty_body_rejected(self, tmp_path):
        path = write(tmp_path / "pop.csv", "ncs,top10\n")
        with pytest.raises(ValueError):
            load_population(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_population(tmp_path / "nope.csv")


def tiny_report(seed=3):
    cfg = StudyConfig(
        population_source=SynthSpec(size=80, target_mncs=1.275, target_pp=13.7),
        sample_sizes=(20,),
        B=60,
        repetitions=4,
        methods=(Method.PPB,),
        ci_types=(CiType.NORMAL, CiType.PERCENTILE),
        estimators=(EstimatorKind.MNCS,),
        master_seed=seed,
    )
    return coverage_study(cfg)


class TestEmitReport:
    def test_csv_shape(self, tmp_path):
        report = tiny_report()
        out = tmp_path / "r.csv"
        emit_report(report, "csv", out)
        lines = out.read_text().splitlines()
        assert lines[0] == "n,method,ci_type,estimator,coverage,avg_length,avg_variance,R"
        assert len(lines) == 1 + len(report.cells)

    def test_csv_byte_stable(self, tmp_path):
        report = tiny_report()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_report(report, "csv", a)
        emit_report(report, "csv", b)
        assert a.read_bytes() == b.read_bytes()

    def test_json_round_trip(self, tmp_path):
        report = tiny_report()
        out = tmp_path / "r.json"
        emit_report(report, "json", out)
        again = load_report(out)
        assert again == report.to_dict()

    def test_csv_round_trip_precision(self, tmp_path):
        report = tiny_report()
        out = tmp_path / "r.csv"
        emit_report(report, "csv", out)
        lines = out.read_text().splitlines()[1:]
        for line, cell in zip(lines, report.cells):
            fields = line.split(",")
            assert float(fields[4]) == pytest.approx(cell.coverage, rel=1e-11)
            assert float(fields[5]) == pytest.approx(cell.avg_length, rel=1e-11)
            assert float(fields[6]) == pytest.approx(cell.avg_variance, rel=1e-11)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(tiny_report(), "yaml", tmp_path / "r.yaml")


class TestCliDispatch:
    def test_synth_then_estimate(self, tmp_path, capsys):
        pop_path = str(tmp_path / "pop.csv")
        assert cli_dispatch(["synth", "--n", "6224", "--mncs", "1.275", "--pp", "13.7",
                             "--seed", "42", "--out", pop_path]) == 0
        capsys.readouterr()
        assert cli_dispatch(["estimate", "--population", pop_path, "--estimator", "mncs"]) == 0
        out = capsys.readouterr().out
        assert "mncs 1.275" in out.splitlines()[0]

    def test_estimate_with_sample(self, tmp_path, capsys):
        pop_path = str(tmp_path / "pop.csv")
        cli_dispatch(["synth", "--n", "300", "--out", pop_path])
        capsys.readouterr()
        code = cli_dispatch(["estimate", "--population", pop_path, "--estimator", "pp",
                             "--n", "50", "--method", "ppb", "--ci", "boot-t",
                             "--B", "200", "--seed", "9"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("pp_top10 ")
        assert "ci boot-t" in out

    def test_population_round_trip(self, tmp_path):
        pop_path = str(tmp_path / "pop.csv")
        cli_dispatch(["synth", "--n", "500", "--seed", "3", "--out", pop_path])
        pop = load_population(pop_path)
        assert pop.size == 500
        from fpboot import mncs

        assert mncs(pop) == pytest.approx(1.275, abs=1e-12)

    @staticmethod
    def study_config(tmp_path, pop_path, **extra):
        cfg = {
            "population": pop_path,
            "sample_sizes": [30],
            "B": 80,
            "repetitions": 6,
            "methods": ["standard", "ppb", "mirror"],
            "ci_types": ["normal", "percentile", "bca", "boot-t"],
            "estimators": ["mncs", "pp_top10"],
            "level": 0.95,
            "master_seed": 42,
        }
        cfg.update(extra)
        path = tmp_path / "study.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        return str(path)

    def test_simulate_deterministic(self, tmp_path, capsys):
        pop_path = str(tmp_path / "pop.csv")
        cli_dispatch(["synth", "--n", "120", "--seed", "1", "--out", pop_path])
        cfg = self.study_config(tmp_path, pop_path)
        out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
        assert cli_dispatch(["simulate", "--config", cfg, "--out", out1]) == 0
        assert cli_dispatch(["simulate", "--config", cfg, "--out", out2, "--threads", "2"]) == 0
        assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()

    def test_simulate_flag_overrides(self, tmp_path, capsys):
        pop_path = str(tmp_path / "pop.csv")
        cli_dispatch(["synth", "--n", "120", "--seed", "1", "--out", pop_path])
        cfg = self.study_config(tmp_path, pop_path)
        out = str(tmp_path / "r.json")
        assert cli_dispatch(["simulate", "--config", cfg, "--out", out, "--format", "json",
                             "--reps", "3", "--method", "ppb", "--estimator", "mncs"]) == 0
        report = load_report(out)
        assert report["config"]["repetitions"] == 3
        assert report["config"]["methods"] == ["ppb"]
        assert {c["method"] for c in report["cells"]} == {"ppb"}
        assert all(c["R"] <= 3 for c in report["cells"])

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        pop_path = str(tmp_path / "pop.csv")
        cli_dispatch(["synth", "--n", "120", "--seed", "1", "--out", pop_path])
        cfg = self.study_config(tmp_path, pop_path, typo_key=1)
        assert cli_dispatch(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1

    def test_sweep_census_limit(self, tmp_path, capsys):
        pop_path = str(tmp_path / "pop.csv")
        cli_dispatch(["synth", "--n", "90", "--seed", "2", "--out", pop_path])
        out = str(tmp_path / "sweep.csv")
        code = cli_dispatch(["sweep", "--population", pop_path, "--sizes", "30,90",
                             "--B", "80", "--reps", "4", "--estimator", "mncs", "--out", out])
        assert code == 0
        rows = (tmp_path / "sweep.csv").read_text().splitlines()
        assert rows[0] == "n,method,ci_type,estimator,avg_length"
        zero_rows = [r for r in rows[1:] if r.startswith("90,ppb") or r.startswith("90,mirror")]
        assert zero_rows and all(r.endswith(",0") for r in zero_rows)

    def test_exit_codes(self, tmp_path, capsys):
        # io error: missing population file
        assert cli_dispatch(["estimate", "--population", str(tmp_path / "none.csv"),
                             "--estimator", "mncs"]) == 2
        # parse error: bad header
        bad = write(tmp_path / "bad.csv", "a,b\n1,0\n")
        assert cli_dispatch(["estimate", "--population", bad, "--estimator", "mncs"]) == 2
        # validation error: negative score
        neg = write(tmp_path / "neg.csv", "ncs,top10\n-1.0,0\n")
        assert cli_dispatch(["estimate", "--population", neg, "--estimator", "mncs"]) == 1
        # usage error: unknown subcommand
        assert cli_dispatch(["frobnicate"]) == 1
        # validation error: sample larger than population
        pop_path = str(tmp_path / "p.csv")
        cli_dispatch(["synth", "--n", "50", "--out", pop_path])
        assert cli_dispatch(["estimate", "--population", pop_path, "--estimator", "mncs",
                             "--n", "51"]) == 1
