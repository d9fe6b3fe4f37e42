import csv
import io
import json
from fractions import Fraction

import pytest

from permprod.cli import (
    ConfigError,
    ExperimentConfig,
    config_from_mapping,
    emit_report,
    main,
    parse_config,
    sampler_from_text,
    sampler_to_text,
    serialize_config,
)
from permprod.samplers import SamplerSpec


def test_sampler_text_round_trip():
    for text in ("uniform", "ewens:1/2", "ewens:2", "sqrt_fixed:sqrt", "sqrt_fixed:3", "matching_heavy:1/2"):
        spec = sampler_from_text(text)
        assert sampler_to_text(spec) == text
    assert sampler_from_text(" ewens:1/2 ").theta == Fraction(1, 2)


def test_sampler_text_rejects_garbage():
    for bad in ("uniform:1", "ewens", "ewens:abc", "ewens:1/0", "sqrt_fixed:x", "bogus:1"):
        with pytest.raises(ConfigError):
            sampler_from_text(bad)


def test_config_round_trip():
    config = ExperimentConfig(
        command="convergence",
        seed=7,
        samplers=(SamplerSpec("ewens", theta=Fraction(2)), SamplerSpec("uniform")),
        n_grid=(100, 200),
        functionals=(),
        tv_orders=(2,),
        samples=500,
        truncation=6,
        format="json",
    )
    assert parse_config(serialize_config(config)) == config


def test_parse_config_comments_and_duplicates():
    text = "# demo\ncommand = verify-lemmas\n\nseed = 3\npair_n = 4\n"
    config = parse_config(text)
    assert config.command == "verify-lemmas" and config.pair_n == 4
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("command = exact\nseed = 1\nseed = 2\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("command exact\n")


def test_config_missing_and_unknown_fields():
    with pytest.raises(ConfigError, match="seed"):
        config_from_mapping({"command": "verify-lemmas"})
    with pytest.raises(ConfigError, match="command"):
        config_from_mapping({"seed": "3"})
    with pytest.raises(ConfigError, match="unknown config key"):
        config_from_mapping({"command": "verify-lemmas", "seed": "1", "extra": "x"})


def test_config_rejects_inapplicable_fields():
    with pytest.raises(ConfigError, match="v_vec"):
        config_from_mapping(
            {
                "command": "sample",
                "seed": "1",
                "samplers": "uniform",
                "n": "6",
                "samples": "10",
                "v_vec": "1",
            }
        )


def test_config_value_checks():
    base = {"command": "exact", "seed": "1", "samplers": "uniform, uniform", "v_vec": "1"}
    with pytest.raises(ConfigError, match="n:"):
        config_from_mapping({**base, "n": "9"})
    with pytest.raises(ConfigError, match="samplers"):
        config_from_mapping({**base, "samplers": "uniform", "n": "5"})
    with pytest.raises(ConfigError, match="v_vec"):
        config_from_mapping({**base, "n": "4", "v_vec": "1, 1, 1, 1, 1"})
    with pytest.raises(ConfigError, match="seed"):
        config_from_mapping({**base, "n": "4", "seed": "-1"})
    with pytest.raises(ConfigError, match="n_grid"):
        config_from_mapping(
            {
                "command": "convergence",
                "seed": "1",
                "samplers": "uniform, uniform",
                "n_grid": "6, 4",
                "samples": "200",
                "tv_orders": "2",
            }
        )
    with pytest.raises(ConfigError, match="functionals"):
        config_from_mapping(
            {
                "command": "convergence",
                "seed": "1",
                "samplers": "uniform, uniform",
                "n_grid": "4, 6",
                "samples": "200",
            }
        )


def test_emit_report_csv_layout():
    rows = [
        {"n": 4, "value": Fraction(1, 3), "x": 0.123456789012345, "flag": True},
        {"n": 5, "value": Fraction(2, 1), "x": None, "flag": False},
    ]
    config = ExperimentConfig(command="verify-lemmas", seed=9)
    text = emit_report(rows, "csv", config=config, trends={"product:1": "non-increasing"})
    lines = text.splitlines()
    assert lines[0].startswith("# config: command = verify-lemmas; seed = 9")
    assert lines[1] == "# trend product:1 = non-increasing"
    assert lines[2] == "n,value,x,flag"
    assert lines[3] == "4,1/3,0.123456789012,true"
    assert lines[4] == "5,2/1,,false"


def test_emit_report_json_layout():
    rows = [{"n": 4, "value": Fraction(1, 3), "x": None}]
    config = ExperimentConfig(command="verify-lemmas", seed=9)
    doc = json.loads(emit_report(rows, "json", config=config))
    assert doc["config"]["command"] == "verify-lemmas"
    assert doc["rows"][0] == {"n": 4, "value": "1/3", "x": None}
    assert "trends" not in doc


def test_emit_report_refuses_empty_or_ragged():
    with pytest.raises(ValueError):
        emit_report([], "csv")
    with pytest.raises(ValueError):
        emit_report([{"a": 1}, {"b": 2}], "csv")
    with pytest.raises(ValueError):
        emit_report([{"a": 1}], "yaml")


def test_provenance_excludes_output_path(tmp_path):
    out = tmp_path / "r.csv"
    config = ExperimentConfig(command="verify-lemmas", seed=9, output=str(out))
    text = emit_report([{"a": 1}], "csv", path=str(out), config=config)
    assert "output" not in text.splitlines()[0]
    assert out.read_text() == text


def test_main_exact_run(tmp_path, capsys):
    out = tmp_path / "exact.csv"
    code = main(
        [
            "exact",
            "--seed",
            "1",
            "--samplers",
            "uniform, uniform",
            "--n",
            "6",
            "--v-vec",
            "1, 1",
            "--output",
            str(out),
        ]
    )
    assert code == 0
    assert "wrote 3 rows" in capsys.readouterr().out
    rows = list(csv.DictReader(ln for ln in out.read_text().splitlines() if not ln.startswith("#")))
    by_quantity = {r["quantity"]: r for r in rows}
    assert by_quantity["moment"]["rational"] == "2/1"
    assert by_quantity["moment"]["v"] == "1*1"
    assert by_quantity["joint-prob"]["n"] == "6"


def test_main_scaled_joint_prob_value(capsys):
    code = main(
        ["exact", "--seed", "1", "--samplers", "uniform, uniform", "--n", "5", "--v-vec", "1, 2"]
    )
    assert code == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(ln for ln in out.splitlines() if not ln.startswith("#")))
    scaled = next(r for r in rows if r["quantity"] == "scaled-joint-prob")
    assert scaled["rational"] == "5/4"


def test_main_verify_lemmas_small(capsys):
    code = main(["verify-lemmas", "--seed", "0", "--pair-n", "3", "--single-n", "4"])
    assert code == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(ln for ln in out.splitlines() if not ln.startswith("#")))
    assert all(r["violations"] == "0" for r in rows)
    assert all(r["ok"] == "true" for r in rows)
    suites = {r["suite"] for r in rows}
    assert "relabel-dichotomy" in suites and "membership-upper-bounds" in suites


def test_main_sample_layout_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = [
        "sample",
        "--seed",
        "13",
        "--samplers",
        "ewens:1, uniform",
        "--n",
        "5",
        "--samples",
        "12",
    ]
    assert main(argv + ["--output", str(out1)]) == 0
    assert main(argv + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = list(csv.DictReader(ln for ln in out1.read_text().splitlines() if not ln.startswith("#")))
    assert len(rows) == 12
    assert set(rows[0]) == {"index", "factor1", "factor2", "product"}
    # rows carry one-line permutations of 1..5
    assert sorted(rows[0]["product"].split()) == ["1", "2", "3", "4", "5"]


def test_main_convergence_single_point_no_trend(tmp_path):
    out = tmp_path / "scan.csv"
    code = main(
        [
            "convergence",
            "--seed",
            "5",
            "--samplers",
            "uniform, uniform",
            "--n-grid",
            "8",
            "--functionals",
            "product:1",
            "--samples",
            "400",
            "--output",
            str(out),
        ]
    )
    assert code == 0
    text = out.read_text()
    assert "# trend" not in text
    assert text.splitlines()[0].startswith("# config:")


def test_main_convergence_grid_emits_trend(capsys):
    code = main(
        [
            "convergence",
            "--seed",
            "5",
            "--samplers",
            "uniform, uniform",
            "--n-grid",
            "6, 12",
            "--functionals",
            "product:1",
            "--samples",
            "400",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert any(ln.startswith("# trend product:1 = ") for ln in out.splitlines())


def test_main_moments_json(capsys):
    code = main(
        [
            "moments",
            "--seed",
            "2",
            "--samplers",
            "ewens:2, ewens:1/2",
            "--n",
            "30",
            "--functionals",
            "product:1, product:2",
            "--samples",
            "500",
            "--format",
            "json",
        ]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["command"] == "moments"
    assert [r["functional"] for r in doc["rows"]] == ["product:1", "product:2"]
    assert all(r["stderr"] > 0 for r in doc["rows"])


def test_main_error_paths(tmp_path, capsys):
    assert main([]) == 2
    assert main(["exact", "--seed", "1", "--samplers", "uniform", "--n", "4", "--v-vec", "1"]) == 2
    assert "config error" in capsys.readouterr().err
    # config file command clash with the subcommand
    f = tmp_path / "c.cfg"
    f.write_text("command = exact\nseed = 1\n")
    assert main(["sample", "--config", str(f)]) == 2
    err = capsys.readouterr().err
    assert "config file says" in err


def test_main_flags_override_config_file(tmp_path, capsys):
    f = tmp_path / "c.cfg"
    f.write_text(
        "command = exact\nseed = 1\nsamplers = uniform, uniform\nn = 4\nv_vec = 1\n"
    )
    assert main(["exact", "--config", str(f), "--n", "5"]) == 0
    out = capsys.readouterr().out
    assert "# config:" in out and "n = 5" in out.splitlines()[0]
