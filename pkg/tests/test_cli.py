"""Command-line tests driven in process through main()."""

import json
import os

import pytest

from cod2m.cli import main
from cod2m.dataset import load_dataset
from cod2m.experiment import load_results

TINY_TRAINERS = {
    "neat": {"population_size": 6, "generations": 2},
    "fuzzy": {"population_size": 6, "generations": 2},
}


def write_json(path, doc) -> str:
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture(scope="module")
def campaign(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "campaign.txt"
    assert main(["generate", "--out", str(path), "--samples", "16", "--seed", "1"]) == 0
    return str(path)


@pytest.fixture(scope="module")
def models_dir(tmp_path_factory, campaign):
    out = tmp_path_factory.mktemp("models")
    config = write_json(
        tmp_path_factory.mktemp("cfg") / "train.json",
        {"sweep": {"alpha": ["P"], "omega": ["V", "M"]}, **TINY_TRAINERS},
    )
    assert main(["train", "--data", campaign, "--out", str(out), "--config", config]) == 0
    return str(out)


# --- generate ---------------------------------------------------------------


def test_generate_writes_a_loadable_dataset(campaign):
    dataset = load_dataset(campaign)
    assert len(dataset) == 32  # sixteen positions, two days
    assert {len(s.features[k]) for s in dataset.samples for k in s.features} == {4}


def test_generate_accepts_partial_config(tmp_path):
    config = write_json(tmp_path / "gen.json", {"samples_per_day": 5, "seed": 9})
    out = tmp_path / "five.txt"
    assert main(["generate", "--config", config, "--out", str(out)]) == 0
    assert len(load_dataset(str(out))) == 10


def test_generate_is_reproducible(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["generate", "--out", str(a), "--samples", "8", "--seed", "4"]) == 0
    assert main(["generate", "--out", str(b), "--samples", "8", "--seed", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.txt"
    assert main(["generate", "--out", str(c), "--samples", "8", "--seed", "5"]) == 0
    assert a.read_bytes() != c.read_bytes()


# --- train and evaluate --------------------------------------------------------


def test_train_writes_a_manifest(models_dir):
    with open(os.path.join(models_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["format"] == "cod2m-models v1"
    assert sorted(manifest["models"]["beta"]) == ["GP", "IR", "TM", "UV", "VS"]
    assert manifest["models"]["omega_ann"] == {}


def test_evaluate_writes_metric_tables(tmp_path, campaign, models_dir):
    out = tmp_path / "eval"
    assert main(["evaluate", "--data", campaign, "--models", models_dir, "--out", str(out)]) == 0
    lines = (out / "evaluation.csv").read_text().splitlines()
    assert lines[0] == "level,agent,alpha,omega,accuracy,rmse,auc"
    levels = [line.split(",")[0] for line in lines[1:]]
    assert levels == ["beta"] * 5 + ["omega"] * 10  # two omega variants per sensor
    assert (out / "roc_beta_VS.csv").exists()
    assert (out / "roc_omega_GP_P_M.csv").exists()


def test_evaluate_emits_team_row_for_single_variant_sweeps(tmp_path, campaign):
    models = tmp_path / "models"
    config = write_json(
        tmp_path / "train.json", {"sweep": {"omega": ["Bavg"]}, **TINY_TRAINERS}
    )
    assert main(["train", "--data", campaign, "--out", str(models), "--config", config]) == 0
    out = tmp_path / "eval"
    assert main(["evaluate", "--data", campaign, "--models", str(models), "--out", str(out)]) == 0
    lines = (out / "evaluation.csv").read_text().splitlines()
    assert lines[-1].startswith("system,team,-,-,")


# --- study and report ------------------------------------------------------------


def study_doc(**overrides) -> dict:
    doc = {
        "generator": {"samples_per_day": 12, "seed": 2},
        "cases": ["C1"],
        "seeds": [0],
        "sweep": {"alpha": ["P"], "omega": ["V", "Bmdn"]},
        **TINY_TRAINERS,
    }
    doc.update(overrides)
    return doc


def test_study_runs_end_to_end(tmp_path):
    config = write_json(tmp_path / "study.json", study_doc())
    out = tmp_path / "study"
    assert main(["study", "--config", config, "--out", str(out)]) == 0
    assert (out / "dataset.txt").exists()
    results = load_results(str(out / "results.json"))
    assert [(r.case.name, r.seed) for r in results] == [("C1", 0)]
    assert (out / "summary_C1_seed0.csv").exists()
    assert (out / "auc_C1_seed0.csv").exists()


def test_study_reads_an_existing_dataset(tmp_path, campaign):
    doc = study_doc(dataset=campaign)
    doc.pop("generator")
    config = write_json(tmp_path / "study.json", doc)
    out = tmp_path / "study"
    assert main(["study", "--config", config, "--out", str(out)]) == 0
    assert not (out / "dataset.txt").exists()  # nothing was generated
    assert (out / "results.json").exists()


def test_study_cli_overrides(tmp_path):
    config = write_json(tmp_path / "study.json", study_doc())
    out = tmp_path / "study"
    code = main(
        [
            "study", "--config", config, "--out", str(out),
            "--cases", "C2", "--seeds", "5", "--sweep", "omega=M",
        ]
    )
    assert code == 0
    results = load_results(str(out / "results.json"))
    assert [(r.case.name, r.seed) for r in results] == [("C2", 5)]
    assert results[0].best_omega.config.omega == "M"


def test_study_outputs_are_byte_identical_across_runs_and_jobs(tmp_path):
    config = write_json(tmp_path / "study.json", study_doc(seeds=[0, 1]))
    first, second = tmp_path / "one", tmp_path / "two"
    assert main(["study", "--config", config, "--out", str(first)]) == 0
    assert main(["study", "--config", config, "--out", str(second), "--jobs", "2"]) == 0
    names = sorted(os.listdir(first))
    assert names == sorted(os.listdir(second))
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_report_rebuilds_the_same_tables(tmp_path):
    config = write_json(tmp_path / "study.json", study_doc())
    study_out = tmp_path / "study"
    assert main(["study", "--config", config, "--out", str(study_out)]) == 0
    rebuilt = tmp_path / "rebuilt"
    assert main(["report", "--results", str(study_out / "results.json"), "--out", str(rebuilt)]) == 0
    for name in os.listdir(rebuilt):
        assert (rebuilt / name).read_bytes() == (study_out / name).read_bytes()


# --- exit codes --------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["generate"],
        ["study", "--config", "x.json"],
        [],
    ],
)
def test_usage_problems_exit_1(argv, capsys):
    assert main(argv) == 1
    assert "cod2m" in capsys.readouterr().err


def test_bad_study_overrides_exit_1(tmp_path, capsys):
    config = write_json(tmp_path / "study.json", study_doc())
    base = ["study", "--config", config, "--out", str(tmp_path / "out")]
    assert main(base + ["--sweep", "omega"]) == 1
    assert main(base + ["--sweep", "omega=Q"]) == 1
    assert main(base + ["--seeds", "one,two"]) == 1
    assert main(base + ["--cases", "C9"]) == 1
    assert main(base + ["--jobs", "0"]) == 1
    capsys.readouterr()


def test_invalid_log_level_exits_1(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("COD2M_LOG", "banana")
    assert main(["generate", "--out", str(tmp_path / "x.txt")]) == 1
    assert "COD2M_LOG" in capsys.readouterr().err


def test_bad_data_or_config_exits_2(tmp_path, campaign, capsys):
    corrupt = tmp_path / "corrupt.txt"
    corrupt.write_text("not a dataset\n")
    models = tmp_path / "m"
    config = write_json(tmp_path / "t.json", TINY_TRAINERS)
    assert main(["train", "--data", str(corrupt), "--out", str(models), "--config", config]) == 2

    bad_cfg = write_json(tmp_path / "bad.json", {"neat": {"wings": 2}})
    assert main(["train", "--data", campaign, "--out", str(models), "--config", bad_cfg]) == 2

    bad_study = write_json(tmp_path / "study.json", {"cases": ["C1"]})
    assert main(["study", "--config", bad_study, "--out", str(tmp_path / "s")]) == 2
    capsys.readouterr()


def test_missing_manifest_fields_exit_2(tmp_path, campaign, capsys):
    models = tmp_path / "models"
    models.mkdir()
    (models / "manifest.json").write_text(json.dumps({"format": "cod2m-models v1"}))
    code = main(["evaluate", "--data", campaign, "--models", str(models), "--out", str(tmp_path / "e")])
    assert code == 2
    assert "missing field" in capsys.readouterr().err


def test_io_failures_exit_3(tmp_path, campaign, capsys):
    missing_dir = tmp_path / "no" / "such" / "dir" / "out.txt"
    assert main(["generate", "--out", str(missing_dir), "--samples", "4"]) == 3
    assert main(["report", "--results", str(tmp_path / "absent.json"), "--out", str(tmp_path / "r")]) == 3
    capsys.readouterr()
