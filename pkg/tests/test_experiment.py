"""Study harness tests: sweeps, training, evaluation, reports, persistence."""

import dataclasses
import json
import os

import pytest

from cod2m.dataset import SENSOR_ORDER, SensorKind, SplitCase
from cod2m.experiment import (
    ANGLE_CANDIDATES,
    DEFAULT_SWEEP,
    AgentConfig,
    ModelBundle,
    best_scan_angle,
    build_agents,
    child_seed,
    enumerate_configs,
    evaluate,
    load_bundle,
    load_results,
    load_study_config,
    metric_set,
    normalize_sweep,
    report,
    run_study,
    run_unit,
    save_bundle,
    save_results,
    study_config_from_dict,
    train_models,
)
from cod2m.fusion import BetaSet, omega as fusion_omega, system_decision
from cod2m.fuzzyga import FgaConfig
from cod2m.metrics import read_roc_csv
from cod2m.models import compile_network, genome_to_dict
from cod2m.neuroevo import NeatConfig
from cod2m.synthgen import Terrain

from helpers import build_dataset

TINY_NEAT = NeatConfig(population_size=6, generations=2, seed=0)
TINY_FGA = FgaConfig(population_size=6, generations=2, seed=0)


@pytest.fixture(scope="module")
def nf_setup():
    dataset = build_dataset(n_per_day=8, dims=2, seed=2)
    sweep = {"alpha": ("P",), "omega": ("N", "F")}
    bundle = train_models(dataset, sweep, TINY_NEAT, TINY_FGA, seed=5)
    return dataset, sweep, bundle, build_agents(bundle, sweep)


@pytest.fixture(scope="module")
def unit_result():
    dataset = build_dataset(n_per_day=8, dims=2, seed=1)
    sweep = {"alpha": ("P",), "omega": ("V", "M", "Bavg")}
    return run_unit(dataset, SplitCase.C1(), sweep, TINY_NEAT, TINY_FGA, seed=3)


# --- seeding and configuration ---------------------------------------------------


def test_child_seed_separates_streams():
    tags = [f"{group}:{kind.value}" for group in ("beta", "omega-ann") for kind in SENSOR_ORDER]
    derived = {child_seed(7, tag) for tag in tags}
    assert len(derived) == len(tags)
    assert all(0 <= s < 1 << 63 for s in derived)
    assert child_seed(7, "beta:VS") == child_seed(7, "beta:VS")
    assert child_seed(7, "beta:VS") != child_seed(8, "beta:VS")


def test_agent_config_label_and_validation():
    config = AgentConfig(SensorKind.VS, "P", "N", "V")
    assert config.label == "VS:P/N/V"
    with pytest.raises(ValueError, match="alpha"):
        AgentConfig(SensorKind.VS, "X", "N", "V")
    with pytest.raises(ValueError, match="beta"):
        AgentConfig(SensorKind.VS, "P", "F", "V")
    with pytest.raises(ValueError, match="omega"):
        AgentConfig(SensorKind.VS, "P", "N", "avg")


def test_normalize_sweep_defaults_and_merging():
    assert normalize_sweep(None) == DEFAULT_SWEEP
    merged = normalize_sweep({"omega": ("V",)})
    assert merged["omega"] == ("V",)
    assert merged["alpha"] == DEFAULT_SWEEP["alpha"]


@pytest.mark.parametrize(
    "sweep,message",
    [
        ({"gamma": ("N",)}, "unknown sweep level"),
        ({"omega": ()}, "at least one"),
        ({"omega": ("V", "V")}, "repeats"),
        ({"omega": ("Q",)}, "does not accept"),
        ({"beta": ("F",)}, "does not accept"),
    ],
)
def test_normalize_sweep_rejects_bad_levels(sweep, message):
    with pytest.raises(ValueError, match=message):
        normalize_sweep(sweep)


def test_enumerate_configs_order_and_count():
    configs = enumerate_configs()
    assert set(configs) == set(SENSOR_ORDER)
    assert all(len(v) == 6 for v in configs.values())
    full = enumerate_configs({"alpha": ("N", "F", "P", "R")})
    assert all(len(v) == 24 for v in full.values())
    two = enumerate_configs({"alpha": ("P", "R"), "omega": ("N", "V")})
    assert [(c.alpha, c.omega) for c in two[SensorKind.IR]] == [
        ("P", "N"), ("P", "V"), ("R", "N"), ("R", "V"),
    ]


# --- scan-angle supervision ---------------------------------------------------------


def test_best_scan_angle_points_toward_the_object():
    terrain = Terrain(ied_positions=((550.0, 250.0),))
    assert best_scan_angle(terrain, (450.0, 250.0)) == 0.0  # object to the right
    assert best_scan_angle(terrain, (650.0, 250.0)) == 180.0  # object to the left
    # directly under the object: the smallest |cos| reach wins
    assert best_scan_angle(terrain, (550.0, 0.0)) == 90.0


def test_best_scan_angle_breaks_ties_low():
    terrain = Terrain(ied_positions=((525.0, 250.0), (575.0, 250.0)))
    # both extremes land exactly on an object; the tie goes to the lower angle
    assert best_scan_angle(terrain, (550.0, 250.0)) == 0.0


def test_best_scan_angle_is_a_candidate():
    terrain = Terrain(ied_positions=((100.0, 900.0), (600.0, 100.0)))
    for position in [(0.0, 0.0), (300.0, 500.0), (650.0, 1100.0)]:
        assert best_scan_angle(terrain, position) in ANGLE_CANDIDATES


# --- training ------------------------------------------------------------------------


def test_train_models_trains_only_what_the_sweep_needs():
    dataset = build_dataset(n_per_day=4, dims=2, seed=0)
    bundle = train_models(dataset, {"omega": ("V", "M")}, TINY_NEAT, TINY_FGA, seed=1)
    assert set(bundle.beta) == set(SENSOR_ORDER)
    assert bundle.omega_ann == {} and bundle.omega_fuzzy == {}
    assert bundle.alpha_ann == {} and bundle.alpha_fuzzy == {}


def test_train_models_covers_model_backed_levels(nf_setup):
    _, _, bundle, _ = nf_setup
    assert set(bundle.omega_ann) == set(SENSOR_ORDER)
    assert set(bundle.omega_fuzzy) == set(SENSOR_ORDER)


def test_train_models_gives_siblings_distinct_streams(nf_setup):
    _, _, bundle, _ = nf_setup
    dicts = [genome_to_dict(bundle.beta[kind]) for kind in SENSOR_ORDER]
    assert any(d != dicts[0] for d in dicts[1:])
    omega_dicts = [genome_to_dict(bundle.omega_ann[kind]) for kind in SENSOR_ORDER]
    assert any(d != omega_dicts[0] for d in omega_dicts[1:])


def test_train_models_is_deterministic():
    dataset = build_dataset(n_per_day=4, dims=2, seed=3)
    sweep = {"omega": ("V",)}
    a = train_models(dataset, sweep, TINY_NEAT, TINY_FGA, seed=2)
    b = train_models(dataset, sweep, TINY_NEAT, TINY_FGA, seed=2)
    for kind in SENSOR_ORDER:
        assert genome_to_dict(a.beta[kind]) == genome_to_dict(b.beta[kind])


def test_train_models_alpha_levels_default_to_the_standard_terrain():
    dataset = build_dataset(n_per_day=4, dims=2, seed=4)
    bundle = train_models(dataset, {"alpha": ("F",), "omega": ("V",)}, TINY_NEAT, TINY_FGA, seed=0)
    assert set(bundle.alpha_fuzzy) == set(SENSOR_ORDER)
    assert bundle.alpha_ann == {}


def test_build_agents_order_and_binding(nf_setup):
    _, sweep, bundle, agents = nf_setup
    assert len(agents) == 10  # five sensors times two omega methods
    assert [a.config.sensor for a in agents] == [k for k in SENSOR_ORDER for _ in range(2)]
    assert [a.config.omega for a in agents[:2]] == ["N", "F"]
    first = agents[0]
    assert first.alpha_policy.symbol == "P" and first.alpha_policy.angle == 90.0
    assert first.omega_method.model is bundle.omega_ann[SensorKind.VS]
    assert first.beta_model is bundle.beta[SensorKind.VS]


def test_build_agents_requires_local_models(nf_setup):
    _, sweep, bundle, _ = nf_setup
    broken = ModelBundle(0, dict(bundle.beta), dict(bundle.omega_ann), dict(bundle.omega_fuzzy), {}, {})
    del broken.beta[SensorKind.TM]
    with pytest.raises(ValueError, match="missing the TM"):
        build_agents(broken, sweep)


# --- evaluation -----------------------------------------------------------------------


def test_evaluate_rejects_incomplete_teams(nf_setup):
    dataset, _, _, agents = nf_setup
    with pytest.raises(ValueError, match="at least one agent"):
        evaluate([], dataset)
    partial = [a for a in agents if a.config.sensor is not SensorKind.GP]
    with pytest.raises(ValueError, match="five sensors"):
        evaluate(partial, dataset)


def test_evaluate_rejects_conflicting_local_models(nf_setup):
    dataset, _, bundle, agents = nf_setup
    rogue = dataclasses.replace(agents[1], beta_model=bundle.beta[SensorKind.IR])
    with pytest.raises(ValueError, match="disagree"):
        evaluate([agents[0], rogue] + list(agents[2:]), dataset)


def test_evaluate_fast_paths_match_scalar_fusion(nf_setup):
    dataset, _, bundle, agents = nf_setup
    ev = evaluate(agents, dataset)
    nets = {kind: compile_network(bundle.beta[kind]) for kind in SENSOR_ORDER}
    beta_sets = [
        BetaSet(tuple(nets[kind](s.features[kind]) for kind in SENSOR_ORDER))
        for s in dataset.samples
    ]
    for agent, stream in zip(agents, ev.omega_scores):
        expected = [fusion_omega(bs, agent.omega_method) for bs in beta_sets]
        assert stream == pytest.approx(expected, abs=1e-12)


def test_evaluate_exposes_local_scores_per_sensor(nf_setup):
    dataset, _, bundle, agents = nf_setup
    ev = evaluate(agents, dataset)
    assert set(ev.beta_scores) == set(SENSOR_ORDER)
    net = compile_network(bundle.beta[SensorKind.UV])
    expected = [net(s.features[SensorKind.UV]) for s in dataset.samples]
    assert ev.beta_scores[SensorKind.UV] == pytest.approx(expected, abs=0.0)
    assert ev.labels == [s.label for s in dataset.samples]
    assert ev.beta_metrics[SensorKind.UV] == metric_set(expected, ev.labels)


def test_evaluate_team_verdict_only_for_exact_teams(nf_setup):
    dataset, _, _, agents = nf_setup
    assert evaluate(agents, dataset).system_accuracy is None  # ten agents
    team = [a for a in agents if a.config.omega == "N"]
    ev = evaluate(team, dataset)
    hits = 0
    for row, label in enumerate(ev.labels):
        _, _, verdict = system_decision([ev.omega_scores[i][row] for i in range(5)])
        hits += verdict == label
    assert ev.system_accuracy == hits / len(ev.labels)


# --- unit results ------------------------------------------------------------------


def test_run_unit_structure(unit_result):
    result = unit_result
    assert result.case == SplitCase.C1() and result.seed == 3
    assert [a.sensor for a in result.agents] == list(SENSOR_ORDER)
    assert result.best_omega.config.omega in ("V", "M", "Bavg")
    for stage in ("train", "validation"):
        assert len(result.auc_distribution[stage]) == 15  # five sensors, three variants
        assert 0.0 <= result.system_accuracy[stage] <= 1.0


def test_run_unit_best_is_the_highest_validation_accuracy(unit_result):
    result = unit_result
    best_auc_rows = result.auc_distribution["validation"]
    assert result.best_omega.validation.accuracy == max(
        outcome.omega_validation.accuracy for outcome in result.agents
    )
    worst = min(v for *_, v in best_auc_rows)
    assert result.worst_omega.validation.auc == worst


def test_run_unit_rejects_id_leaks(monkeypatch):
    dataset = build_dataset(n_per_day=4, dims=2, seed=0)
    monkeypatch.setattr("cod2m.experiment.split", lambda ds, case: (ds, ds))
    with pytest.raises(ValueError, match="leaked"):
        run_unit(dataset, SplitCase.C1(), {"omega": ("V",)}, TINY_NEAT, TINY_FGA, seed=0)


def test_case_result_round_trips_through_json(unit_result, tmp_path):
    path = tmp_path / "results.json"
    save_results([unit_result], str(path))
    loaded = load_results(str(path))
    assert loaded == [unit_result]
    doc = json.loads(path.read_text())
    assert doc["format"] == "cod2m-study v1"


def test_load_results_rejects_other_files(tmp_path):
    path = tmp_path / "bogus.json"
    path.write_text(json.dumps({"format": "other", "results": []}))
    with pytest.raises(ValueError, match="cod2m-study"):
        load_results(str(path))


# --- study loop -------------------------------------------------------------------


def test_run_study_executes_cases_times_seeds():
    dataset = build_dataset(n_per_day=8, dims=2, seed=6)
    cases = [SplitCase.C1(), SplitCase.C3()]
    results = run_study(dataset, cases, {"omega": ("V",)}, TINY_NEAT, TINY_FGA, seeds=[0, 1])
    assert [(r.case.name, r.seed) for r in results] == [
        ("C1", 0), ("C1", 1), ("C3", 0), ("C3", 1),
    ]


def test_run_study_jobs_do_not_change_results():
    dataset = build_dataset(n_per_day=8, dims=2, seed=7)
    args = (dataset, [SplitCase.C2()], {"omega": ("V", "M")}, TINY_NEAT, TINY_FGA)
    serial = run_study(*args, seeds=[0, 1], jobs=1)
    parallel = run_study(*args, seeds=[0, 1], jobs=2)
    assert serial == parallel


def test_run_study_validates_arguments():
    dataset = build_dataset(n_per_day=4, dims=2, seed=0)
    with pytest.raises(ValueError, match="case"):
        run_study(dataset, [], None, TINY_NEAT, TINY_FGA, seeds=[0])
    with pytest.raises(ValueError, match="seed"):
        run_study(dataset, [SplitCase.C1()], None, TINY_NEAT, TINY_FGA, seeds=[])
    with pytest.raises(ValueError, match="jobs"):
        run_study(dataset, [SplitCase.C1()], None, TINY_NEAT, TINY_FGA, seeds=[0], jobs=0)


# --- report tables ---------------------------------------------------------------------


def test_report_writes_the_expected_tables(unit_result, tmp_path):
    out = tmp_path / "report"
    written = report([unit_result], str(out))
    names = sorted(os.path.basename(p) for p in written)
    assert "summary_C1_seed3.csv" in names
    assert "auc_C1_seed3.csv" in names
    for sensor in SENSOR_ORDER:
        for level in ("beta", "omega"):
            for stage in ("train", "validation"):
                assert f"roc_C1_seed3_{sensor.value}_{level}_{stage}.csv" in names
    assert "roc_C1_seed3_worst_omega_train.csv" in names
    assert "roc_C1_seed3_worst_omega_validation.csv" in names
    assert all(os.path.exists(p) for p in written)


def test_summary_table_flags_the_column_extremes(unit_result, tmp_path):
    out = tmp_path / "report"
    report([unit_result], str(out))
    lines = (out / "summary_C1_seed3.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:4] == ["agent", "level", "alpha", "omega"]
    metric_names = ["train_acc", "train_rmse", "train_auc", "val_acc", "val_rmse", "val_auc"]
    assert header[4:10] == metric_names
    assert header[10:] == [f"{m}_best" for m in metric_names]
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 10
    assert [r[1] for r in rows] == ["beta"] * 5 + ["omega"] * 5
    for j, name in enumerate(metric_names):
        values = [float(r[4 + j]) for r in rows]
        flags = [r[10 + j] for r in rows]
        target = min(values) if name.endswith("rmse") else max(values)
        assert all((flag == "1") == (value == target) for flag, value in zip(flags, values))
        assert "1" in flags


def test_auc_table_lists_every_variant(unit_result, tmp_path):
    out = tmp_path / "report"
    report([unit_result], str(out))
    lines = (out / "auc_C1_seed3.csv").read_text().splitlines()
    assert lines[0] == "stage,agent,alpha,omega,auc"
    assert len(lines) == 1 + 2 * 15
    stages = {line.split(",")[0] for line in lines[1:]}
    assert stages == {"train", "validation"}


def test_report_roc_files_parse_back(unit_result, tmp_path):
    out = tmp_path / "report"
    report([unit_result], str(out))
    curve = read_roc_csv(str(out / "roc_C1_seed3_VS_beta_train.csv"))
    assert curve == unit_result.agents[0].beta_train.roc


def test_report_is_reproducible(unit_result, tmp_path):
    first = tmp_path / "one"
    second = tmp_path / "two"
    report([unit_result], str(first))
    report([unit_result], str(second))
    for name in os.listdir(first):
        assert (first / name).read_bytes() == (second / name).read_bytes()


# --- study configuration -----------------------------------------------------------


def test_study_config_minimal_generator():
    config = study_config_from_dict({"generator": {}})
    assert config.generator is not None and config.dataset_path is None
    assert [c.name for c in config.cases] == ["C1", "C2", "C3"]
    assert config.cases[2].region_boundary == 550.0
    assert config.seeds == (0,)
    assert config.sweep == DEFAULT_SWEEP


def test_study_config_dataset_variant(tmp_path):
    config = study_config_from_dict({"dataset": "campaign.txt", "seeds": [3, 4]})
    assert config.dataset_path == "campaign.txt"
    assert config.generator is None
    assert config.seeds == (3, 4)


def test_study_config_tuple_coercion_and_boundary():
    config = study_config_from_dict(
        {
            "generator": {},
            "cases": ["C3"],
            "region_boundary": 700.0,
            "neat": {"compatibility_coeffs": [1.0, 1.0, 0.4], "population_size": 10},
            "fuzzy": {"crossover_weights": [1, 1, 1, 1]},
        }
    )
    assert config.cases == (SplitCase.C3(700.0),)
    assert config.neat.population_size == 10
    assert config.neat.compatibility_coeffs == (1.0, 1.0, 0.4)
    assert config.fuzzy.crossover_weights == (1, 1, 1, 1)


@pytest.mark.parametrize(
    "doc,message",
    [
        ({}, "exactly one of dataset/generator"),
        ({"dataset": "a", "generator": {}}, "exactly one of dataset/generator"),
        ({"dataset": ""}, "non-empty path"),
        ({"generator": {}, "voodoo": 1}, "unknown fields"),
        ({"generator": {}, "cases": []}, "at least one split case"),
        ({"generator": {}, "seeds": []}, "at least one seed"),
        ({"generator": {}, "seeds": [1, 1]}, "distinct"),
        ({"generator": {}, "neat": {"pop": 3}}, "neat configuration has unknown"),
        ({"generator": {}, "fuzzy": {"mu": 3}}, "fuzzy configuration has unknown"),
    ],
)
def test_study_config_rejects_malformed_documents(doc, message):
    with pytest.raises(ValueError, match=message):
        study_config_from_dict(doc)


def test_load_study_config_reports_invalid_json(tmp_path):
    path = tmp_path / "study.json"
    path.write_text("{nope")
    with pytest.raises(ValueError, match="invalid JSON"):
        load_study_config(str(path))


# --- model bundle persistence ---------------------------------------------------------


def test_bundle_round_trip(nf_setup, tmp_path):
    _, sweep, bundle, _ = nf_setup
    out = tmp_path / "models"
    manifest_path = save_bundle(bundle, sweep, str(out))
    assert os.path.basename(manifest_path) == "manifest.json"
    loaded, loaded_sweep = load_bundle(str(out))
    assert loaded_sweep == normalize_sweep(sweep)
    assert loaded.seed == bundle.seed
    for kind in SENSOR_ORDER:
        assert genome_to_dict(loaded.beta[kind]) == genome_to_dict(bundle.beta[kind])
        assert genome_to_dict(loaded.omega_ann[kind]) == genome_to_dict(bundle.omega_ann[kind])
        assert loaded.omega_fuzzy[kind] == bundle.omega_fuzzy[kind]
    assert loaded.alpha_ann == {} and loaded.alpha_fuzzy == {}


def test_bundle_agents_predict_identically(nf_setup, tmp_path):
    dataset, sweep, bundle, agents = nf_setup
    out = tmp_path / "models"
    save_bundle(bundle, sweep, str(out))
    loaded, loaded_sweep = load_bundle(str(out))
    reloaded = build_agents(loaded, loaded_sweep)
    before = evaluate(agents, dataset)
    after = evaluate(reloaded, dataset)
    assert before.omega_scores == after.omega_scores


def test_load_bundle_rejects_other_manifests(tmp_path):
    out = tmp_path / "models"
    os.makedirs(out)
    (out / "manifest.json").write_text(json.dumps({"format": "zip"}))
    with pytest.raises(ValueError, match="cod2m-models"):
        load_bundle(str(out))
