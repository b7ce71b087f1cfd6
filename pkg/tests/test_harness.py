import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tensorrank.harness.experiments import (
    FIELDS,
    Record,
    run_recovery,
    run_runtime,
    run_stability,
)
from tensorrank.harness.generator import GeneratorConfig, abilities, generate
from tensorrank.harness.report import emit, read_csv, to_csv, to_json, to_svg
from tensorrank.methods import UnknownMethodError
from tensorrank.ranking import is_total_tie

SMALL = GeneratorConfig(L=5, M=60, N_max=8, seeds=(0, 1), tie_pair=None)


# -- generator ----------------------------------------------------------------


def test_generator_is_bit_reproducible():
    config = GeneratorConfig(M=50, N_max=3)
    a, b = generate(config, 7), generate(config, 7)
    assert a.tensor.data.tobytes() == b.tensor.data.tobytes()
    assert not np.array_equal(a.tensor.data, generate(config, 8).tensor.data)


def test_generator_tie_pair():
    theta = abilities(GeneratorConfig())
    assert theta[4] == theta[5]
    assert len(np.unique(theta)) == 10
    assert np.all(np.diff(np.unique(theta)) == pytest.approx(0.25))
    truth = generate(GeneratorConfig(M=10, N_max=1), 0).truth
    values, counts = np.unique(truth, return_counts=True)
    assert counts.tolist().count(2) == 1 and counts.max() == 2


def test_generator_best_beats_worst():
    config = GeneratorConfig(M=500, N_max=8)
    for seed in range(3):
        data = generate(config, seed).tensor.data
        rates = data.mean(axis=(1, 2))
        assert rates[0] > rates[-1]


def test_generator_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(L=1)
    with pytest.raises(ValueError):
        GeneratorConfig(L=4, tie_pair=(4, 5))
    with pytest.raises(ValueError):
        GeneratorConfig(tie_pair=(2, 2))
    c = GeneratorConfig()
    assert GeneratorConfig.from_dict(c.to_dict()) == c


# -- recovery ------------------------------------------------------------------


def test_recovery_on_widely_separated_systems():
    config = GeneratorConfig(L=3, M=200, N_max=8, seeds=(0,), ability_gap=4.0, tie_pair=None)
    report = run_recovery(["avg"], config, budgets=[8])
    (rec,) = report.records
    assert rec.tau_b == 1.0 and rec.mae == 0.0 and rec.top1 == 1.0


def test_recovery_equal_abilities_keep_tau_undefined():
    config = GeneratorConfig(L=3, M=40, N_max=2, seeds=(0,), ability_gap=0.0, tie_pair=None)
    report = run_recovery(["avg", "elo"], config, budgets=[1, 2])
    assert is_total_tie(generate(config, 0).truth)
    assert all(r.status == "ok" and r.tau_b is None for r in report.records)
    assert all(row["tau_b"] is None for row in report.summary())
    assert "--" in to_csv(report.records)


def test_recovery_covers_every_method_and_budget():
    report = run_recovery(["avg", "elo"], SMALL, budgets=[1, 2, 4])
    assert len(report.records) == 2 * 3 * 2
    assert {(r.method, r.N) for r in report.select(method="elo")} == {("elo", n) for n in (1, 2, 4)}
    assert report.mean("avg", 4) is not None


def test_recovery_rejects_bad_input():
    with pytest.raises(UnknownMethodError):
        run_recovery(["nope"], SMALL, budgets=[1])
    with pytest.raises(ValueError):
        run_recovery(["avg"], SMALL, budgets=[16])


def test_failing_cell_is_recorded_not_raised():
    config = GeneratorConfig(L=9, M=20, N_max=1, seeds=(0,), tie_pair=None)
    report = run_recovery(["kemeny_young", "avg"], config, budgets=[1])
    bad = report.select(method="kemeny_young")[0]
    assert bad.status.startswith("error: CapabilityError")
    assert report.select(method="avg")[0].status == "ok"


@pytest.mark.slow
def test_avg_recovery_is_monotone_in_trials():
    report = run_recovery(["avg"])
    means = [report.mean("avg", n) for n in (1, 2, 4, 8, 16, 32)]
    drops = [a - b for a, b in zip(means, means[1:]) if b < a]
    assert len(drops) <= 1 and all(d <= 0.005 for d in drops)


# -- stability -----------------------------------------------------------------


def test_stability_self_reference():
    config = GeneratorConfig(L=5, M=60, N_max=8, seeds=(0, 1, 2), tie_pair=None)
    report = run_stability(["bayes", "mg_pass_at_k"], config, budgets=[1, 2, 8])
    for r in report.select(method="bayes", n=8):
        assert r.tau_b == 1.0 and r.top1 == 1.0
    for r in report.select(method="mg_pass_at_k", n=1):
        assert r.tau_b is None and r.top1 == 0.0
    assert report.config["k"] == 4


def test_stability_rejects_large_budget():
    with pytest.raises(ValueError):
        run_stability(["avg"], SMALL, budgets=[16])


def test_stability_defaults_to_ten_seeds():
    from tensorrank.harness.experiments import STABILITY_CONFIG

    assert STABILITY_CONFIG.seeds == tuple(range(10)) and STABILITY_CONFIG.N_max == 64


# -- runtime -------------------------------------------------------------------


def test_runtime_records_and_guard():
    report = run_runtime(["borda", "kemeny_young"], Ls=[4, 16], Ms=[100], Ns=[1])
    assert len(report.records) == 2 * 2 * 2
    for r in report.select(method="borda"):
        assert r.status == "ok" and 0 <= r.seconds < 1.0
    skipped = report.select(method="kemeny_young", L=16)
    assert [r.replicate for r in skipped] == [1, 2]
    assert all(r.status.startswith("skipped") and r.seconds is None for r in skipped)
    assert all(r.seconds is not None for r in report.select(method="kemeny_young", L=4))


# -- reports -------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_report():
    return run_stability(["avg", "mg_pass_at_k"], SMALL, budgets=[1, 2, 4])


def test_csv_header_and_round_trip(tmp_path, small_report):
    text = to_csv(small_report.records)
    assert text.splitlines()[0] == ",".join(FIELDS)
    assert FIELDS == (
        "experiment", "method", "L", "M", "N", "n", "seed",
        "tau_b", "mae", "top1", "seconds", "replicate", "status",
    )
    (path,) = emit(small_report, tmp_path, ["csv"])
    assert read_csv(path) == small_report.records


def test_runtime_csv_round_trip(tmp_path):
    report = run_runtime(["avg"], Ls=[4], Ms=[100], Ns=[1])
    (path,) = emit(report, tmp_path, ["csv"])
    assert read_csv(path) == report.records


def test_svg_is_well_formed(small_report):
    root = ET.fromstring(to_svg(small_report))
    assert root.tag.endswith("svg")
    text = to_svg(small_report)
    assert "Kendall tau-b" in text and "budget n" in text
    assert to_svg(small_report) == text


def test_json_carries_provenance(small_report):
    doc = json.loads(to_json(small_report))
    assert doc["config"]["generator"]["M"] == 60
    assert len(doc["cells"]) == len(small_report.records)
    for cell in doc["cells"]:
        prov = cell["provenance"]
        assert prov["seed"] in (0, 1)
        assert prov["generator"]["L"] == 5 and prov["first_trials"] == cell["n"]
    assert doc["metadata"]["rank_scheme"] == "fractional"


def test_emit_validation(tmp_path, small_report):
    from tensorrank.harness.experiments import ExperimentReport

    with pytest.raises(ValueError):
        emit(small_report, tmp_path, ["png"])
    with pytest.raises(ValueError):
        emit(ExperimentReport("recovery", [], {}), tmp_path)


def test_read_csv_rejects_foreign_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_record_budget():
    assert Record("recovery", "avg", 3, 4, 8).budget == 8
    assert Record("stability", "avg", 3, 4, 64, n=2).budget == 2
