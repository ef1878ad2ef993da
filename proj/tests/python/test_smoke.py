"""Python binding smoke tests.

Runs against the installed wheel (``import fraudkit``) or, under ctest,
against the in-tree extension module on PYTHONPATH.
"""

import math
import os

import pytest

try:
    import fraudkit as fk
except ImportError:
    import _core as fk  # in-tree build


COVID = [41 / 3e6, 316 / 3e6, 1876 / 3e6, 3185 / 3e6, 10038 / 3e6, 37070 / 3e6]
FRAUD = [30 / 487, 95 / 1389, 43 / 505, 98 / 991, 167 / 1404, 192 / 1375]


def data_path(name):
    base = os.environ.get("FRAUDKIT_DATA_DIR")
    if not base:
        pytest.skip("FRAUDKIT_DATA_DIR not set")
    return os.path.join(base, name)


def test_version_string():
    assert fk.__version__


def test_pearson_matches_published_value():
    assert abs(fk.pearson(COVID, FRAUD) - 0.8626) <= 0.003


def test_regressions_match_published_values():
    lin = fk.fit_linear(COVID, FRAUD)
    assert abs(lin.slope - 5.4124) <= 0.01
    assert abs(lin.intercept - 0.0796) <= 0.0005
    log = fk.fit_logarithmic(COVID, FRAUD)
    assert abs(log.slope - 0.0118) <= 0.0002
    assert log.r_squared > lin.r_squared
    assert abs(log.predict(COVID[0]) * 100 - 5.10) <= 0.05


def test_residuals_sum_to_zero():
    fit = fk.fit_linear(COVID, FRAUD)
    res = fk.residuals(fit, COVID, FRAUD)
    assert abs(sum(res)) < 1e-12


def test_descriptive_stats():
    stats = fk.descriptive_stats(COVID)
    assert stats.count == 6
    assert abs(stats.mean - 0.002918111) < 1e-6
    assert abs(stats.sample_variance - 2.2864e-05) < 1e-9


def test_pearson_rejects_constant_series():
    with pytest.raises(RuntimeError):
        fk.pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_metrics():
    scores = [0.9, 0.8, 0.4, 0.1]
    labels = [1, 1, 0, 0]
    assert fk.auc(scores, labels) == 1.0
    points, thresholds = fk.roc_curve(scores, labels)
    assert points[0] == (0.0, 0.0)
    assert points[-1] == (1.0, 1.0)
    counts = fk.confusion(scores, labels, 0.5)
    assert counts["tp"] == 2 and counts["tn"] == 2
    assert fk.f1_score(2, 1, 0, 1) == pytest.approx(2 / 3)


def test_gbm_train_and_predict():
    rows = [[x / 50.0 - 1.0] for x in range(100)]
    labels = [1 if row[0] > 0 else 0 for row in rows]
    params = fk.GbmParams()
    params.n_trees = 30
    params.min_leaf = 5
    model = fk.fit_gbm(rows, labels, params)
    assert model.predict_proba([0.8]) > 0.9
    assert model.predict_proba([-0.8]) < 0.1
    losses = model.stage_losses
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_gbm_save_load_round_trip(tmp_path):
    rows = [[float(i % 7), float(i % 3)] for i in range(60)]
    labels = [1 if i % 7 > 3 else 0 for i in range(60)]
    params = fk.GbmParams()
    params.n_trees = 10
    params.min_leaf = 4
    model = fk.fit_gbm(rows, labels, params)
    path = str(tmp_path / "model.json")
    model.save(path)
    loaded = fk.BoostedModel.load(path)
    for row in rows[:10]:
        assert loaded.predict_proba(row) == model.predict_proba(row)


def test_train_test_split_is_stratified():
    rows = [[float(i)] for i in range(100)]
    labels = [1] * 50 + [0] * 50
    (train_rows, train_labels), (test_rows, test_labels) = fk.train_test_split(
        rows, labels, 0.7, 42
    )
    assert len(train_rows) == 70 and len(test_rows) == 30
    assert sum(train_labels) == 35


def test_builtin_rules_catalog():
    rules = fk.builtin_rules()
    ids = {r["id"] for r in rules}
    assert {"late_submission", "stale_reject", "exgratia_threshold",
            "duplicate_package"} <= ids
    late = next(r for r in rules if r["id"] == "late_submission")
    assert late["category"] == "process"
    assert "days_between" in late["source"]


def test_fixture_pipeline_end_to_end():
    claims_path = data_path("reference_claims.csv")
    records, issues = fk.load_claims(claims_path)
    assert len(records) == 7367
    assert not issues

    series = fk.monthly_series(
        claims_path, data_path("reference_covid.csv"), "district_a", 3_000_000,
        "2019-08", "2020-08"
    )
    assert len(series) == 13
    aug = series[-1]
    assert aug["month"] == "2020-08"
    assert aug["covid_cases"] == 37070
    assert round(aug["fraud_rate"] * 100, 2) == 13.96


def test_triggers_on_fixture(tmp_path):
    claims = tmp_path / "claims.csv"
    claims.write_text(
        "claim_id,claim_reported_date,fraud_status,discharge_date,claim_raised_date\n"
        "C1,2020-05-20,unknown,2020-05-01,2020-05-20\n"
        "C2,2020-05-21,unknown,2020-05-10,2020-05-12\n"
    )
    hits = fk.evaluate_triggers(str(claims))
    assert ("C1", "late_submission", "19 days") in hits
    assert all(claim != "C2" for claim, _, _ in hits)


def test_synthetic_generation(tmp_path):
    config = tmp_path / "synth.cfg"
    config.write_text(
        "seed = 3\nregion = r\npopulation = 3000000\n"
        "from = 2020-01\nto = 2020-02\n"
        "claims.per_month = 40\nclaims.base_fraud = 0.1\n"
    )
    out_dir = tmp_path / "corpus"
    count = fk.generate_synthetic(str(config), str(out_dir))
    assert count == 80
    assert (out_dir / "claims.csv").exists()
    assert (out_dir / "covid.csv").exists()
    assert (out_dir / "ground_truth.csv").exists()
