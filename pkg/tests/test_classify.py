import pytest

from pplcheck.classify import (
    GridSearch,
    MajorityBaseline,
    ThresholdClassifier,
    exact_candidates,
    fit_threshold,
)
from pplcheck.errors import ProvenanceError, ValidationError

from conftest import S, U


def test_two_shot_worked_example():
    clf = fit_threshold([(23.03, S), (826.70, U)])
    assert clf.threshold == pytest.approx((23.03 + 826.70) / 2, abs=1e-9)
    assert clf.fit_report.objective_value == 1.0
    assert clf.fit_report.shot_count == 2


def test_interleaved_labels_best_accuracy():
    clf = fit_threshold([(10.0, S), (20.0, U), (30.0, S), (40.0, U)], objective="accuracy")
    assert clf.fit_report.objective_value == pytest.approx(0.75)
    # 0.75 is reachable at both 15 and 35 with equal macro F1; smaller wins
    assert clf.threshold == pytest.approx(15.0)


def test_secondary_metric_breaks_objective_ties():
    # accuracy 3/4 at three cuts; only the cut at 25 also gets the best
    # macro F1, so the tie must resolve there rather than at the smallest
    # threshold.
    pairs = [(10.0, U), (20.0, S), (30.0, U), (40.0, U)]
    clf = fit_threshold(pairs, objective="accuracy")
    assert clf.fit_report.objective_value == pytest.approx(0.75)
    assert clf.threshold == pytest.approx(25.0)
    assert clf.fit_report.secondary == "f1_macro"


def test_decision_rule_is_strictly_below():
    clf = fit_threshold([(10.0, S), (20.0, U)])
    th = clf.threshold
    assert clf.predict_one(th - 1e-9) is S
    assert clf.predict_one(th) is U
    assert clf.predict_one(th + 1e-9) is U


def test_exact_candidates_cover_degenerate_labelings():
    cands = exact_candidates([5.0])
    assert cands == pytest.approx([5.0 - 5e-6, 5.0 + 5e-6])
    cands = exact_candidates([1.0, 3.0, 3.0, 9.0])
    assert cands[1:3] == pytest.approx([2.0, 6.0])
    assert cands[0] < 1.0 and cands[-1] > 9.0


def test_single_class_shots_fit_degenerate_threshold():
    all_sup = fit_threshold([(10.0, S), (50.0, S)])
    assert all(all_sup.predict_one(p) is S for p in (10.0, 50.0))
    all_unsup = fit_threshold([(10.0, U), (50.0, U)])
    assert all(all_unsup.predict_one(p) is U for p in (10.0, 50.0))


def test_grid_search_candidates_are_inclusive():
    grid = GridSearch(0.0, 1000.0, 1.0)
    cands = grid.candidates()
    assert len(cands) == 1001
    assert cands[0] == 0.0 and cands[-1] == 1000.0


def test_grid_search_fit_picks_smallest_perfect_threshold():
    clf = fit_threshold([(23.03, S), (826.70, U)], grid=GridSearch(0.0, 1000.0, 1.0))
    assert clf.fit_report.objective_value == 1.0
    assert clf.threshold == 24.0
    assert clf.search == {"kind": "grid", "lo": 0.0, "hi": 1000.0, "step": 1.0}


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSearch(0.0, 10.0, 0.0)
    with pytest.raises(ValidationError):
        GridSearch(10.0, 0.0, 1.0)


def test_fit_validation():
    with pytest.raises(ValidationError):
        fit_threshold([])
    with pytest.raises(ValidationError):
        fit_threshold([(10.0, S)], objective="recall")
    with pytest.raises(ValidationError):
        fit_threshold([(-3.0, S)])
    with pytest.raises(ValidationError):
        fit_threshold([(float("inf"), S)])


def test_provenance_guard():
    clf = fit_threshold([(10.0, S), (20.0, U)], provenance_hash="h1")
    assert clf.predict([5.0], provenance_hash="h1") == [S]
    with pytest.raises(ProvenanceError):
        clf.predict([5.0], provenance_hash="h2")
    with pytest.raises(ProvenanceError):
        clf.predict([5.0])
    unhashed = fit_threshold([(10.0, S), (20.0, U)])
    assert unhashed.predict([5.0]) == [S]


def test_save_load_round_trip(tmp_path):
    clf = fit_threshold([(10.0, S), (20.0, U)], seed=42, provenance_hash="h1")
    path = tmp_path / "clf.json"
    clf.save(path)
    loaded = ThresholdClassifier.load(path)
    assert loaded == clf


def test_positive_scaling_preserves_shot_predictions():
    # scale by powers of two so the arithmetic is exact
    pairs = [(12.5, S), (40.0, U), (33.25, S), (900.125, U), (7.0, S)]
    base = fit_threshold(pairs)
    base_preds = [base.predict_one(p) for p, _ in pairs]
    for scale in (0.5, 2.0, 4.0, 1024.0):
        scaled = fit_threshold([(p * scale, lab) for p, lab in pairs])
        assert [scaled.predict_one(p * scale) for p, _ in pairs] == base_preds
        assert scaled.fit_report.objective_value == base.fit_report.objective_value


def test_majority_baseline():
    assert MajorityBaseline.fit([S, S, U]).label is S
    assert MajorityBaseline.fit([U, U, S]).label is U
    # ties break toward Unsupported
    assert MajorityBaseline.fit([S, U]).label is U
    assert MajorityBaseline.fit([U, U]).predict(3) == [U, U, U]
    with pytest.raises(ValidationError):
        MajorityBaseline.fit([])
