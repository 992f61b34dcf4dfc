"""
Tests for folds, metrics, significance, result tables, experiments and prediction.
"""

import io
from collections import Counter
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from src.corpus.models import Dialog, Segment, TagsetVariant, build_corpus
from src.eval.experiment import (
    CASCADE_SUBSETS,
    ExperimentSpec,
    cascade_experiment,
    cross_validate,
    fit_model,
    influence_experiment,
    split_halves,
)
from src.eval.folds import FoldError, Granularity, make_folds
from src.eval.metrics import CVResult, ExperimentError, accuracy, mean_and_pool
from src.eval.prediction import (
    check_compatible,
    model_meta,
    predict_corpus,
    prediction_accuracy,
)
from src.eval.significance import wilcoxon
from src.eval.synthetic import (
    generate_markov_corpus,
    markov_bayes_rates,
    stationary_distribution,
    transition_matrix,
)
from src.eval.tables import ResultTable, read_result_csv, write_confusion
from src.features.vectorizer import (
    NO_CONTEXT,
    ContextKind,
    ContextMode,
    FeatureConfig,
    LabelSource,
    SampleBuilder,
)
from src.svm.solver import SolverParams

pytestmark = pytest.mark.unit

LABELS = ContextMode(ContextKind.LABELS)
TAGGED = ContextMode(ContextKind.TAGGED)
UNTAGGED = ContextMode(ContextKind.UNTAGGED)
FAST = SolverParams(cost=0.1, stop_tol=0.01, max_epochs=200, seed=1)


def make_result(correct, total):
    """CV result over two labels with the given per-fold counts"""
    c, t = sum(correct), sum(total)
    return CVResult(
        labels=("a", "b"),
        fold_correct=tuple(correct),
        fold_total=tuple(total),
        confusion=np.array([[c, 0], [t - c, 0]]),
    )


def exact_signed_rank(differences):
    """
    W and two-sided p for exact rational differences, counting every sign
    pattern of the doubled average ranks.
    """
    d = [x for x in differences if x != 0]
    ordered = sorted(abs(x) for x in d)
    doubled_rank = {}
    start = 0
    while start < len(ordered):
        end = start
        while end + 1 < len(ordered) and ordered[end + 1] == ordered[start]:
            end += 1
        doubled_rank[ordered[start]] = start + end + 2
        start = end + 1
    ranks = [doubled_rank[abs(x)] for x in d]
    total = sum(ranks)
    w2 = sum(r for r, x in zip(ranks, d) if x > 0)

    patterns = Counter({0: 1})
    for rank in ranks:
        shifted = Counter({s + rank: c for s, c in patterns.items()})
        patterns = patterns + shifted
    extreme = sum(c for s, c in patterns.items() if abs(2 * s - total) >= abs(2 * w2 - total))
    return Fraction(w2, 2), Fraction(extreme, 2 ** len(d))


def brute_force_p(a, b):
    """Two-sided signed-rank p-value of decimal inputs by listing every sign pattern"""
    return float(exact_signed_rank([Fraction(repr(x)) - Fraction(repr(y)) for x, y in zip(a, b)])[1])


@pytest.fixture
def spec(markov_corpus):
    return ExperimentSpec(corpus=markov_corpus, solver=FAST, k=3, seed=5, n_prev_values=(0, 1))


class TestFolds:
    """Test seeded fold assignment"""

    def test_dialog_folds(self, markov_corpus):
        folds = make_folds(markov_corpus, k=3, seed=1)
        assert folds.sizes() == [4, 4, 4]
        assert sorted(unit for f in range(3) for unit in folds.units(f)) == [
            d.id for d in markov_corpus.dialogs
        ]

    def test_deterministic(self, markov_corpus):
        assert make_folds(markov_corpus, 3, seed=1).assignment == make_folds(markov_corpus, 3, seed=1).assignment
        assert make_folds(markov_corpus, 3, seed=1).assignment != make_folds(markov_corpus, 3, seed=2).assignment

    def test_whole_dialogs_share_a_fold(self, markov_corpus):
        folds = make_folds(markov_corpus, 3, seed=1)
        for dialog in markov_corpus.dialogs:
            assert {folds.fold_of_key(s.key) for s in dialog.segments} == {folds.assignment[dialog.id]}

    def test_segment_folds(self, markov_corpus):
        folds = make_folds(markov_corpus, 3, seed=1, granularity=Granularity.SEGMENT)
        assert folds.sizes() == [80, 80, 80]
        segment = markov_corpus.dialogs[0].segments[4]
        assert folds.fold_of_key(segment.key) == folds.assignment[segment.key]

    def test_bad_k(self, markov_corpus):
        with pytest.raises(FoldError):
            make_folds(markov_corpus, k=1)
        with pytest.raises(FoldError):
            make_folds(markov_corpus, k=13)


class TestMetrics:
    """Test accuracy summaries"""

    def test_accuracy(self):
        assert accuracy(np.array([[3, 1], [0, 4]])) == pytest.approx(7 / 8)
        with pytest.raises(ExperimentError):
            accuracy(np.zeros((2, 2)))

    def test_mean_and_pool(self):
        summary = mean_and_pool([1, 3], [2, 4])
        assert summary.mean == pytest.approx(0.625)
        assert summary.pooled == pytest.approx(4 / 6)
        assert summary.stdev > 0
        with pytest.raises(ExperimentError):
            mean_and_pool([1], [0])
        with pytest.raises(ExperimentError):
            mean_and_pool([], [])

    def test_cv_result(self):
        result = make_result([1, 2], [2, 2])
        assert result.k == 2
        assert result.per_fold_accuracy == (0.5, 1.0)
        assert result.mean_accuracy == pytest.approx(0.75)
        assert result.pooled_accuracy == pytest.approx(0.75)

    def test_cv_result_inconsistent(self):
        with pytest.raises(ExperimentError):
            CVResult(("a", "b"), (1,), (2,), np.array([[2, 0], [0, 0]]))
        with pytest.raises(ExperimentError):
            CVResult(("a",), (1,), (1,), np.eye(2, dtype=int))


class TestWilcoxon:
    """Test the signed-rank test"""

    @pytest.mark.parametrize(
        "a,b",
        [
            ([0.61, 0.64, 0.58, 0.70, 0.66], [0.60, 0.65, 0.55, 0.69, 0.60]),
            ([0.5, 0.6, 0.7, 0.8, 0.9, 0.4, 0.45, 0.55], [0.52, 0.58, 0.69, 0.85, 0.88, 0.41, 0.40, 0.55]),
            ([1, 2, 3, 4, 5, 6, 7, 8, 9, 10], [2, 1, 5, 3, 4, 8, 6, 7, 12, 9]),
        ],
    )
    def test_exact_matches_enumeration(self, a, b):
        result = wilcoxon(a, b)
        assert result.method == "exact"
        assert result.p_value == pytest.approx(brute_force_p(a, b))

    def test_all_positive(self):
        """Six equal positive differences: only 2 of 64 patterns are as extreme"""
        result = wilcoxon([0.9] * 6, [0.8] * 6)
        assert result.n_effective == 6
        assert result.w == pytest.approx(21.0)
        assert result.p_value == pytest.approx(2 / 64)
        assert result.significant

    def test_identical_samples(self):
        result = wilcoxon([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
        assert result.n_effective == 0
        assert result.p_value == 1.0
        assert not result.significant

    def test_zero_differences_dropped(self):
        assert wilcoxon([1, 2, 3], [1, 1, 1]).n_effective == 2

    def test_symmetric(self):
        a, b = [0.1, 0.4, 0.35, 0.8], [0.2, 0.3, 0.3, 0.5]
        assert wilcoxon(a, b).p_value == pytest.approx(wilcoxon(b, a).p_value)

    def test_normal_approximation(self):
        a = list(range(1, 16))
        result = wilcoxon(a, [0] * 15)
        assert result.method == "normal-approximation"
        z = (120 - 60 - 0.5) / np.sqrt(15 * 16 * 31 / 24)
        assert result.p_value == pytest.approx(2 * norm.sf(z))

    def test_bad_input(self):
        with pytest.raises(ExperimentError):
            wilcoxon([1, 2], [1])
        with pytest.raises(ExperimentError):
            wilcoxon([1], [2])

    def test_tied_accuracy_differences(self):
        """Differences equal as fractions share one average rank"""
        correct_a = [69, 64, 84, 63, 79, 85, 68, 89, 77, 82]
        correct_b = [69, 69, 74, 73, 69, 80, 58, 89, 72, 92]
        result = wilcoxon([c / 100 for c in correct_a], [c / 100 for c in correct_b])
        assert result.n_effective == 8
        assert result.w == 22.0
        assert result.p_value == pytest.approx(176 / 256, abs=1e-12)

    def test_float_noise_is_not_a_difference(self):
        assert wilcoxon([0.1 + 0.2, 0.5], [0.3, 0.4]).n_effective == 1

    def test_random_fold_accuracies_match_exact_enumeration(self):
        """500 seeded paired samples of up to 12 folds, with ties and zeros"""
        rng = np.random.default_rng(2024)
        for case in range(500):
            n = int(rng.integers(2, 13))
            total = int(rng.integers(20, 200))
            correct_a = rng.integers(0, total + 1, n)
            correct_b = np.clip(correct_a + rng.integers(-4, 5, n), 0, total)
            a = [int(c) / total for c in correct_a]
            b = [int(c) / total for c in correct_b]

            w, p = exact_signed_rank([Fraction(int(x) - int(y), total) for x, y in zip(correct_a, correct_b)])
            result = wilcoxon(a, b)
            assert result.method == "exact", case
            assert result.w == float(w), case
            assert abs(result.p_value - float(p)) <= 1e-12, case
            assert wilcoxon(b, a).p_value == result.p_value, case


class TestResultTable:
    """Test result grids and their files"""

    @pytest.fixture
    def table(self):
        table = ResultTable(row_names=["untagged", "labels"], n_prev_values=[0, 1])
        table.add("untagged", 0, make_result([1, 2], [2, 2]))
        table.add("untagged", 1, make_result([2, 2], [2, 2]))
        table.add("labels", 0, make_result([1, 2], [2, 2]))
        table.add("labels", 1, make_result([1, 1], [2, 4]))
        return table

    def test_grid(self, table):
        assert table.complete
        assert len(table) == 4
        with pytest.raises(ExperimentError):
            table.add("tagged", 0, make_result([1], [1]))
        with pytest.raises(ExperimentError):
            ResultTable(["x"], [0]).cell("x", 0)

    def test_csv_round_trip(self, table):
        out = io.StringIO()
        table.write_csv(out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "mode,n_prev,fold,accuracy"
        assert lines[1] == "untagged,0,0,0.5"
        assert len(lines) == 9
        cells = read_result_csv(io.StringIO(out.getvalue()))
        assert cells[("labels", 1)] == [0.5, 0.25]

    def test_bad_csv(self):
        with pytest.raises(ExperimentError):
            read_result_csv(io.StringIO("a,b\n"))
        with pytest.raises(ExperimentError):
            read_result_csv(io.StringIO("mode,n_prev,fold,accuracy\nx,one,0,0.5\n"))

    def test_markdown(self, table):
        from src.eval.significance import SignificanceResult

        table.significance[("untagged", 1)] = SignificanceResult(w=3.0, n_effective=2, p_value=0.01, method="exact")
        text = table.to_markdown(title="Influence")
        assert text.startswith("## Influence\n")
        assert "| Context | 0 | 1 |" in text
        assert "| untagged | 75.00 | 100.00* |" in text
        assert "| labels | 75.00 | 37.50 |" in text
        # pooled grid carries no marks
        assert "| untagged | 75.00 | 100.00 |" in text

    def test_confusion(self):
        out = io.StringIO()
        write_confusion(make_result([1, 2], [2, 2]), out)
        assert out.getvalue() == "gold\\predicted,a,b\na,3,0\nb,1,0\n"


class TestExperimentSpec:
    """Test ExperimentSpec checks"""

    def test_invalid(self, markov_corpus):
        with pytest.raises(ExperimentError):
            ExperimentSpec(corpus=markov_corpus, n_prev_values=(6,))
        with pytest.raises(ExperimentError):
            ExperimentSpec(corpus=markov_corpus, dictionary_scope="shared")
        with pytest.raises(ExperimentError):
            ExperimentSpec(corpus=markov_corpus, jobs=0)

    def test_target_speakers(self, markov_corpus):
        spec = ExperimentSpec(corpus=markov_corpus, target_speakers=("A",))
        assert spec.prepared.n_targets == 120
        assert len(spec.prepared) == 240


class TestCrossValidate:
    """Test cross-validation of single cells"""

    def test_no_context(self, spec):
        result = cross_validate(spec, NO_CONTEXT, 0)
        assert result.k == 3
        assert sum(result.fold_total) == 240
        assert set(result.labels) <= {"l0", "l1", "l2", "l3"}
        assert 0.0 < result.mean_accuracy <= 1.0

    def test_label_context_helps(self, spec):
        """The previous label carries most of the signal in a Markov corpus"""
        plain = cross_validate(spec, NO_CONTEXT, 0)
        with_labels = cross_validate(spec, LABELS, 1)
        assert with_labels.mean_accuracy > plain.mean_accuracy + 0.1

    def test_deterministic_and_thread_safe(self, spec):
        serial = cross_validate(spec, TAGGED, 2)
        threaded = cross_validate(replace(spec, jobs=3), TAGGED, 2)
        assert serial.fold_correct == threaded.fold_correct
        assert np.array_equal(serial.confusion, threaded.confusion)

    def test_global_dictionary(self, spec):
        result = cross_validate(replace(spec, dictionary_scope="global"), LABELS, 1)
        assert sum(result.fold_total) == 240

    def test_target_speakers(self, spec):
        result = cross_validate(replace(spec, target_speakers=("A",)), LABELS, 1)
        assert sum(result.fold_total) == 120

    def test_segment_granularity(self, spec):
        result = cross_validate(replace(spec, granularity=Granularity.SEGMENT), NO_CONTEXT, 0)
        assert result.fold_total == (80, 80, 80)


class TestInfluenceExperiment:
    """Test the context-influence grid"""

    def test_grid(self, spec):
        table = influence_experiment(replace(spec, modes=(TAGGED, LABELS)))
        assert table.row_names == ["tagged", "labels"]
        assert table.complete
        # one shared no-context run
        assert table.cell("tagged", 0) is table.cell("labels", 0)
        assert set(table.significance) == {("tagged", 1), ("labels", 1)}

    def test_rejects_predicted_and_none(self, spec):
        with pytest.raises(ExperimentError):
            influence_experiment(replace(spec, modes=(ContextMode(ContextKind.LABELS, LabelSource.PREDICTED),)))
        with pytest.raises(ExperimentError):
            influence_experiment(replace(spec, modes=(NO_CONTEXT,)))


class TestCascadeExperiment:
    """Test the predicted-label context experiment"""

    def test_split_halves(self, markov_corpus):
        first, second = split_halves(markov_corpus)
        assert [d.id for d in first.dialogs] == [f"m{i:04d}" for i in range(6)]
        assert [d.id for d in second.dialogs] == [f"m{i:04d}" for i in range(6, 12)]
        with pytest.raises(ExperimentError):
            split_halves(markov_corpus.subset(["m0000"]))

    def test_cascade(self, spec):
        result = cascade_experiment(spec)
        assert set(result.label_accuracy) == set(CASCADE_SUBSETS)
        assert all(0.0 <= value <= 1.0 for value in result.label_accuracy.values())
        assert result.table.row_names == [
            "predicted-second-half", "predicted-whole", "predicted-first-half", "labels", "tagged",
        ]
        assert result.table.complete
        for stream in result.predicted_labels.values():
            assert len(stream) == 120
            assert all(key[0] >= "m0006" for key in stream)
        assert sum(result.table.cell("labels", 1).fold_total) == 120

    def test_manual_row_matches_cross_validation(self, spec):
        """The reference row is plain cross-validation on the second half"""
        result = cascade_experiment(spec)
        _, second = split_halves(spec.corpus)
        second_spec = replace(spec, corpus=second)
        direct = cross_validate(second_spec, LABELS, 1)
        cell = result.table.cell("labels", 1)
        assert cell.fold_correct == direct.fold_correct
        assert np.array_equal(cell.confusion, direct.confusion)

        gold = {s.key: s.label for s in second.segments()}
        predicted_mode = ContextMode(ContextKind.LABELS, LabelSource.PREDICTED)
        fed = cross_validate(second_spec, predicted_mode, 1, context_labels=gold)
        assert fed.fold_correct == direct.fold_correct


class TestPrediction:
    """Test labelling a corpus with a trained model"""

    @pytest.fixture
    def label_model(self, markov_corpus):
        samples = SampleBuilder(markov_corpus).build(LABELS, 1)
        return fit_model(
            samples,
            markov_corpus.present_labels(),
            FAST,
            meta=model_meta(markov_corpus, FeatureConfig(), LABELS, 1),
        )

    def test_offline(self, label_model, markov_corpus):
        predictions = predict_corpus(label_model, markov_corpus)
        assert [p.segment.key for p in predictions] == [s.key for s in markov_corpus.targets()]
        assert prediction_accuracy(predictions) > 0.6

    def test_online(self, label_model, markov_corpus):
        offline = predict_corpus(label_model, markov_corpus)
        online = predict_corpus(label_model, markov_corpus, online=True)
        assert len(online) == len(offline)
        assert {p.label for p in online} <= set(label_model.labels)
        # first segments have only padding as context either way
        firsts = [i for i, p in enumerate(offline) if p.segment.index == 0]
        assert [online[i].label for i in firsts] == [offline[i].label for i in firsts]

    def test_no_context_model_ignores_online(self, markov_corpus):
        samples = SampleBuilder(markov_corpus).build(NO_CONTEXT, 0)
        model = fit_model(
            samples, markov_corpus.present_labels(), FAST,
            meta=model_meta(markov_corpus, FeatureConfig(), NO_CONTEXT, 0),
        )
        assert predict_corpus(model, markov_corpus) == predict_corpus(model, markov_corpus, online=True)

    def test_unknown_labels(self, label_model):
        segment = Segment("x", "A", 0, "w1 w2", "zz")
        corpus = build_corpus([Dialog("x", (segment,))], TagsetVariant.ISO_TASK)
        with pytest.raises(ExperimentError):
            check_compatible(label_model, corpus)

    def test_variant_mismatch(self, label_model, markov_corpus):
        model = replace(label_model, meta={**label_model.meta, "variant": "SWDA42"})
        with pytest.raises(ExperimentError):
            check_compatible(model, markov_corpus)

    def test_no_dictionary(self, label_model, markov_corpus):
        with pytest.raises(ExperimentError):
            check_compatible(replace(label_model, dictionary=None), markov_corpus)

    def test_empty_accuracy(self):
        assert prediction_accuracy([]) is None


class TestSynthetic:
    """Test the Markov corpus generator"""

    def test_bayes_rates(self):
        rates = markov_bayes_rates()
        assert rates.without_context == pytest.approx(0.475)
        assert rates.with_previous_label == pytest.approx(0.895)

    def test_chain(self):
        matrix = transition_matrix(4, 0.8)
        np.testing.assert_allclose(matrix.sum(axis=1), 1.0)
        np.testing.assert_allclose(stationary_distribution(matrix), [0.25] * 4)

    def test_corpus_shape(self):
        corpus = generate_markov_corpus(n_dialogs=3, dialog_length=5, seed=2)
        assert [d.id for d in corpus.dialogs] == ["m0000", "m0001", "m0002"]
        assert [s.speaker for s in corpus.dialogs[0].segments] == list("ABABA")
        assert {s.label for s in corpus.segments()} <= {"l0", "l1", "l2", "l3"}
        assert corpus.label_set == ("l0", "l1", "l2", "l3")

    def test_seeded(self):
        first = generate_markov_corpus(n_dialogs=2, dialog_length=6, seed=4)
        second = generate_markov_corpus(n_dialogs=2, dialog_length=6, seed=4)
        assert first == second

    @pytest.mark.slow
    def test_accuracies_approach_bayes_rates(self):
        """Learned accuracies sit near the chain's ceilings"""
        corpus = generate_markov_corpus(n_dialogs=60, dialog_length=40, seed=11)
        spec = ExperimentSpec(corpus=corpus, solver=FAST, modes=(LABELS,), n_prev_values=(0, 1), k=6, seed=11)
        table = influence_experiment(spec)
        rates = markov_bayes_rates()
        plain = table.cell("labels", 0).pooled_accuracy
        with_labels = table.cell("labels", 1).pooled_accuracy
        assert plain < rates.without_context + 0.05
        assert with_labels > rates.with_previous_label - 0.08
        assert table.significance[("labels", 1)].significant

    @pytest.mark.slow
    def test_influence_pattern_on_5k_segments(self):
        """Label context helps once, longer label memory adds nothing, tagging beats pooling"""
        corpus = generate_markov_corpus(n_dialogs=100, dialog_length=50, seed=0)
        assert len(corpus) == 5000
        spec = ExperimentSpec(
            corpus=corpus,
            solver=SolverParams(cost=0.1, seed=0),
            modes=(UNTAGGED, TAGGED, LABELS),
            n_prev_values=(0, 1, 2, 3),
            k=10,
            seed=0,
        )
        table = influence_experiment(spec)

        def mean(row, n_prev):
            return 100 * table.cell(row, n_prev).mean_accuracy

        assert mean("labels", 1) >= mean("labels", 0) + 10
        for n_prev in (2, 3):
            assert abs(mean("labels", n_prev) - mean("labels", 1)) <= 1.0
            assert mean("tagged", n_prev) >= mean("untagged", n_prev)
