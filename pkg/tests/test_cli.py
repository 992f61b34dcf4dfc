"""
End-to-end tests of the command-line entry point.
"""

import json
import os

import pytest

from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from src.corpus.io import load_corpus
from src.eval.experiment import ExperimentSpec, cascade_experiment, influence_experiment
from src.features.vectorizer import ContextKind, ContextMode
from src.svm.solver import SolverParams

SWDA_ROOT = os.environ.get("DACT_SWDA_ROOT")

pytestmark = pytest.mark.integration


@pytest.fixture
def in_tmp(tmp_path, monkeypatch):
    """Run from an empty directory so no default config.yaml is picked up"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def trained_model(tmp_path, run_config):
    path = tmp_path / "models" / "labels1.dlsvm"
    code = main(["train", "--config", str(run_config), "--mode", "labels", "--n", "1", "--model", str(path)])
    assert code == EXIT_OK
    return path


class TestUsage:
    """Test argument and configuration errors"""

    def test_unknown_format(self, in_tmp):
        with pytest.raises(SystemExit) as exc_info:
            main(["parse", "--corpus", "x", "--format", "xml"])
        assert exc_info.value.code == 2

    def test_no_command(self, in_tmp):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2

    def test_version(self, in_tmp, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert "dact" in capsys.readouterr().out

    def test_missing_config_file(self, in_tmp, capsys):
        assert main(["cv", "--config", "absent.yaml"]) == EXIT_USAGE
        assert "Configuration Error" in capsys.readouterr().err

    def test_invalid_flag_value(self, run_config):
        assert main(["cv", "--config", str(run_config), "--cost", "-1"]) == EXIT_USAGE

    def test_seed_required(self, in_tmp, segments_file, capsys):
        code = main(["cv", "--corpus", str(segments_file), "--format", "segments", "--log-level", "ERROR"])
        assert code == EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_context_size_without_mode(self, run_config, capsys):
        assert main(["cv", "--config", str(run_config), "--mode", "none", "--n", "2"]) == EXIT_FAILURE
        assert "FeatureConfigError" in capsys.readouterr().err


class TestParseCommand:
    """Test corpus parsing and dumping"""

    def test_parse_to_file(self, in_tmp, swda_dir, capsys):
        out = in_tmp / "swda42.tsv"
        code = main(["parse", "--corpus", str(swda_dir), "--variant", "SWDA42", "--out", str(out), "--log-level", "ERROR"])
        assert code == EXIT_OK
        report = capsys.readouterr().out
        assert "2 dialogs, 14 segments" in report
        assert "SWDA42" in report
        assert "Disruption" in report
        assert "Acknowledgement" in report

        corpus = load_corpus([out], "segments")
        assert [d.id for d in corpus.dialogs] == ["sw2001", "sw4325"]
        assert len(corpus) == 14

    def test_parse_to_stdout(self, in_tmp, dialogbank_file, capsys):
        code = main(["parse", "--corpus", str(dialogbank_file), "--format", "dialogbank", "--log-level", "ERROR"])
        assert code == EXIT_OK
        captured = capsys.readouterr()
        assert captured.out.startswith("#variant\tISO_TASK\n")
        assert "2 dialogs, 5 segments, 3 targets" in captured.err

    def test_missing_file(self, in_tmp, capsys):
        code = main(["parse", "--corpus", "absent.tsv", "--format", "segments", "--log-level", "ERROR"])
        assert code == EXIT_FAILURE
        assert "absent.tsv" in capsys.readouterr().err

    def test_no_corpus(self, in_tmp):
        assert main(["parse", "--log-level", "ERROR"]) == EXIT_FAILURE


class TestFeaturizeCommand:
    """Test the sparse feature export"""

    def test_featurize(self, tmp_path, run_config):
        assert main(["featurize", "--config", str(run_config), "--mode", "labels", "--n", "1"]) == EXIT_OK
        out = tmp_path / "out"
        features = (out / "features.txt").read_text(encoding="utf-8").splitlines()
        labels = (out / "labels.txt").read_text(encoding="utf-8").splitlines()
        dictionary = (out / "dictionary.txt").read_text(encoding="utf-8").splitlines()
        assert len(features) == 240
        assert features[0].split()[1] == "qid:m0000"
        assert set(labels) <= {"l0", "l1", "l2", "l3"}
        assert "ctx:1:task:<pad>" in dictionary

        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "featurize"
        assert manifest["context_mode"] == "labels"
        assert set(manifest["outputs"]) == {"features.txt", "labels.txt", "dictionary.txt"}
        assert manifest["config"]["seed"] == 3


class TestTrainAndPredict:
    """Test model files through the command line"""

    def test_train_writes_model_and_manifest(self, trained_model):
        assert trained_model.read_text(encoding="utf-8").startswith("dlsvm v1\n")
        manifest = json.loads((trained_model.parent / "manifest.json").read_text(encoding="utf-8"))
        assert list(manifest["outputs"]) == ["labels1.dlsvm"]

    def test_predict(self, tmp_path, run_config, trained_model, capsys):
        out = tmp_path / "predicted.tsv"
        code = main(["predict", "--config", str(run_config), "--model", str(trained_model), "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 240
        dialog_id, index, speaker, label = lines[0].split("\t")
        assert (dialog_id, index, speaker) == ("m0000", "0", "A")
        assert label in {"l0", "l1", "l2", "l3"}
        assert "Accuracy against corpus labels" in capsys.readouterr().err

    def test_predict_online_speaker_subset(self, tmp_path, run_config, trained_model):
        out = tmp_path / "online.tsv"
        code = main([
            "predict", "--config", str(run_config), "--model", str(trained_model),
            "--online", "--speakers", "B", "--out", str(out),
        ])
        assert code == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 120
        assert all(line.split("\t")[2] == "B" for line in lines)

    def test_predict_incompatible_corpus(self, run_config, trained_model, swda_dir, capsys):
        code = main([
            "predict", "--config", str(run_config), "--model", str(trained_model),
            "--corpus", str(swda_dir), "--format", "switchboard",
        ])
        assert code == EXIT_FAILURE
        assert "ExperimentError" in capsys.readouterr().err

    def test_predict_missing_model(self, run_config, tmp_path):
        code = main(["predict", "--config", str(run_config), "--model", str(tmp_path / "none.dlsvm")])
        assert code == EXIT_FAILURE

    def test_interrupt(self, run_config, mocker, capsys):
        mocker.patch.dict("main.COMMANDS", {"cv": mocker.Mock(side_effect=KeyboardInterrupt)})
        assert main(["cv", "--config", str(run_config)]) == 130
        assert "Interrupted" in capsys.readouterr().err


class TestCrossValidationCommands:
    """Test the cv and experiment commands"""

    def test_cv(self, tmp_path, run_config):
        assert main(["cv", "--config", str(run_config), "--mode", "tagged", "--n", "1"]) == EXIT_OK
        out = tmp_path / "out"
        lines = (out / "results.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "mode,n_prev,fold,accuracy"
        assert [line.split(",")[:3] for line in lines[1:]] == [["tagged", "1", str(f)] for f in range(3)]
        assert (out / "confusion" / "tagged_1.csv").exists()
        assert "| tagged |" in (out / "results.md").read_text(encoding="utf-8")

    def test_experiment_is_deterministic(self, tmp_path, run_config):
        first, second = tmp_path / "run1", tmp_path / "run2"
        assert main(["experiment", "--config", str(run_config), "--output", str(first)]) == EXIT_OK
        assert main(["experiment", "--config", str(run_config), "--output", str(second), "--jobs", "3"]) == EXIT_OK

        results = (first / "results.csv").read_bytes()
        assert results == (second / "results.csv").read_bytes()
        assert len(results.decode().splitlines()) == 1 + 3 * 3 * 3

        manifests = [json.loads((d / "manifest.json").read_text(encoding="utf-8")) for d in (first, second)]
        assert manifests[0]["outputs"]["results.csv"] == manifests[1]["outputs"]["results.csv"]
        assert len(manifests[0]["inputs"]) == 1

    def test_cascade(self, tmp_path, run_config):
        code = main(["experiment", "--config", str(run_config), "--kind", "cascade", "--n-prev", "0", "1"])
        assert code == EXIT_OK
        out = tmp_path / "out"
        accuracy = (out / "label_accuracy.csv").read_text(encoding="utf-8").splitlines()
        assert accuracy[0] == "training_subset,accuracy"
        assert [line.split(",")[0] for line in accuracy[1:]] == ["second-half", "whole", "first-half"]
        predicted = (out / "predicted_labels.tsv").read_text(encoding="utf-8").splitlines()
        assert predicted[0] == "dialog_id\tindex\tsecond-half\twhole\tfirst-half"
        assert len(predicted) == 1 + 120
        rows = {line.split(",")[0] for line in (out / "results.csv").read_text(encoding="utf-8").splitlines()[1:]}
        assert rows == {"predicted-second-half", "predicted-whole", "predicted-first-half", "labels", "tagged"}


class TestSignificanceCommand:
    """Test comparing result files"""

    @staticmethod
    def result_csv(offset=0.0):
        return "mode,n_prev,fold,accuracy\n" + "".join(
            f"labels,{n},{fold},{0.5 + 0.01 * fold + 0.1 * n + offset!r}\n" for n in (1, 2) for fold in range(6)
        )

    @pytest.fixture
    def results(self, tmp_path):
        first = tmp_path / "a.csv"
        first.write_text(self.result_csv(), encoding="utf-8")
        return first

    def test_identical_files(self, in_tmp, results, capsys):
        assert main(["significance", str(results), str(results)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "mode\tn_prev\tW\tn\tp_value\tmethod"
        assert lines[1:] == ["labels\t1\t0\t0\t1\texact", "labels\t2\t0\t0\t1\texact"]

    def test_single_cell_and_mark(self, in_tmp, results, tmp_path, capsys):
        better = tmp_path / "b.csv"
        better.write_text(self.result_csv(offset=0.2), encoding="utf-8")
        assert main(["significance", str(better), str(results), "--cell", "labels:1"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        fields = lines[1].split("\t")
        assert fields[:4] == ["labels", "1", "21", "6"]
        assert fields[4].endswith("*")

    def test_no_common_cell(self, in_tmp, results, capsys):
        assert main(["significance", str(results), str(results), "--cell", "tagged:3"]) == EXIT_FAILURE
        assert "no cell in common" in capsys.readouterr().err

    def test_bad_cell(self, in_tmp, results):
        assert main(["significance", str(results), str(results), "--cell", "labels"]) == EXIT_FAILURE


@pytest.mark.corpus
@pytest.mark.slow
@pytest.mark.skipif(SWDA_ROOT is None, reason="DACT_SWDA_ROOT not set")
class TestSwitchboardCorpus:
    """Parse the full Switchboard dialog act corpus"""

    def test_swda42(self, in_tmp, capsys):
        assert main(["parse", "--corpus", SWDA_ROOT, "--variant", "SWDA42", "--out", "swda42.tsv"]) == EXIT_OK
        corpus = load_corpus([in_tmp / "swda42.tsv"], "segments")
        assert len(corpus.dialogs) > 1000
        assert len(corpus.present_labels()) <= 42
        assert "+" not in corpus.present_labels()


@pytest.fixture(scope="module")
def swda42():
    return load_corpus([SWDA_ROOT], "switchboard", "SWDA42")


@pytest.fixture(scope="module")
def influence_table(swda42):
    """Label and untagged rows over n_prev 0..5 with shared folds"""
    spec = ExperimentSpec(
        corpus=swda42,
        solver=SolverParams(cost=0.1),
        modes=(ContextMode(ContextKind.LABELS), ContextMode(ContextKind.UNTAGGED)),
        k=10,
        jobs=os.cpu_count() or 1,
    )
    return influence_experiment(spec)


@pytest.mark.corpus
@pytest.mark.slow
@pytest.mark.skipif(SWDA_ROOT is None, reason="DACT_SWDA_ROOT not set")
class TestSwitchboardAccuracy:
    """Reproduce published 42-label accuracies, in percentage points"""

    def test_no_context_baseline(self, influence_table):
        assert 100 * influence_table.cell("labels", 0).mean_accuracy == pytest.approx(73.69, abs=1.0)

    def test_previous_label(self, influence_table):
        assert 100 * influence_table.cell("labels", 1).mean_accuracy == pytest.approx(78.20, abs=1.0)
        assert 100 * influence_table.cell("labels", 3).mean_accuracy == pytest.approx(79.06, abs=1.0)
        assert not influence_table.significance[("labels", 3)].significant

    def test_untagged_context_degrades(self, influence_table):
        row = [influence_table.cell("untagged", n).mean_accuracy for n in influence_table.n_prev_values]
        assert all(later < earlier for earlier, later in zip(row, row[1:]))
        assert 100 * row[-1] == pytest.approx(40.54, abs=2.0)

    def test_cascade_label_accuracy(self, swda42):
        spec = ExperimentSpec(
            corpus=swda42,
            solver=SolverParams(cost=0.1),
            n_prev_values=(0, 1),
            jobs=os.cpu_count() or 1,
        )
        result = cascade_experiment(spec)
        assert 100 * result.label_accuracy["second-half"] == pytest.approx(86.88, abs=1.5)
        assert 100 * result.label_accuracy["first-half"] == pytest.approx(71.53, abs=1.5)
        assert 100 * result.table.cell("labels", 1).mean_accuracy == pytest.approx(77.37, abs=1.0)
