"""
Tests for labeled vector sets, trial lists and their file formats.
"""

import json

import numpy as np
import pytest

from core.exceptions import CorpusFormatError, InvariantError
from services.corpus.io import load_trials, load_vectors, save_trials, save_vectors
from services.corpus.models import LabeledVectorSet, SpeakerGroup, Trial, TrialLabel, TrialList


def test_from_arrays_groups_by_speaker():
    """Test speaker grouping in first-appearance order."""
    vectors = np.arange(12, dtype=float).reshape(4, 3)
    data = LabeledVectorSet.from_arrays(vectors, ["b", "a", "b", "a"])
    assert data.speaker_ids == ("b", "a")
    assert data.group("b").segment_ids == ("b_0", "b_1")
    np.testing.assert_array_equal(data.group("a").vectors, vectors[[1, 3]])

    matrix, labels = data.stacked()
    np.testing.assert_array_equal(matrix, vectors[[0, 2, 1, 3]])
    np.testing.assert_array_equal(labels, [0, 0, 1, 1])


def test_set_is_read_only():
    """Test that stored vectors cannot be modified."""
    data = LabeledVectorSet.from_arrays(np.ones((2, 2)), ["a", "a"])
    with pytest.raises(ValueError):
        data.speakers[0].vectors[0, 0] = 5.0


def test_set_rejects_mixed_dimensions():
    """Test the dimension invariant."""
    with pytest.raises(InvariantError):
        LabeledVectorSet(dim=2, speakers=(SpeakerGroup("a", np.ones((1, 3)), ("a0",)),))


def test_with_vectors_keeps_labels():
    """Test relabeling with a different column count."""
    data = LabeledVectorSet.from_arrays(np.ones((3, 4)), ["a", "b", "a"])
    projected = data.with_vectors(np.zeros((3, 2)))
    assert projected.dim == 2
    assert projected.speaker_ids == data.speaker_ids
    assert projected.group("a").segment_ids == data.group("a").segment_ids


def test_load_vectors_csv(tmp_path):
    """Test a two-row CSV file."""
    path = tmp_path / "vectors.csv"
    path.write_text("speaker_id,segment_id,v0,v1,v2\nspk1,seg1,1,2,3\nspk1,seg2,4,5,6\n")
    data = load_vectors(path)
    assert data.dim == 3
    assert data.n_speakers == 1
    assert data.n_vectors == 2


def test_load_vectors_dimension_mismatch(tmp_path):
    """Test that a short row is reported with its line number."""
    path = tmp_path / "vectors.jsonl"
    path.write_text(
        json.dumps({"speaker_id": "a", "segment_id": "1", "vector": [1, 2, 3]}) + "\n"
        + json.dumps({"speaker_id": "a", "segment_id": "2", "vector": [1, 2, 3, 4]}) + "\n"
    )
    with pytest.raises(CorpusFormatError) as error:
        load_vectors(path)
    assert error.value.line == 2
    assert "dimension mismatch" in str(error.value)


def test_load_vectors_expected_dim_csv(tmp_path):
    """Test a CSV whose width disagrees with the dimension the caller expects."""
    path = tmp_path / "vectors.csv"
    path.write_text("speaker_id,segment_id,v0,v1\na,1,0.5,0.1\n")
    with pytest.raises(CorpusFormatError) as error:
        load_vectors(path, dim=3)
    assert error.value.line == 1
    assert "expected dim 3" in str(error.value)
    assert load_vectors(path, dim=2).dim == 2


def test_load_vectors_expected_dim_jsonl(tmp_path):
    """Test that the first JSONL row is already held to the expected dimension."""
    path = tmp_path / "vectors.jsonl"
    path.write_text(json.dumps({"speaker_id": "a", "segment_id": "1", "vector": [1, 2]}) + "\n")
    with pytest.raises(CorpusFormatError) as error:
        load_vectors(path, dim=3)
    assert error.value.line == 1
    assert "expected dim 3, got 2 values" in str(error.value)


def test_load_vectors_csv_line_numbers(tmp_path):
    """Test that CSV line numbers count the header."""
    path = tmp_path / "vectors.csv"
    path.write_text("speaker_id,segment_id,v0\na,1,0.5\na,1,0.7\n")
    with pytest.raises(CorpusFormatError) as error:
        load_vectors(path)
    assert error.value.line == 3
    assert "duplicate" in str(error.value)


def test_load_vectors_empty_file(tmp_path):
    """Test an empty file."""
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(CorpusFormatError, match="no vectors"):
        load_vectors(path)


def test_load_vectors_non_numeric(tmp_path):
    """Test a non-numeric value."""
    path = tmp_path / "vectors.csv"
    path.write_text("speaker_id,segment_id,v0\na,1,abc\n")
    with pytest.raises(CorpusFormatError, match="not a number"):
        load_vectors(path)


@pytest.mark.parametrize("suffix", [".csv", ".jsonl"])
def test_vectors_survive_a_file(tmp_path, train_set, suffix):
    """Test that written vectors are read back at full precision."""
    path = tmp_path / f"train{suffix}"
    save_vectors(train_set, path)
    loaded = load_vectors(path)
    assert loaded.speaker_ids == train_set.speaker_ids
    np.testing.assert_array_equal(loaded.stacked()[0], train_set.stacked()[0])


def test_load_trials(tmp_path):
    """Test label mapping."""
    path = tmp_path / "trials.csv"
    path.write_text("model_id,segment_id,label\nm1,t1,target\nm1,t2,NONTARGET\nm2,t1,unknown\n")
    trials = load_trials(path)
    assert trials.labels == [TrialLabel.TARGET, TrialLabel.NONTARGET, TrialLabel.UNKNOWN]
    assert trials.has_unknown


def test_load_trials_duplicate(tmp_path):
    """Test a repeated trial."""
    path = tmp_path / "trials.csv"
    path.write_text("model_id,segment_id,label\nm1,t1,target\nm1,t1,target\n")
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_trials(path)


def test_load_trials_bad_label(tmp_path):
    """Test an unrecognized label token."""
    path = tmp_path / "trials.csv"
    path.write_text("model_id,segment_id,label\nm1,t1,maybe\n")
    with pytest.raises(CorpusFormatError, match="maybe"):
        load_trials(path)


def test_save_trials(tmp_path, labeled_trials):
    """Test the written trials file."""
    path = tmp_path / "trials.csv"
    save_trials(labeled_trials, path)
    assert path.read_text().splitlines()[:2] == ["model_id,segment_id,label", "m1,t1,target"]
    assert load_trials(path) == labeled_trials


def test_trial_list_rejects_duplicates():
    """Test the uniqueness invariant."""
    with pytest.raises(InvariantError):
        TrialList((Trial("m", "t"), Trial("m", "t", TrialLabel.TARGET)))
