"""
Tests for the two-covariance kernel and trial scoring.
"""

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import norm

from core.exceptions import InvariantError, UnresolvedIdError
from services.corpus.models import LabeledVectorSet, Trial, TrialList
from services.plda.models import PldaModel
from services.preprocess.lda import length_normalize_set
from services.scoring.io import load_scores, save_scores
from services.scoring.kernel import build_kernel, score_matrix, score_pair
from services.scoring.models import EnrollPooling, KernelMode, ScoreList
from services.scoring.trials import pool_vectors, score_trials


def _random_model(rng, d: int = 5, r: int = 2, shared: bool = False) -> PldaModel:
    def covariance():
        a = rng.standard_normal((d, d))
        return a @ a.T / d + 0.3 * np.eye(d)

    sigma_w = covariance()
    return PldaModel(
        mu=rng.standard_normal(d),
        F=rng.standard_normal((d, r)),
        sigma_w=sigma_w,
        sigma_b=sigma_w if shared else covariance()
    )


def test_kernel_one_dimension(unit_model):
    """Test Q = -1/6 and P = 1/3 for F = 1, sigma = 1."""
    kernel = build_kernel(unit_model)
    assert kernel.Q[0, 0] == pytest.approx(-1.0 / 6.0)
    assert kernel.P[0, 0] == pytest.approx(1.0 / 3.0)
    assert score_pair(kernel, [1.0], [1.0]) == pytest.approx(1.0 / 3.0)
    assert score_pair(kernel, [1.0], [-1.0]) == pytest.approx(-1.0)


def test_kernel_modes_agree_for_shared_covariance(rng):
    """Test that between and within kernels coincide when sigma_b = sigma_w."""
    model = _random_model(rng, shared=True)
    between = build_kernel(model, KernelMode.BETWEEN)
    within = build_kernel(model, "within")
    np.testing.assert_array_equal(between.Q, within.Q)
    left = rng.standard_normal((20, 5))
    right = rng.standard_normal((30, 5))
    diff = score_matrix(between, left, right) - score_matrix(within, left, right)
    assert np.max(np.abs(diff)) < 1e-10


def test_kernel_without_speaker_space():
    """Test that F = 0 removes the coupling term."""
    model = PldaModel(mu=[0.0, 0.0], F=[[0.0], [0.0]], sigma_w=np.eye(2), sigma_b=2 * np.eye(2))
    kernel = build_kernel(model, KernelMode.WITHIN)
    np.testing.assert_array_equal(kernel.P, np.zeros((2, 2)))
    assert score_pair(kernel, [1.0, 2.0], [-3.0, 0.5]) == pytest.approx(0.0)
    assert score_pair(kernel, [0.1, 0.0], [4.0, 4.0]) == pytest.approx(0.0)


def test_kernel_matrices_are_symmetric(rng):
    """Test symmetric Q and P."""
    kernel = build_kernel(_random_model(rng))
    np.testing.assert_array_equal(kernel.Q, kernel.Q.T)
    np.testing.assert_array_equal(kernel.P, kernel.P.T)


def test_score_pair_is_symmetric(rng):
    """Test that swapping the arguments gives the same score bit for bit."""
    kernel = build_kernel(_random_model(rng))
    for _ in range(50):
        x, y = rng.standard_normal((2, 5))
        assert score_pair(kernel, x, y) == score_pair(kernel, y, x)


def test_score_matrix_matches_pairs(rng):
    """Test batch scores against pairwise scores."""
    kernel = build_kernel(_random_model(rng))
    left = rng.standard_normal((4, 5))
    right = rng.standard_normal((3, 5))
    matrix = score_matrix(kernel, left, right)
    for i in range(4):
        for j in range(3):
            assert matrix[i, j] == pytest.approx(score_pair(kernel, left[i], right[j]), rel=1e-12, abs=1e-12)


def test_score_pair_dimension_mismatch(unit_model):
    """Test vectors of the wrong length."""
    with pytest.raises(InvariantError):
        score_pair(build_kernel(unit_model), [1.0, 2.0], [1.0])


def test_score_is_twice_the_likelihood_ratio():
    """Test the 1-dim score against numerically integrated hypotheses."""
    f, w = 1.3, 0.7
    model = PldaModel(mu=[0.0], F=[[f]], sigma_w=[[w]], sigma_b=[[w]])
    kernel = build_kernel(model, KernelMode.BETWEEN)
    total = np.sqrt(f * f + w)

    h = np.linspace(-15.0, 15.0, 30001)
    prior = norm.pdf(h)
    grid = np.linspace(-3.0, 3.0, 50)
    analytic, integrated = [], []
    for x1 in grid:
        like1 = norm.pdf(x1, loc=f * h, scale=np.sqrt(w))
        for x2 in grid:
            same = trapezoid(like1 * norm.pdf(x2, loc=f * h, scale=np.sqrt(w)) * prior, h)
            different = norm.pdf(x1, scale=total) * norm.pdf(x2, scale=total)
            integrated.append(np.log(same / different))
            analytic.append(0.5 * score_pair(kernel, [x1], [x2]))

    slope, _ = np.polyfit(integrated, analytic, 1)
    assert slope == pytest.approx(1.0, abs=1e-6)
    assert np.corrcoef(integrated, analytic)[0, 1] == pytest.approx(1.0, abs=1e-6)


def test_pool_vectors():
    """Test averaging then length normalization."""
    np.testing.assert_allclose(pool_vectors(np.array([[1.0, 0.0], [0.0, 1.0]])), [2 ** -0.5, 2 ** -0.5])
    single = np.array([[3.0, 4.0]])
    np.testing.assert_array_equal(pool_vectors(single), [3.0, 4.0])


def _unit_rows(rng, n: int, d: int) -> np.ndarray:
    rows = rng.standard_normal((n, d))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def test_single_vector_models_pool_alike(rng):
    """Test that both pooling modes agree for one enrollment vector."""
    kernel = build_kernel(_random_model(rng))
    models = LabeledVectorSet.from_arrays(_unit_rows(rng, 3, 5), ["m2", "m0", "m1"])
    tests = LabeledVectorSet.from_arrays(_unit_rows(rng, 4, 5), ["t"] * 4)
    trials = TrialList(tuple(Trial(m, f"t_{k}") for m in ("m0", "m1", "m2") for k in range(4)))
    pooled = score_trials(kernel, models, tests, trials, EnrollPooling.MEAN_RENORM)
    averaged = score_trials(kernel, models, tests, trials, EnrollPooling.SCORE_AVERAGE)
    np.testing.assert_array_equal(pooled.scores, averaged.scores)


def test_duplicate_enrollment_vectors(rng):
    """Test that a model of two identical vectors scores like one vector."""
    kernel = build_kernel(_random_model(rng))
    vector = _unit_rows(rng, 1, 5)
    doubled = LabeledVectorSet.from_arrays(np.vstack([vector, vector]), ["m", "m"])
    single = LabeledVectorSet.from_arrays(vector, ["m"])
    tests = LabeledVectorSet.from_arrays(_unit_rows(rng, 2, 5), ["t", "t"])
    trials = TrialList((Trial("m", "t_0"), Trial("m", "t_1")))
    np.testing.assert_allclose(
        score_trials(kernel, doubled, tests, trials).scores,
        score_trials(kernel, single, tests, trials).scores,
        rtol=1e-10,
        atol=1e-10
    )


def test_score_average_pooling(rng):
    """Test that avg-score averages pairwise scores."""
    kernel = build_kernel(_random_model(rng))
    enroll = rng.standard_normal((3, 5))
    test = rng.standard_normal((1, 5))
    models = LabeledVectorSet.from_arrays(enroll, ["m"] * 3)
    tests = LabeledVectorSet.from_arrays(test, ["t"])
    scores = score_trials(kernel, models, tests, TrialList((Trial("m", "t_0"),)), "avg-score")
    expected = np.mean([score_pair(kernel, e, test[0]) for e in enroll])
    assert scores.scores[0] == pytest.approx(expected, rel=1e-12)


def test_trial_order_does_not_change_scores(task, rng):
    """Test that permuting trials keeps every trial's score."""
    kernel = build_kernel(_random_model(rng, d=12, r=3))
    enroll = length_normalize_set(task.enroll)
    test = length_normalize_set(task.test)
    permuted = task.trials.take(rng.permutation(len(task.trials)).tolist())
    first = score_trials(kernel, enroll, test, task.trials)
    second = score_trials(kernel, enroll, test, permuted)
    assert first.keys == task.trials.keys
    assert first.by_key() == second.by_key()


def test_unresolved_ids(task):
    """Test missing model and segment ids."""
    kernel = build_kernel(PldaModel(mu=np.zeros(12), F=np.ones((12, 1)), sigma_w=np.eye(12), sigma_b=np.eye(12)))
    trials = TrialList((Trial("nobody", "eval00000_t0"), Trial("m00000", "missing")))
    with pytest.raises(UnresolvedIdError) as error:
        score_trials(kernel, task.enroll, task.test, trials)
    assert error.value.kind == "model"
    assert error.value.missing == ["nobody"]

    with pytest.raises(UnresolvedIdError) as error:
        score_trials(kernel, task.enroll, task.test, trials.take([1]))
    assert error.value.kind == "segment"


def test_empty_trial_list(task):
    """Test scoring no trials."""
    kernel = build_kernel(PldaModel(mu=np.zeros(12), F=np.ones((12, 1)), sigma_w=np.eye(12), sigma_b=np.eye(12)))
    assert len(score_trials(kernel, task.enroll, task.test, TrialList())) == 0


def test_scores_file(tmp_path, rng):
    """Test writing and reading a scores file."""
    scores = ScoreList.from_keys([("m1", "t1"), ("m2", "t1")], rng.standard_normal(2))
    path = tmp_path / "scores.csv"
    save_scores(scores, path)
    assert path.read_text().splitlines()[0] == "model_id,segment_id,score"
    loaded = load_scores(path)
    assert loaded.keys == scores.keys
    np.testing.assert_array_equal(loaded.scores, scores.scores)


def test_score_list_rejects_duplicates():
    """Test the uniqueness invariant."""
    with pytest.raises(InvariantError):
        ScoreList.from_keys([("m", "t"), ("m", "t")], [1.0, 2.0])
