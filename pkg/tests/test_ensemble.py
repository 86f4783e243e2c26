import numpy as np
import pytest

from pafkit.ensemble import StackedClassifier, VotingClassifier, soft_vote
from pafkit.errors import EmptyModelList, SingleClass, TooFewRows
from pafkit.evaluation import auc, roc_curve
from pafkit.models import (
    DecisionTree,
    GbtConfig,
    GradientBoosting,
    LogisticRegression,
    LogRegConfig,
    TreeConfig,
)

from _stubs import ConstantModel, MemorizerModel


def blob_data(n: int = 200, d: int = 3, separation: float = 2.0, seed: int = 0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n).astype(np.float64)
    X = rng.normal(size=(n, d)) + separation * y[:, None]
    return X, y


def test_soft_vote_averages_member_scores() -> None:
    X = np.zeros((4, 2))
    votes = soft_vote([ConstantModel(0.2), ConstantModel(0.8)], X)
    assert np.all(votes == 0.5)
    votes = soft_vote([ConstantModel(1.0), ConstantModel(0.0), ConstantModel(0.5)], X)
    assert np.allclose(votes, 0.5)


def test_soft_vote_rejects_empty_list() -> None:
    with pytest.raises(EmptyModelList):
        soft_vote([], np.zeros((2, 2)))
    with pytest.raises(EmptyModelList):
        VotingClassifier([])


def test_voting_fits_members_and_averages() -> None:
    X, y = blob_data(seed=1)
    members = [
        LogisticRegression(LogRegConfig(epochs=100)),
        DecisionTree(TreeConfig(max_depth=3)),
    ]
    voting = VotingClassifier(members).fit(X, y, seed=0)
    expected = (members[0].score(X) + members[1].score(X)) / 2.0
    assert np.array_equal(voting.score(X), expected)
    assert auc(roc_curve(y, voting.score(X))) > 0.9


def test_voting_determinism() -> None:
    X, y = blob_data(seed=2)

    def build():
        return VotingClassifier(
            [GradientBoosting(GbtConfig(n_rounds=5)), LogisticRegression(LogRegConfig(epochs=50))]
        )

    a = build().fit(X, y, seed=3).score(X)
    b = build().fit(X, y, seed=3).score(X)
    assert np.array_equal(a, b)


def test_stacking_out_of_fold_matrix_shape() -> None:
    X, y = blob_data(n=60, seed=3)
    bases = [LogisticRegression(LogRegConfig(epochs=50)), DecisionTree(TreeConfig(max_depth=2))]
    model = StackedClassifier(bases, n_folds=4).fit(X, y, seed=0)
    assert model.oof_features_.shape == (60, 2)
    assert np.all((model.oof_features_ >= 0) & (model.oof_features_ <= 1))
    scores = model.score(X)
    assert len(scores) == 60
    assert np.all((scores >= 0) & (scores <= 1))


def test_stacking_learns_separable_data() -> None:
    X, y = blob_data(n=200, seed=4)
    bases = [LogisticRegression(LogRegConfig(epochs=100)), DecisionTree(TreeConfig(max_depth=4))]
    model = StackedClassifier(bases, n_folds=5).fit(X, y, seed=0)
    assert auc(roc_curve(y, model.score(X))) > 0.9


def test_stacking_oof_features_are_honest_for_a_memorizer() -> None:
    """A model that memorizes its training rows must not look good on the
    out-of-fold meta-features when labels are pure noise; if it does, some
    base model scored rows it had already seen."""
    for seed in range(3):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(100, 4))
        y = rng.integers(0, 2, size=100).astype(np.float64)
        memorizer = MemorizerModel()
        in_sample = auc(roc_curve(y, memorizer.fit(X, y).score(X)))
        assert in_sample > 0.95  # the probe is sharp: seen rows are recalled
        model = StackedClassifier([MemorizerModel()], n_folds=5).fit(X, y, seed=seed)
        oof_auc = auc(roc_curve(y, model.oof_features_[:, 0]))
        assert abs(oof_auc - 0.5) <= 0.05


def test_stacking_determinism() -> None:
    X, y = blob_data(n=80, seed=5)

    def build():
        return StackedClassifier(
            [LogisticRegression(LogRegConfig(epochs=30)), DecisionTree(TreeConfig(max_depth=2))],
            n_folds=3,
        )

    a = build().fit(X, y, seed=9).score(X)
    b = build().fit(X, y, seed=9).score(X)
    assert np.array_equal(a, b)


def test_stacking_validation() -> None:
    with pytest.raises(EmptyModelList):
        StackedClassifier([])
    X, y = blob_data(n=4, seed=6)
    with pytest.raises(TooFewRows):
        StackedClassifier([ConstantModel()], n_folds=5).fit(X, y)
    with pytest.raises(SingleClass):
        StackedClassifier([ConstantModel()], n_folds=2).fit(np.zeros((10, 2)), np.ones(10))
