"""Shared fixtures: a small rendered-digit corpus and a model trained on it.

Session-scoped because training, while fast, is not free and many modules
only need any realistic trained model, not a specific one.
"""

import pytest

from assuremap import classifier, digits, idx


@pytest.fixture(scope="session")
def digit_splits():
    corpus = digits.make_corpus(40, 0)
    return digits.train_test_split(corpus, 0.2, 0)


@pytest.fixture(scope="session")
def digit_model(digit_splits):
    train, _ = digit_splits
    model = classifier.train_model(
        train, classifier.TrainConfig(seed=0, epochs=20)
    )
    held_out = classifier.evaluate_accuracy(model, digit_splits[1])
    assert held_out >= 0.9, f"fixture model too weak: {held_out}"
    return model


@pytest.fixture(scope="session")
def model_on_disk(tmp_path_factory, digit_model, digit_splits):
    """Exported model plus assurance-set IDX pair, as a ready config dict."""
    where = tmp_path_factory.mktemp("model-on-disk")
    model_path = where / "model.txt"
    classifier.export_model(digit_model, model_path)
    idx.write_idx_pair(where / "i.idx", where / "l.idx", digit_splits[1])
    return {
        "model": str(model_path),
        "images": str(where / "i.idx"),
        "labels": str(where / "l.idx"),
    }
