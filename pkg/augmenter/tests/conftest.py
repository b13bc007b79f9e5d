"""Shared fixtures.

Unit tests run against tiny hand-built classifiers written directly as
TorchClassifier tensors. The digit fixtures build a real trained classifier
and few-shot set through the harness package; that package is a test-only
dependency used to orchestrate cross-component checks, never imported by the
augmenter itself.
"""

from types import SimpleNamespace

import numpy as np
import pytest
import torch

from cvae_augmenter import AugmenterConfig, train_cvae
from cvae_augmenter import model_io
from cvae_augmenter.model_io import NORM_EPS, TorchClassifier


def stub_model(
    input_dim=2,
    hidden_dim=None,
    class_count=2,
    *,
    w1=None,
    b1=None,
    running_mean=None,
    running_variance=None,
    scale=None,
    shift=None,
    w2=None,
    b2=None,
    seed=0,
) -> TorchClassifier:
    """A small classifier; defaults make every stage an identity map.

    w1 defaults to the identity, the normalization layer to a no-op
    (running variance 1 - eps cancels the epsilon), w2 to the identity,
    so logits equal relu(x) unless a stage is overridden.
    """
    hidden_dim = hidden_dim if hidden_dim is not None else input_dim
    t = lambda a: torch.as_tensor(np.asarray(a, dtype=np.float64))
    return TorchClassifier(
        w1=t(w1 if w1 is not None else np.eye(input_dim, hidden_dim)),
        b1=t(b1 if b1 is not None else np.zeros(hidden_dim)),
        running_mean=t(running_mean if running_mean is not None else np.zeros(hidden_dim)),
        running_variance=t(
            running_variance if running_variance is not None else np.full(hidden_dim, 1.0 - NORM_EPS)
        ),
        scale=t(scale if scale is not None else np.ones(hidden_dim)),
        shift=t(shift if shift is not None else np.zeros(hidden_dim)),
        w2=t(w2 if w2 is not None else np.eye(hidden_dim, class_count)),
        b2=t(b2 if b2 is not None else np.zeros(class_count)),
        seed=seed,
    )


def random_model(rng: np.random.Generator, input_dim=6, hidden_dim=4, class_count=3) -> TorchClassifier:
    t = lambda a: torch.as_tensor(a)
    return TorchClassifier(
        w1=t(rng.normal(size=(input_dim, hidden_dim))),
        b1=t(rng.normal(size=hidden_dim)),
        running_mean=t(rng.normal(size=hidden_dim)),
        running_variance=t(rng.uniform(0.1, 2.0, size=hidden_dim)),
        scale=t(rng.normal(size=hidden_dim)),
        shift=t(rng.normal(size=hidden_dim)),
        w2=t(rng.normal(size=(hidden_dim, class_count))),
        b2=t(rng.normal(size=class_count)),
        seed=7,
    )


@pytest.fixture(scope="session")
def digit_setup(tmp_path_factory):
    from assuremap import classifier, digits, harness, idx

    root = tmp_path_factory.mktemp("digit-setup")
    corpus = digits.make_corpus(40, 0)
    train, test = digits.train_test_split(corpus, 0.2, 0)
    model = classifier.train_model(train, classifier.TrainConfig(seed=0, epochs=20))
    model_path = root / "model.txt"
    classifier.export_model(model, model_path)
    few = harness.few_shot_subset(test, 5, 0)
    idx.write_idx_pair(root / "few-images.idx", root / "few-labels.idx", few)
    return SimpleNamespace(
        root=root,
        model=model,
        model_path=model_path,
        test=test,
        few=few,
        few_images_path=root / "few-images.idx",
        few_labels_path=root / "few-labels.idx",
    )


@pytest.fixture(scope="session")
def digit_generator(digit_setup):
    """One real trained generator shared by generation/filter/handoff tests."""
    tm = model_io.read_model(digit_setup.model_path)
    config = AugmenterConfig(
        model_path=digit_setup.model_path, sample_count=300, epochs=150, hidden_dim=256, seed=0
    )
    few = digit_setup.few
    return train_cvae(few.images, few.labels, tm, config)
