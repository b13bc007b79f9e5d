"""Generator training and sampling: validation, determinism, loss structure,
and behavior of generate() on a really trained model."""

import numpy as np
import pytest
import torch

from cvae_augmenter import AugmenterConfig, cvae, generate, losses, train_cvae
from cvae_augmenter.errors import InputError
from tests.conftest import stub_model


def tiny_problem(n=12, seed=0):
    """2x2 images, two classes, and an identity-ish stub classifier."""
    rng = np.random.default_rng(seed)
    images = rng.uniform(0.1, 0.9, size=(n, 2, 2))
    labels = np.arange(n) % 2
    model = stub_model(input_dim=4, hidden_dim=3, class_count=2, w1=rng.normal(size=(4, 3)),
                       w2=rng.normal(size=(3, 2)))
    return images, labels, model


def tiny_config(**overrides):
    base = dict(model_path="unused", sample_count=8, latent_dim=2, hidden_dim=16,
                batch_size=4, epochs=3, seed=0)
    base.update(overrides)
    return AugmenterConfig(**base)


class TestValidation:
    def test_missing_class_is_an_input_error(self):
        images, labels, model = tiny_problem()
        with pytest.raises(InputError, match="missing \\[1\\]"):
            train_cvae(images, np.zeros_like(labels), model, tiny_config())

    def test_label_beyond_class_count_rejected(self):
        images, labels, model = tiny_problem()
        bad = labels.copy()
        bad[0] = 7
        with pytest.raises(InputError):
            train_cvae(images, bad, model, tiny_config())

    def test_fewer_than_two_images_rejected(self):
        images, labels, model = tiny_problem()
        with pytest.raises(InputError, match="at least 2"):
            train_cvae(images[:1], labels[:1], model, tiny_config())

    def test_image_size_must_match_input_dim(self):
        images, labels, model = tiny_problem()
        with pytest.raises(InputError, match="input_dim"):
            train_cvae(np.zeros((12, 3, 3)), labels, model, tiny_config())

    def test_config_rejects_bad_fields(self):
        with pytest.raises(ValueError, match="alpha"):
            tiny_config(alpha=1.5)
        with pytest.raises(ValueError, match="epochs"):
            tiny_config(epochs=0)
        with pytest.raises(ValueError, match="sample_count"):
            tiny_config(sample_count=True)


class TestTrainingMechanics:
    def test_deterministic_given_seed(self):
        images, labels, model = tiny_problem()
        first = train_cvae(images, labels, model, tiny_config())
        second = train_cvae(images, labels, model, tiny_config())
        assert first.loss_log == second.loss_log
        np.testing.assert_array_equal(
            generate(first, 6, 1).images, generate(second, 6, 1).images
        )

    def test_seed_changes_the_run(self):
        images, labels, model = tiny_problem()
        a = train_cvae(images, labels, model, tiny_config(seed=0))
        b = train_cvae(images, labels, model, tiny_config(seed=1))
        assert a.loss_log != b.loss_log

    def test_total_is_the_sum_of_the_three_parts_every_batch(self):
        images, labels, model = tiny_problem()
        run = train_cvae(images, labels, model, tiny_config(epochs=4))
        for epoch in run.loss_log:
            for batch in epoch:
                assert abs(batch.total - (batch.cvae + batch.dist + batch.pred)) < 1e-9

    def test_zero_weights_log_zero_couplings(self):
        images, labels, model = tiny_problem()
        run = train_cvae(images, labels, model, tiny_config(), dist_weight=0.0, pred_weight=0.0)
        for epoch in run.loss_log:
            for batch in epoch:
                assert batch.dist == 0.0 and batch.pred == 0.0
                assert batch.total == batch.cvae

    def test_single_image_trailing_batch_is_dropped(self):
        images, labels, model = tiny_problem(n=5)
        run = train_cvae(images, labels, model, tiny_config(batch_size=4, epochs=1))
        assert [len(epoch) for epoch in run.loss_log] == [1]

    def test_parameters_are_frozen_after_training(self):
        images, labels, model = tiny_problem()
        run = train_cvae(images, labels, model, tiny_config())
        assert not any(p.requires_grad for p in run.decoder.parameters())


class TestTrainedOnDigits:
    def test_epoch_mean_loss_decreases(self, digit_generator):
        means = digit_generator.epoch_mean_totals()
        assert means[-1] < means[0]

    def test_reconstruction_beats_a_permuted_pixels_control(self, digit_generator, digit_setup):
        few = digit_setup.few
        x = torch.tensor(few.images, dtype=torch.float64).reshape(len(few.images), -1)
        labels = torch.tensor(few.labels)
        onehot = torch.nn.functional.one_hot(labels, digit_generator.model.class_count).to(
            torch.float64
        )
        perm = torch.randperm(x.shape[1], generator=torch.Generator().manual_seed(3))

        with torch.no_grad():
            mu, _ = digit_generator.encoder(x, onehot)
            recon = digit_generator.decoder(mu, onehot)
            loss_real = losses.reconstruction_loss(recon, x).item()
            mu_p, _ = digit_generator.encoder(x[:, perm], onehot)
            recon_p = digit_generator.decoder(mu_p, onehot)
            loss_perm = losses.reconstruction_loss(recon_p, x[:, perm]).item()
        assert loss_real < loss_perm


class TestGenerate:
    def test_count_labels_and_range(self, digit_generator):
        batch = generate(digit_generator, 25, seed=4)
        assert len(batch) == 25
        np.testing.assert_array_equal(batch.labels, np.arange(25) % 10)
        assert batch.images.min() >= 0.0 and batch.images.max() <= 1.0
        assert np.all((batch.confidences > 0.0) & (batch.confidences < 1.0))

    def test_same_seed_reproduces_the_batch(self, digit_generator):
        a = generate(digit_generator, 10, seed=7)
        b = generate(digit_generator, 10, seed=7)
        np.testing.assert_array_equal(a.images, b.images)
        np.testing.assert_array_equal(a.confidences, b.confidences)

    def test_different_seed_changes_the_batch(self, digit_generator):
        a = generate(digit_generator, 10, seed=7)
        b = generate(digit_generator, 10, seed=8)
        assert not np.array_equal(a.images, b.images)

    def test_generation_leaves_global_rng_alone(self, digit_generator):
        torch.manual_seed(123)
        before = torch.rand(3)
        torch.manual_seed(123)
        generate(digit_generator, 5, seed=0)
        after = torch.rand(3)
        assert torch.equal(before, after)

    def test_empty_batch(self, digit_generator):
        batch = generate(digit_generator, 0, seed=0)
        assert len(batch) == 0 and batch.images.shape == (0, 28, 28)

    def test_negative_count_rejected(self, digit_generator):
        with pytest.raises(InputError, match="nonnegative"):
            generate(digit_generator, -1, seed=0)

    def test_confidences_come_from_the_classifier(self, digit_generator, digit_setup):
        from assuremap import classifier

        batch = generate(digit_generator, 12, seed=2)
        expect = classifier.predict_proba(digit_setup.model, batch.images).max(axis=1)
        np.testing.assert_allclose(batch.confidences, expect, rtol=0.0, atol=1e-12)
