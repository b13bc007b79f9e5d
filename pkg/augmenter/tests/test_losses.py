"""Loss unit cases: hand-computed values, closed-form oracles, and central
finite differences as the gradient oracle."""

import math

import numpy as np
import pytest
import torch

from cvae_augmenter import losses
from tests.conftest import random_model, stub_model


def central_difference(fn, x: torch.Tensor, index, h=1e-6) -> float:
    plus = x.clone()
    minus = x.clone()
    plus[index] += h
    minus[index] -= h
    return (fn(plus) - fn(minus)) / (2.0 * h)


class TestDistributionLoss:
    def test_hand_two_unit_case(self):
        # Identity features; batch stats mean (1, 0) and population var (1, 1)
        # against zero running stats: ||(1,0)|| + ||(1,1)|| = 1 + sqrt(2).
        model = stub_model(running_mean=[0.0, 0.0], running_variance=[0.0, 0.0])
        batch = torch.tensor([[2.0, 1.0], [0.0, -1.0]], dtype=torch.float64)
        value = losses.distribution_loss(batch, model).item()
        assert abs(value - (1.0 + math.sqrt(2.0))) < 1e-12

    def test_matching_statistics_give_exactly_zero(self):
        model = stub_model(running_mean=[1.0, 0.0], running_variance=[1.0, 1.0])
        batch = torch.tensor([[2.0, 1.0], [0.0, -1.0]], dtype=torch.float64)
        assert losses.distribution_loss(batch, model).item() == 0.0

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        model = random_model(rng)
        batch = torch.tensor(rng.uniform(size=(8, model.input_dim)))
        forward = losses.distribution_loss(batch, model).item()
        shuffled = losses.distribution_loss(batch[torch.tensor([5, 2, 7, 0, 3, 6, 1, 4])], model).item()
        assert abs(forward - shuffled) < 1e-12

    def test_nonnegative_and_positive_off_target(self):
        rng = np.random.default_rng(1)
        model = random_model(rng)
        for trial in range(5):
            batch = torch.tensor(rng.uniform(size=(6, model.input_dim)))
            assert losses.distribution_loss(batch, model).item() > 0.0

    def test_single_image_batch_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            losses.distribution_loss(torch.zeros(1, 2, dtype=torch.float64), stub_model())

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(2)
        model = random_model(rng)
        x = torch.tensor(rng.uniform(0.2, 0.8, size=(4, model.input_dim)), requires_grad=True)
        losses.distribution_loss(x, model).backward()
        fn = lambda v: losses.distribution_loss(v, model).item()
        for index in [(0, 0), (1, 3), (3, 5)]:
            fd = central_difference(fn, x.detach(), index)
            auto = x.grad[index].item()
            assert abs(auto - fd) <= 1e-4 * max(abs(fd), 1e-8)


class TestPredictionLoss:
    def test_exact_one_hot_output_gives_zero(self):
        # Logit gap 1600 underflows the softmax tail to exactly one-hot.
        model = stub_model(w2=[[1600.0, 0.0], [0.0, 1600.0]])
        x = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
        assert losses.prediction_loss(x, [0], model).item() == 0.0

    def test_uniform_output_gives_log_class_count(self):
        model = stub_model(class_count=3, w2=np.zeros((2, 3)), b2=np.zeros(3))
        x = torch.tensor([[0.3, 0.7], [0.9, 0.1]], dtype=torch.float64)
        value = losses.prediction_loss(x, [1, 2], model).item()
        assert abs(value - math.log(3.0)) < 1e-15

    def test_mean_over_the_batch_against_hand_formula(self):
        rng = np.random.default_rng(3)
        model = random_model(rng)
        x = rng.uniform(size=(5, model.input_dim))
        labels = rng.integers(0, model.class_count, size=5)

        from cvae_augmenter import model_io

        probs = model_io.predict_proba(model, x).numpy()
        expect = float(np.mean([-np.log(probs[i, labels[i]]) for i in range(5)]))
        got = losses.prediction_loss(torch.tensor(x), labels, model).item()
        assert abs(got - expect) < 1e-12

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(4)
        model = random_model(rng)
        x = torch.tensor(rng.uniform(0.2, 0.8, size=(3, model.input_dim)), requires_grad=True)
        labels = torch.tensor([0, 2, 1])
        losses.prediction_loss(x, labels, model).backward()
        fn = lambda v: losses.prediction_loss(v, labels, model).item()
        for index in [(0, 1), (2, 4), (1, 0)]:
            fd = central_difference(fn, x.detach(), index)
            auto = x.grad[index].item()
            assert abs(auto - fd) <= 1e-4 * max(abs(fd), 1e-8)

    def test_out_of_range_label_rejected(self):
        with pytest.raises(ValueError, match="classes|lie in"):
            losses.prediction_loss(torch.zeros(1, 2, dtype=torch.float64), [5], stub_model())

    def test_label_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="one class index per image"):
            losses.prediction_loss(torch.zeros(2, 2, dtype=torch.float64), [0], stub_model())


class TestCvaeTerms:
    def test_reconstruction_hand_value(self):
        recon = torch.tensor([[0.5, 0.5]], dtype=torch.float64)
        target = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
        assert abs(losses.reconstruction_loss(recon, target).item() - 2.0 * math.log(2.0)) < 1e-15

    def test_reconstruction_matches_explicit_formula(self):
        rng = np.random.default_rng(5)
        recon = torch.tensor(rng.uniform(0.05, 0.95, size=(4, 9)))
        target = torch.tensor(rng.uniform(size=(4, 9)))
        expect = -(target * recon.log() + (1 - target) * (1 - recon).log()).sum(dim=1).mean()
        got = losses.reconstruction_loss(recon, target)
        assert abs(got.item() - expect.item()) < 1e-12

    def test_kl_zero_at_the_prior(self):
        zeros = torch.zeros(3, 2, dtype=torch.float64)
        assert losses.kl_loss(zeros, zeros).item() == 0.0

    def test_kl_hand_value(self):
        mu = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
        logvar = torch.zeros(1, 2, dtype=torch.float64)
        assert losses.kl_loss(mu, logvar).item() == 0.5

    def test_kl_matches_closed_form(self):
        rng = np.random.default_rng(6)
        mu = torch.tensor(rng.normal(size=(5, 3)))
        logvar = torch.tensor(rng.normal(size=(5, 3)))
        expect = 0.5 * (logvar.exp() + mu**2 - 1.0 - logvar).sum(dim=1).mean()
        assert abs(losses.kl_loss(mu, logvar).item() - expect.item()) < 1e-12
