"""End-to-end scikit-learn estimator: images in, real/generated labels out.

Wraps the feature extractors and the small convolutional classifier behind
the usual ``fit`` / ``predict`` / ``predict_proba`` surface so the detector
composes with pipelines, grid search and cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .classifier import TrainConfig, concat_features, predict_proba, train
from .errors import DomainError
from .lga import LgaConfig, extract_lga
from .lvp import LvpWeights, extract_lvp
from .tensor_core import Padding, iter_images


class LdrNetDetector(ClassifierMixin, BaseEstimator):
    """Binary detector over localized-discrepancy features.

    ``fit`` expects images as an (N, C, H, W) array or a sequence of
    (C, H, W) arrays with values in [0, 1], and binary labels (0 = real,
    1 = generated).  Prediction uses a strict ``p > threshold`` rule; ties
    classify as real.
    """

    def __init__(
        self,
        operator="sobel",
        sigma=1.0,
        epsilon=1e-6,
        padding="reflect",
        lvp_weights="pow2",
        learning_rate=0.0002,
        batch_size=32,
        epochs=40,
        seed=0,
        threshold=0.5,
    ):
        self.operator = operator
        self.sigma = sigma
        self.epsilon = epsilon
        self.padding = padding
        self.lvp_weights = lvp_weights
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.threshold = threshold

    def _lga_config(self) -> LgaConfig:
        return LgaConfig(
            operator=self.operator,
            sigma=self.sigma,
            epsilon=self.epsilon,
            padding=self.padding,
        )

    def _weights(self) -> LvpWeights:
        if self.lvp_weights == "pow2":
            return LvpWeights.default()
        if self.lvp_weights == "random":
            return LvpWeights.random(self.seed)
        raise DomainError(
            f"lvp_weights must be 'pow2' or 'random', got {self.lvp_weights!r}"
        )

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
        )

    def extract(self, X) -> list[np.ndarray]:
        """Feature stacks (LGA channels over rescaled LVP channels) per image."""
        cfg = self._lga_config()
        weights = self._weights()
        stacks = []
        for img in iter_images(X):
            lga = extract_lga(img, cfg)
            lvp = extract_lvp(img, weights, Padding(self.padding))
            stacks.append(concat_features(lga, lvp))
        return stacks

    def fit(self, X, y):
        labels = np.asarray(y).reshape(-1)
        stacks = self.extract(X)
        if len(stacks) != labels.shape[0]:
            raise DomainError(f"{len(stacks)} images vs {labels.shape[0]} labels")
        params, history = train(zip(stacks, labels.tolist()), self._train_config())
        self.params_ = params
        self.history_ = history
        self.classes_ = np.array([0, 1])
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("fit the detector before predicting")

    def predict_proba(self, X) -> np.ndarray:
        """Column-stacked [P(real), P(generated)] per image."""
        self._check_fitted()
        stacks = np.stack(self.extract(X))
        p_gen = predict_proba(self.params_, stacks, batch_size=self.batch_size)
        return np.column_stack([1.0 - p_gen, p_gen])

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)[:, 1]
        return (proba > self.threshold).astype(np.int64)
