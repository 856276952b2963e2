"""Scikit-learn style wrappers around the two evolutionary trainers.

These make the trainers compose with the usual ecosystem (pipelines,
cross-validation, grid search): constructor parameters mirror the trainer
configs, `fit` runs the evolutionary loop, and the fitted model is exposed
as `model_` for serialization through cod2m.models.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import fuzzyga, neuroevo
from .models import compile_network, fuzzy_infer_batch


class _EvolvedClassifier(ClassifierMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses build the config and model."""

    def _train(self, rows, n_features):
        raise NotImplementedError

    def _scores_array(self, X) -> np.ndarray:
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        if len(self.classes_) != 2:
            raise ValueError(f"expected exactly 2 classes, got {len(self.classes_)}")
        self._validate_features(X)
        rows = [(tuple(map(float, row)), float(target)) for row, target in zip(X, encoded)]
        self.n_features_in_ = X.shape[1]
        self.model_ = self._train(rows, X.shape[1])
        return self

    def _validate_features(self, X) -> None:
        pass

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but the model was fitted with {self.n_features_in_}"
            )
        self._validate_features(X)
        return self._scores_array(X)

    def predict_proba(self, X):
        scores = self.decision_function(X)
        return np.column_stack([1.0 - scores, scores])

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[(scores >= 0.5).astype(int)]


class NeatClassifier(_EvolvedClassifier):
    """Binary classifier backed by an evolved feed-forward net."""

    def __init__(
        self,
        population_size: int = 150,
        generations: int = 50,
        weight_mutate_rate: float = 0.8,
        weight_perturb_sigma: float = 0.8,
        add_connection_rate: float = 0.1,
        add_node_rate: float = 0.03,
        compatibility_coeffs: tuple[float, float, float] = (1.0, 1.0, 0.4),
        compatibility_threshold: float = 3.0,
        survival_fraction: float = 0.25,
        crossover_rate: float = 0.75,
        staleness_limit: int = 15,
        fitness_stop: float | None = None,
        random_state: int = 0,
    ) -> None:
        self.population_size = population_size
        self.generations = generations
        self.weight_mutate_rate = weight_mutate_rate
        self.weight_perturb_sigma = weight_perturb_sigma
        self.add_connection_rate = add_connection_rate
        self.add_node_rate = add_node_rate
        self.compatibility_coeffs = compatibility_coeffs
        self.compatibility_threshold = compatibility_threshold
        self.survival_fraction = survival_fraction
        self.crossover_rate = crossover_rate
        self.staleness_limit = staleness_limit
        self.fitness_stop = fitness_stop
        self.random_state = random_state

    def _config(self) -> neuroevo.NeatConfig:
        return neuroevo.NeatConfig(
            population_size=self.population_size,
            generations=self.generations,
            weight_mutate_rate=self.weight_mutate_rate,
            weight_perturb_sigma=self.weight_perturb_sigma,
            add_connection_rate=self.add_connection_rate,
            add_node_rate=self.add_node_rate,
            compatibility_coeffs=tuple(self.compatibility_coeffs),
            compatibility_threshold=self.compatibility_threshold,
            survival_fraction=self.survival_fraction,
            crossover_rate=self.crossover_rate,
            staleness_limit=self.staleness_limit,
            fitness_stop=self.fitness_stop,
            seed=self.random_state,
        )

    def _train(self, rows, n_features):
        return neuroevo.evolve(rows, self._config(), input_count=n_features)

    def _scores_array(self, X) -> np.ndarray:
        net = compile_network(self.model_)
        return np.array([net(tuple(map(float, row))) for row in X])


class FuzzyGaClassifier(_EvolvedClassifier):
    """Binary classifier backed by a genetically tuned fuzzy system.

    Features must lie in [0, 1]; pair with a MinMaxScaler otherwise.
    """

    def __init__(
        self,
        population_size: int = 100,
        generations: int = 100,
        vertex_mutation_rate: float = 0.6,
        consequent_mutation_rate: float = 0.5,
        crossover_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
        tournament_size: int = 3,
        elitism_count: int = 2,
        quantization: int = 64,
        fitness_stop: float | None = None,
        random_state: int = 0,
    ) -> None:
        self.population_size = population_size
        self.generations = generations
        self.vertex_mutation_rate = vertex_mutation_rate
        self.consequent_mutation_rate = consequent_mutation_rate
        self.crossover_weights = crossover_weights
        self.tournament_size = tournament_size
        self.elitism_count = elitism_count
        self.quantization = quantization
        self.fitness_stop = fitness_stop
        self.random_state = random_state

    def _config(self) -> fuzzyga.FgaConfig:
        return fuzzyga.FgaConfig(
            population_size=self.population_size,
            generations=self.generations,
            vertex_mutation_rate=self.vertex_mutation_rate,
            consequent_mutation_rate=self.consequent_mutation_rate,
            crossover_weights=tuple(self.crossover_weights),
            tournament_size=self.tournament_size,
            elitism_count=self.elitism_count,
            quantization=self.quantization,
            fitness_stop=self.fitness_stop,
            seed=self.random_state,
        )

    def _validate_features(self, X) -> None:
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError("fuzzy inputs must lie in [0, 1]; rescale first")

    def _train(self, rows, n_features):
        return fuzzyga.evolve(rows, self._config(), input_count=n_features)

    def _scores_array(self, X) -> np.ndarray:
        return fuzzy_infer_batch(self.model_, np.asarray(X, dtype=float))
