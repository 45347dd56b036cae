"""Native classifiers and a family-level training contract.

Tree families consume value-index rows directly; the others consume the
one-hot encoding. :func:`train` hides that difference: a
:class:`FittedModel` always takes value-index rows and reports
probabilities over the dataset's full class list.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from ..dataset import one_hot_encode
from .linear import SoftmaxRegression
from .neighbors import NearestNeighborsClassifier
from .svm import RBFSupportVectorClassifier
from .tree import CategoricalDecisionTree, CategoricalRandomForest, bootstrap_counts

__all__ = [
    "CategoricalDecisionTree",
    "CategoricalRandomForest",
    "NearestNeighborsClassifier",
    "SoftmaxRegression",
    "RBFSupportVectorClassifier",
    "ModelSpec",
    "FittedModel",
    "FAMILIES",
    "MODEL_TOKENS",
    "parse_model",
    "make_estimator",
    "train",
    "predict_proba",
    "predict",
    "bootstrap_counts",
]

# family -> (estimator class, default hyperparameters, consumes one-hot, seeded)
FAMILIES = {
    "decision_tree": (CategoricalDecisionTree, {}, False, True),
    "random_forest": (CategoricalRandomForest, {"n_estimators": 100, "max_depth": 5}, False, True),
    "knn": (NearestNeighborsClassifier, {"n_neighbors": 5}, True, False),
    "logistic_regression": (SoftmaxRegression, {"alpha": 1.0, "tol": 1e-6, "max_iter": 5000}, True, False),
    "svm_rbf": (RBFSupportVectorClassifier, {"C": 1.0, "gamma": "scale"}, True, False),
}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    name: Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}; choose from {sorted(FAMILIES)}")
        cls = FAMILIES[self.family][0]
        allowed = set(cls().get_params())
        unknown = set(self.hyperparameters) - allowed
        if unknown:
            raise ValueError(f"{self.family}: unknown hyperparameters {sorted(unknown)}")

    @property
    def label(self):
        return self.name or self.family

    @property
    def one_hot(self):
        return FAMILIES[self.family][2]

    def with_seed(self, seed):
        return ModelSpec(self.family, dict(self.hyperparameters), int(seed), self.name)

    def to_dict(self):
        return {"family": self.family, "hyperparameters": dict(self.hyperparameters),
                "seed": self.seed, "name": self.name}


MODEL_TOKENS = {
    "rf5": ModelSpec("random_forest", {"max_depth": 5}, name="rf5"),
    "rf": ModelSpec("random_forest", {"max_depth": None}, name="rf"),
    "dt": ModelSpec("decision_tree", name="dt"),
    "svm": ModelSpec("svm_rbf", name="svm"),
    "knn": ModelSpec("knn", name="knn"),
    "lr": ModelSpec("logistic_regression", name="lr"),
}


def parse_model(obj):
    """A :class:`ModelSpec` from a token (``"rf5"``), a family name or a dict."""
    if isinstance(obj, ModelSpec):
        return obj
    if isinstance(obj, str):
        if obj in MODEL_TOKENS:
            return MODEL_TOKENS[obj]
        if obj in FAMILIES:
            return ModelSpec(obj, name=obj)
        raise ValueError(f"unknown model token {obj!r}; choose from {sorted(MODEL_TOKENS)}")
    if isinstance(obj, dict):
        return ModelSpec(obj["family"], dict(obj.get("hyperparameters", {})),
                         int(obj.get("seed", 0)), obj.get("name"))
    raise TypeError(f"cannot interpret {obj!r} as a model spec")


def make_estimator(spec: ModelSpec, cardinalities=None):
    cls, defaults, one_hot, seeded = FAMILIES[spec.family]
    params = dict(defaults)
    params.update(spec.hyperparameters)
    if seeded:
        params["random_state"] = spec.seed
        if cardinalities is not None:
            params["n_values"] = list(cardinalities)
    return cls(**params)


@dataclass
class FittedModel:
    spec: ModelSpec
    estimator: Any
    cardinalities: tuple
    class_count: int

    def _input(self, X):
        X = np.asarray(X, dtype=np.int64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.cardinalities):
            raise ValueError(
                f"rows have {X.shape[1]} features, model expects {len(self.cardinalities)}")
        return one_hot_encode(X, self.cardinalities) if self.spec.one_hot else X

    def predict_proba(self, X):
        if not hasattr(self.estimator, "predict_proba"):
            raise TypeError(f"{self.spec.family} does not produce class probabilities")
        proba = self.estimator.predict_proba(self._input(X))
        out = np.zeros((proba.shape[0], self.class_count))
        out[:, self.estimator.classes_] = proba
        return out

    def predict(self, X):
        if hasattr(self.estimator, "predict_proba"):
            return np.argmax(self.predict_proba(X), axis=1)
        return np.asarray(self.estimator.predict(self._input(X)), dtype=np.int64)


def train(spec: ModelSpec, X, y, cardinalities, class_count=None) -> FittedModel:
    """Fit the family's estimator on value-index rows *X* and class indices *y*."""
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty training set")
    if class_count is None:
        class_count = int(y.max()) + 1
    cards = tuple(int(c) for c in cardinalities)
    est = make_estimator(spec, cards)
    model = FittedModel(spec, est, cards, int(class_count))
    est.fit(model._input(X), y)
    return model


def predict_proba(model: FittedModel, X):
    return model.predict_proba(X)


def predict(model: FittedModel, X):
    """Argmax of the class distribution; ties go to the lowest class index."""
    return model.predict(X)
