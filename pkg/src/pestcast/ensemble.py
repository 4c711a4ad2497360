"""Stacked ensemble training, prediction, evaluation, and persistence.

Eight base classifiers (1..5-NN, decision tree, random forest, Gaussian
naive Bayes) feed a logistic-regression meta-learner trained on their
out-of-fold probabilities, so the meta-learner never sees a base's
prediction on a point that base was trained on. SMOTE balancing and
scaler fitting always happen strictly inside a training portion; the
optional LeakageAudit records every index set touched so tests can prove
validation purity.
"""

import hashlib
import pickle
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .balance import SmoteOversampler
from .base import StandardScaler
from .classifiers import (DecisionTreeClassifier, GaussianNaiveBayes,
                          KNNClassifier, LogisticRegressionGD,
                          RandomForestClassifier)
from .metrics import cohens_kappa, confusion_matrix

BASE_KINDS = ["knn_1", "knn_2", "knn_3", "knn_4", "knn_5",
              "decision_tree", "random_forest", "gaussian_naive_bayes"]
ENSEMBLE_NAME = "stacked_ensemble"

INTERNAL_FOLDS = 5

MODEL_FORMAT = "pestcast-model"
MODEL_VERSION = 1


def subseed(seed, *parts):
    """Stable sub-seed derivation so parallel or reordered runs agree."""
    tokens = [seed] + [p if isinstance(p, int) else _token(p) for p in parts]
    return int(np.random.SeedSequence(tokens).generate_state(1)[0])


def _token(name):
    return int.from_bytes(hashlib.sha256(str(name).encode()).digest()[:4], "big")


def make_base(kind, seed):
    if kind.startswith("knn_"):
        return KNNClassifier(k=int(kind.split("_")[1]))
    if kind == "decision_tree":
        return DecisionTreeClassifier(max_depth=20, min_leaf=2)
    if kind == "random_forest":
        return RandomForestClassifier(n_trees=100, max_depth=20, min_leaf=2,
                                      seed=subseed(seed, "forest"))
    if kind == "gaussian_naive_bayes":
        return GaussianNaiveBayes()
    raise ValueError(f"unknown base classifier kind: {kind}")


class EnsemblePrediction(NamedTuple):
    endangered: bool
    probability: float  # meta-learner positive-class probability
    certainty: float    # probability of the predicted class, in [0.5, 1]


@dataclass
class EnsembleModel:
    scaler: StandardScaler
    bases: dict
    meta: LogisticRegressionGD
    metadata: dict

    def fingerprint(self):
        h = hashlib.sha256()
        for arr in (self.scaler.mean_, self.scaler.std_):
            h.update(arr.tobytes())
        for kind in BASE_KINDS:
            h.update(kind.encode())
            base = self.bases[kind]
            if isinstance(base, KNNClassifier):
                h.update(base.X_.tobytes())
                h.update(base.y_.tobytes())
            elif isinstance(base, DecisionTreeClassifier):
                for arr in base.tree_:
                    h.update(arr.tobytes())
            elif isinstance(base, RandomForestClassifier):
                for tree in base.trees_:
                    for arr in tree:
                        h.update(arr.tobytes())
            elif isinstance(base, GaussianNaiveBayes):
                h.update(base.mean_.tobytes())
                h.update(base.var_.tobytes())
                h.update(base.log_prior_.tobytes())
        h.update(self.meta.weights_.tobytes())
        h.update(np.float64(self.meta.bias_).tobytes())
        return h.hexdigest()


class LeakageAudit:
    """Records which original-dataset indices reach SMOTE, scaler fitting,
    and validation in each fold."""

    def __init__(self):
        self.events = []

    def record(self, kind, fold, indices):
        self.events.append((kind, fold, frozenset(int(i) for i in indices)))

    def indices(self, kind, fold):
        out = set()
        for k, f, idx in self.events:
            if k == kind and f == fold:
                out |= idx
        return out

    def folds(self):
        return sorted({f for _, f, _ in self.events})


def instances_to_matrix(instances):
    X = np.array([inst.features for inst in instances], dtype=np.float64)
    y = np.array([inst.label for inst in instances], dtype=np.int64)
    return X, y


def _data_fingerprint(X, y):
    h = hashlib.sha256()
    h.update(X.tobytes())
    h.update(y.tobytes())
    return h.hexdigest()


def stratified_folds(y, folds, seed):
    """Fold id per row; class proportions preserved within +-1 instance."""
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    assignment = np.empty(y.shape[0], dtype=np.int64)
    for cls in (0, 1):
        rows = np.flatnonzero(y == cls)
        rows = rows[rng.permutation(rows.shape[0])]
        assignment[rows] = np.arange(rows.shape[0]) % folds
    return assignment


def _balance(X, y, seed):
    """SMOTE unless a class is missing or the minority is a single point."""
    counts = np.bincount(y, minlength=2)
    if counts.min() == 0 or (counts.min() == 1 and counts.max() > 1):
        return X, y, True
    sampler = SmoteOversampler(k=5, seed=seed)
    X_b, y_b, _, _ = sampler.fit_resample(X, y)
    return X_b, y_b, False


def train_stacked_ensemble(X, y, seed, audit=None, fold_id=None, index_map=None):
    """Train scaler, bases, and meta-learner on labeled training data.

    ``X``/``y`` may also be given as a list of LabeledInstance in place of
    ``X`` with y=None. ``index_map`` translates local row positions to
    original-dataset indices for audit recording.
    """
    if y is None:
        X, y = instances_to_matrix(X)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if np.bincount(y, minlength=2).min() == 0:
        raise ValueError("training set must contain both classes")
    if index_map is None:
        index_map = np.arange(X.shape[0])

    if audit is not None:
        audit.record("scaler", fold_id, index_map)
    scaler = StandardScaler().fit(X)

    # out-of-fold base probabilities for the meta-learner
    oof = np.full((X.shape[0], len(BASE_KINDS)), 0.5, dtype=np.float64)
    inner = stratified_folds(y, INTERNAL_FOLDS, subseed(seed, "inner-split"))
    degenerate_folds = []
    for f in range(INTERNAL_FOLDS):
        tr = np.flatnonzero(inner != f)
        va = np.flatnonzero(inner == f)
        if va.shape[0] == 0 or np.bincount(y[tr], minlength=2).min() == 0:
            degenerate_folds.append(f)
            continue
        if audit is not None:
            audit.record("smote", fold_id, index_map[tr])
        X_b, y_b, skipped = _balance(X[tr], y[tr], subseed(seed, "smote", f))
        if skipped:
            degenerate_folds.append(f)
        Z_b = scaler.transform(X_b)
        Z_va = scaler.transform(X[va])
        for b, kind in enumerate(BASE_KINDS):
            base = make_base(kind, subseed(seed, "inner", f, b)).fit(Z_b, y_b)
            oof[va, b] = base.predict_proba(Z_va)

    meta = LogisticRegressionGD(learning_rate=0.1, epochs=500, l2=1e-4)
    meta.fit(oof, y)

    # refit every base on the fully balanced training set
    if audit is not None:
        audit.record("smote", fold_id, index_map)
    X_b, y_b, skipped = _balance(X, y, subseed(seed, "smote-final"))
    Z_b = scaler.transform(X_b)
    bases = {kind: make_base(kind, subseed(seed, "final", b)).fit(Z_b, y_b)
             for b, kind in enumerate(BASE_KINDS)}

    metadata = {
        "seed": seed,
        "internal_folds": INTERNAL_FOLDS,
        "degenerate_internal_folds": degenerate_folds,
        "smote_skipped": bool(skipped),
        "n_train": int(X.shape[0]),
        "data_fingerprint": _data_fingerprint(X, y),
    }
    return EnsembleModel(scaler=scaler, bases=bases, meta=meta, metadata=metadata)


def base_probabilities(model, X):
    """Matrix of every base's positive probability; X in raw feature space."""
    Z = model.scaler.transform(X)
    cols = [model.bases[kind].predict_proba(Z) for kind in BASE_KINDS]
    return np.column_stack(cols)


def predict_ensemble_batch(model, X):
    """(endangered, probability) arrays for a matrix of raw feature vectors."""
    P = base_probabilities(model, X)
    prob = model.meta.predict_proba(P)
    return prob >= 0.5, prob


def predict_ensemble(model, fv):
    fv = np.asarray(fv, dtype=np.float64)
    if fv.ndim != 1:
        raise ValueError("predict_ensemble expects a single feature vector")
    endangered, prob = predict_ensemble_batch(model, fv.reshape(1, -1))
    p = float(prob[0])
    cls = bool(endangered[0])
    return EnsemblePrediction(endangered=cls, probability=p,
                              certainty=p if cls else 1.0 - p)


@dataclass
class EvaluationReport:
    """Per-classifier cross-validation outcome, ranked by mean kappa."""

    mean_kappa: dict
    fold_kappa: dict
    confusions: dict  # name -> list of 2x2 matrices, one per fold
    ranking: list = field(default_factory=list)

    def __post_init__(self):
        if not self.ranking:
            names = BASE_KINDS + [ENSEMBLE_NAME]
            self.ranking = sorted(names, key=lambda n: (-self.mean_kappa[n],
                                                        names.index(n)))


def cross_validate(X, y=None, folds=10, seed=0, audit=None):
    """Stratified k-fold evaluation of all bases and the stacked ensemble.

    Every fold retrains from scratch: SMOTE and the scaler see only the
    training portion. Returns an EvaluationReport.
    """
    if y is None:
        X, y = instances_to_matrix(X)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=2)
    if counts.min() < folds:
        raise ValueError(f"each class needs at least {folds} instances, "
                         f"got {counts.tolist()}")

    assignment = stratified_folds(y, folds, subseed(seed, "outer-split"))
    names = BASE_KINDS + [ENSEMBLE_NAME]
    confusions = {name: [] for name in names}
    for f in range(folds):
        tr = np.flatnonzero(assignment != f)
        va = np.flatnonzero(assignment == f)
        if audit is not None:
            audit.record("validation", f, va)
        model = train_stacked_ensemble(X[tr], y[tr], subseed(seed, "fold", f),
                                       audit=audit, fold_id=f, index_map=tr)
        P = base_probabilities(model, X[va])
        for b, kind in enumerate(BASE_KINDS):
            confusions[kind].append(confusion_matrix(y[va], P[:, b] >= 0.5))
        prob = model.meta.predict_proba(P)
        confusions[ENSEMBLE_NAME].append(confusion_matrix(y[va], prob >= 0.5))

    fold_kappa = {name: [cohens_kappa(cm) for cm in confusions[name]] for name in names}
    mean_kappa = {name: float(np.mean(fold_kappa[name])) for name in names}
    return EvaluationReport(mean_kappa=mean_kappa, fold_kappa=fold_kappa,
                            confusions=confusions)


# ---------------------------------------------------------------------------
# persistence


def save_model(model, path):
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "model": model,
        "fingerprint": model.fingerprint(),
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)


def load_model(path):
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a model container")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
    model = payload["model"]
    if model.fingerprint() != payload["fingerprint"]:
        raise ValueError(f"{path}: fingerprint mismatch, container corrupted")
    return model
