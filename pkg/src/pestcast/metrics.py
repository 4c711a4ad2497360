"""Agreement metrics for classifier evaluation."""

import numpy as np


def confusion_matrix(y_true, y_pred):
    """2x2 confusion matrix; rows = actual class (0, 1), columns = predicted."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    cm = np.zeros((2, 2), dtype=np.int64)
    for t in (0, 1):
        for p in (0, 1):
            cm[t, p] = int(((y_true == t) & (y_pred == p)).sum())
    return cm


def cohens_kappa(cm):
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e) for a 2x2 matrix.

    Degenerate case: when expected agreement p_e is 1 (all mass in one
    row-column pair), kappa is 1 for perfect observed agreement, else 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    if cm.shape != (2, 2):
        raise ValueError(f"expected a 2x2 confusion matrix, got shape {cm.shape}")
    total = cm.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")
    p_o = np.trace(cm) / total
    rows = cm.sum(axis=1)
    cols = cm.sum(axis=0)
    p_e = float((rows * cols).sum()) / (total * total)
    if p_e >= 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))
