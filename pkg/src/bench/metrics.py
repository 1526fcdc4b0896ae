"""
ROC-AUC
Mann-Whitney form with average ranks for ties; outliers are the positive class
"""

import numpy as np
from scipy.stats import rankdata

from core.errors import InputError, UndefinedAucError
from detectors.score_vector import ScoreVector


def roc_auc_from_arrays(scores, truth) -> float:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth, dtype=bool).reshape(-1)
    if len(scores) != len(truth):
        raise InputError(f"{len(scores)} scores but {len(truth)} truth flags")
    positives = int(truth.sum())
    negatives = len(truth) - positives
    if positives == 0 or negatives == 0:
        raise UndefinedAucError(
            f"ROC-AUC needs both classes, got {positives} outliers and {negatives} inliers"
        )
    ranks = rankdata(scores, method="average")
    rank_sum = float(ranks[truth].sum())
    return (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives)


def roc_auc(scores: ScoreVector) -> float:
    """Probability that a random outlier outscores a random inlier (ties count 1/2)"""
    if scores.truth is None:
        raise UndefinedAucError(f"{scores.method} scores carry no ground truth")
    return roc_auc_from_arrays(scores.scores, scores.truth)
