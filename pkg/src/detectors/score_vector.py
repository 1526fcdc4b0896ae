"""
Score Vectors
Per-graph outlier scores (higher = more outlying) with ground-truth flags
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from core.errors import InputError
from core.io_utils import write_frame
from core.provenance import config_hash


@dataclass
class ScoreVector:
    """Outlier scores of one detector run"""
    scores: np.ndarray
    truth: Optional[np.ndarray] = None
    method: str = ""
    config: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.scores)):
            raise InputError(f"{self.method or 'detector'} produced non-finite scores")
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=bool).reshape(-1)
            if len(self.truth) != len(self.scores):
                raise InputError(
                    f"truth has {len(self.truth)} entries but there are {len(self.scores)} scores"
                )

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def config_hash(self) -> str:
        return config_hash(dict(self.config, method=self.method))

    def to_frame(self) -> pd.DataFrame:
        truth = self.truth if self.truth is not None else np.zeros(len(self), dtype=bool)
        return pd.DataFrame({
            "graph_index": np.arange(len(self)),
            "score": self.scores,
            "is_outlier": truth.astype(int),
            "method": self.method,
            "config_hash": self.config_hash,
        })

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_frame(self.to_frame(), path)
