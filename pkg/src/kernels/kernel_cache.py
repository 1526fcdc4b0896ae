"""
Kernel Cache
Binary on-disk cache of kernel slices and embeddings keyed by config hash
"""

import io
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from core.io_utils import atomic_write_bytes
from core.provenance import config_hash

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"GLODKC01"
HASH_LENGTH = 32


class KernelCache:
    """
    One file per config: magic header, config hash, then an npz payload

    A file that fails any check is treated as a miss; the caller recomputes
    and the entry is overwritten.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0

    def key(self, config: Dict[str, Any]) -> str:
        return config_hash(config, length=HASH_LENGTH)

    def path_for(self, config: Dict[str, Any]) -> Path:
        return self.directory / f"{config.get('kernel', 'features')}-{self.key(config)}.glodkc"

    def load(self, config: Dict[str, Any]) -> Optional[List[np.ndarray]]:
        path = self.path_for(config)
        if not path.exists():
            self.misses += 1
            return None
        try:
            raw = path.read_bytes()
            header_size = len(CACHE_MAGIC) + HASH_LENGTH
            if raw[:len(CACHE_MAGIC)] != CACHE_MAGIC:
                raise ValueError("bad magic header")
            if raw[len(CACHE_MAGIC):header_size].decode("ascii") != self.key(config):
                raise ValueError("config hash mismatch")
            with np.load(io.BytesIO(raw[header_size:]), allow_pickle=False) as payload:
                count = int(payload["count"])
                arrays = [payload[f"slice_{i}"] for i in range(count)]
        except Exception as e:
            logger.warning("Ignoring corrupt kernel cache entry %s (%s); recomputing", path, e)
            self.misses += 1
            return None
        self.hits += 1
        logger.debug("Kernel cache hit: %s", path.name)
        return arrays

    def store(self, config: Dict[str, Any], arrays: List[np.ndarray]) -> Path:
        buffer = io.BytesIO()
        payload = {f"slice_{i}": np.asarray(a) for i, a in enumerate(arrays)}
        np.savez(buffer, count=np.array(len(arrays)), **payload)
        blob = CACHE_MAGIC + self.key(config).encode("ascii") + buffer.getvalue()
        path = atomic_write_bytes(self.path_for(config), blob)
        logger.debug("Kernel cache store: %s", path.name)
        return path
