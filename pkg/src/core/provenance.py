"""
Run Provenance
Version string, config hashing and input fingerprints for output manifests
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

GLOD_BENCH_VERSION = "0.4.0"


def config_hash(config: Dict[str, Any], length: int = 12) -> str:
    """Stable short hash of a parameter record"""
    text = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:length]


def file_fingerprint(paths: Iterable[Path]) -> str:
    """SHA-256 over the bytes of the given files, in sorted path order"""
    digest = hashlib.sha256()
    for path in sorted(Path(p) for p in paths):
        digest.update(path.name.encode())
        with open(path, "rb") as handle:
            for chunk in iter(lambda: handle.read(1 << 20), b""):
                digest.update(chunk)
    return digest.hexdigest()


def dataset_fingerprint(dataset) -> str:
    """Fingerprint of the source files for a freshly loaded dataset, else of the in-memory graphs"""
    source: Optional[str] = dataset.metadata.get("source_directory")
    derived = "parent" in dataset.metadata or "class_pair" in dataset.metadata
    if source and not derived and Path(source).is_dir():
        return file_fingerprint(Path(source).glob("*.txt"))
    digest = hashlib.sha256()
    digest.update(dataset.class_labels.tobytes())
    for graph in dataset.graphs:
        digest.update(graph.edges.tobytes())
        digest.update(graph.node_labels.tobytes())
    return digest.hexdigest()


def build_manifest(command: str, config: Dict[str, Any], outputs: Iterable[str],
                   inputs: Optional[Dict[str, str]] = None,
                   extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    manifest = {
        "tool": "glod-bench",
        "version": GLOD_BENCH_VERSION,
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "inputs": inputs or {},
        "outputs": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    return manifest
