"""Deterministic artifact writing: JSON reports, CSV tables, run manifests.

Artifacts are written to a temporary file and atomically renamed so a failed
run never leaves a partially overwritten artifact.  No timestamps are
emitted; identical inputs and config produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.unlink(temp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    atomic_write_text(Path(path), json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def write_csv(path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(value) for value in row))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def histogram_rows(values: np.ndarray, bins: int):
    """(bin_left, bin_right, density) rows for plotting."""
    density, edges = np.histogram(np.asarray(values, dtype=np.float64),
                                  bins=bins, density=True)
    return [(edges[i], edges[i + 1], density[i]) for i in range(len(density))]


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(outdir, command: str, config: dict, inputs: list, artifacts: list) -> Path:
    """Record the resolved config, seed, versions and input checksums.

    The output directory itself is deliberately not part of the recorded
    config so reruns into different directories stay byte-identical.
    """
    import platform

    import scipy

    from . import __version__

    manifest = {
        "command": command,
        "config": {k: v for k, v in config.items() if k not in ("outdir", "config")},
        "seed": config.get("seed"),
        "versions": {
            "isingmarket": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "artifacts": sorted(Path(a).name for a in artifacts),  # all live in outdir
    }
    path = Path(outdir) / f"{command}.manifest.json"
    write_json(path, manifest)
    return path
