"""
Result files: CSV through pandas, JSON mirrors, and the run-metadata sidecar.

Data files never carry timestamps, so a fixed config always reproduces the
same bytes. Every write goes to a temporary sibling first and is moved into
place with os.replace.
"""

import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.15g"


def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    logger.info(f"Wrote {path}")
    return path


def _plain(value):
    """numpy scalars/arrays and complex numbers -> JSON-native values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(data, path) -> Path:
    return _atomic_write(Path(path), json.dumps(_plain(data), indent=2, sort_keys=True) + "\n")


def write_frame(frame: pd.DataFrame, path) -> Path:
    return _atomic_write(Path(path), frame.to_csv(index=False, float_format=FLOAT_FORMAT))


def write_distribution(dist, w, out_dir, name: str, fmt: str = "csv", scale: float = 1.0) -> list[Path]:
    """
    Sample dist on w and write it. `scale` reports energies in units of scale
    (w / scale and pdf * scale); the mirror keeps the unscaled terms.
    """
    out_dir = Path(out_dir)
    w = np.asarray(w, dtype=float)
    frame = pd.DataFrame({"w": w / scale, "pdf": dist.evaluate(w) * scale})
    mirror = dist.to_json()
    if fmt == "json":
        return [write_json({**mirror, "samples": frame.to_dict(orient="list"), "unit": scale},
                           out_dir / f"{name}.json")]
    return [write_frame(frame, out_dir / f"{name}.csv"),
            write_json({**mirror, "unit": scale}, out_dir / f"{name}.terms.json")]


def write_metadata(out_dir, command: str, config_path: str | None, seed: int | None, **extra) -> Path:
    meta = {
        "command": command,
        "config": str(config_path) if config_path else None,
        "seed": seed,
        "created_at": datetime.now(timezone.utc).isoformat(),
        **extra,
    }
    return write_json(meta, Path(out_dir) / "run_metadata.json")
