"""
Instance files: a JSON header (dimensions, seed record, noise spec,
measurements, noise and, when known, the ground-truth signal) next to a raw
little-endian float64 blob holding the row-major design matrix.
"""

import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidArgumentError
from .model import NoiseSpec, ProblemInstance, SeedRecord, SparseSignal

FORMAT = "sparsewf-instance"


def _header_and_blob_paths(path: str | Path) -> tuple[Path, Path]:
    """
    >>> [str(p) for p in _header_and_blob_paths("runs/a.json")]
    ['runs/a.json', 'runs/a.bin']
    >>> [str(p) for p in _header_and_blob_paths("runs/a")]
    ['runs/a.json', 'runs/a.bin']
    """
    path = Path(path)
    if path.suffix == ".json":
        return path, path.with_suffix(".bin")
    return path.with_name(path.name + ".json"), path.with_name(path.name + ".bin")


def save_instance(instance: ProblemInstance, path: str | Path) -> Path:
    """
    Write `instance` as <path>.json plus <path>.bin and return the header path.
    """
    header_path, blob_path = _header_and_blob_paths(path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": FORMAT,
        "version": __version__,
        "m": instance.m,
        "p": instance.p,
        "seed": instance.seed.as_json() if instance.seed else None,
        "noise_spec": instance.noise_spec.as_json(),
        "design_blob": blob_path.name,
        "design_dtype": "<f8",
        "measurements": [float(v) for v in instance.measurements],
        "noise": [float(v) for v in instance.noise],
        "signal": instance.signal.as_json() if instance.signal else None,
    }
    with open(header_path, "w") as f:
        json.dump(header, f, indent=2)
    with open(blob_path, "wb") as f:
        f.write(instance.design.astype("<f8").tobytes(order="C"))
    return header_path


def load_instance(path: str | Path) -> ProblemInstance:
    """
    Read an instance written by `save_instance`. The measurement consistency
    check of `ProblemInstance` runs again when the file carries a signal.
    """
    header_path, _ = _header_and_blob_paths(path)
    if not header_path.exists():
        raise InvalidArgumentError(f"Instance file not found: {header_path}")
    with open(header_path) as f:
        header = json.load(f)
    if header.get("format") != FORMAT:
        raise InvalidArgumentError(f"{header_path} is not a sparsewf instance file")

    m, p = int(header["m"]), int(header["p"])
    blob_path = header_path.parent / header["design_blob"]
    raw = blob_path.read_bytes()
    if len(raw) != 8 * m * p:
        raise InvalidArgumentError(
            f"{blob_path} holds {len(raw)} bytes, expected {8 * m * p} for a {m}x{p} design"
        )
    design = np.frombuffer(raw, dtype="<f8").reshape(m, p).astype(np.float64)

    noise_spec = header.get("noise_spec") or {}
    return ProblemInstance(
        design=design,
        measurements=np.asarray(header["measurements"], dtype=np.float64),
        noise=np.asarray(header["noise"], dtype=np.float64),
        noise_spec=NoiseSpec(noise_spec.get("family", "none"), float(noise_spec.get("scale", 0.0))),
        seed=SeedRecord.from_json(header["seed"]) if header.get("seed") else None,
        signal=SparseSignal.from_json(header["signal"]) if header.get("signal") else None,
    )
