"""File formats used by the CLI: CSV tables and JSON model files.

CSV tables are UTF-8 and comma-separated with an optional single header row;
a final integer column named ``label`` (by header name) is read as labels.
Numbers are written with 17 significant digits so values survive a round
trip exactly. Model files are JSON; Python's float repr in JSON is already
shortest-round-trip, so numeric fields reload bit-exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datamodel import DataMatrix
from .errors import InvalidInputError
from .methods import ComponentModel

MODEL_FORMAT_VERSION = 1


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def read_csv(path) -> DataMatrix:
    """Read a data table; returns values and, when present, labels."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise InvalidInputError(f"{path}: file contains no data")

    def parses_as_float(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = None
    if not all(parses_as_float(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise InvalidInputError(f"{path}: header but no data rows")

    width = len(rows[0])
    has_label = header is not None and width >= 2 and header[-1].lower() == "label"

    values = []
    labels = [] if has_label else None
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise InvalidInputError(
                f"{path}: row {lineno} has {len(row)} cells, expected {width}")
        try:
            cells = [float(c) for c in row]
        except ValueError as exc:
            raise InvalidInputError(f"{path}: row {lineno}: {exc}") from exc
        if has_label:
            lab = cells[-1]
            if not lab.is_integer():
                raise InvalidInputError(
                    f"{path}: row {lineno}: label {row[-1]!r} is not an integer")
            labels.append(int(lab))
            cells = cells[:-1]
        if not all(np.isfinite(cells)):
            raise InvalidInputError(f"{path}: row {lineno} contains a non-finite value")
        values.append(cells)
    return DataMatrix(np.asarray(values, dtype=np.float64),
                      labels=None if labels is None else np.asarray(labels, dtype=np.int64))


def _write_table(path, values: np.ndarray, labels, header: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(values.shape[0]):
            cells = [_fmt(v) for v in values[i]]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")


def write_data_csv(path, data: DataMatrix) -> None:
    """Write a dataset with generic feature headers (and a label column if any)."""
    header = [f"f{j + 1}" for j in range(data.n_features)]
    if data.labels is not None:
        header.append("label")
    _write_table(path, data.values, data.labels, header)


def write_embedding_csv(path, coordinates: np.ndarray, labels=None) -> None:
    """Write projected coordinates with component_i headers."""
    coords = np.asarray(coordinates, dtype=np.float64)
    header = [f"component_{j + 1}" for j in range(coords.shape[1])]
    if labels is not None:
        header.append("label")
    _write_table(path, coords, labels, header)


@dataclass(frozen=True)
class ModelFile:
    """A serialized fit: the model plus CLI-level context.

    ``feature_scale`` is the per-feature divisor applied before fitting when
    z-scoring was requested (None otherwise); transform must re-apply it.
    ``provenance`` records input file names, the seed, and a timestamp, and
    carries no numeric content.
    """

    model: ComponentModel
    feature_scale: np.ndarray | None = None
    provenance: dict | None = None


def save_model(path, model: ComponentModel, feature_scale=None, provenance=None) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "method": model.method,
        "n_features": model.n_features,
        "n_components": model.n_components,
        "alpha": model.alpha,
        "target_mean": model.target_mean.tolist(),
        "background_mean": None if model.background_mean is None else model.background_mean.tolist(),
        "feature_scale": None if feature_scale is None else np.asarray(feature_scale, dtype=np.float64).tolist(),
        "components": model.components.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "regularization": {
            "ridge_target": model.ridge_target,
            "ridge_background": model.ridge_background,
            "floor_rel": model.floor_rel,
        },
        "provenance": provenance or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path) -> ModelFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not a valid model file: {exc}") from exc
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise InvalidInputError(
            f"{path}: unsupported model format version {version!r}")
    try:
        reg = doc.get("regularization", {})
        model = ComponentModel(
            method=doc["method"],
            components=np.asarray(doc["components"], dtype=np.float64),
            eigenvalues=np.asarray(doc["eigenvalues"], dtype=np.float64),
            target_mean=np.asarray(doc["target_mean"], dtype=np.float64),
            alpha=doc.get("alpha"),
            background_mean=None if doc.get("background_mean") is None
            else np.asarray(doc["background_mean"], dtype=np.float64),
            ridge_target=reg.get("ridge_target", 0.0),
            ridge_background=reg.get("ridge_background"),
            floor_rel=reg.get("floor_rel"),
        )
    except KeyError as exc:
        raise InvalidInputError(f"{path}: model file is missing field {exc}") from exc
    except (TypeError, ValueError, AttributeError) as exc:
        raise InvalidInputError(f"{path}: malformed model file: {exc}") from exc
    scale = doc.get("feature_scale")
    return ModelFile(
        model=model,
        feature_scale=None if scale is None else np.asarray(scale, dtype=np.float64),
        provenance=doc.get("provenance") or {},
    )


def ensure_parent(path) -> Path:
    """Create the parent directory of an output path if needed."""
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p
