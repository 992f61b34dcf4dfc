"""
Versioned text model files.

    dlsvm v1
    classes 3 features 120 bias 1.0
    sd
    b
    qy
    0 0:0.25 17:-0.125 120:0.5
    1 ...
    2 ...
    meta {"context_mode": "labels", ...}
    dictionary 120
    1:<s>
    ...

Weight lines list nonzero weights as ``feature:value``; feature index
``features`` is the bias weight. Floats use repr so they round-trip exactly.
"""

import json
import logging
from pathlib import Path
from typing import Iterator, List, Union

import numpy as np

from ..features.dictionary import FeatureDictionary
from .model import LinearModel
from .solver import SolverParams

logger = logging.getLogger(__name__)

MAGIC = "dlsvm"
FORMAT_VERSION = 1


class ModelFormatError(Exception):
    """Raised when a model file is malformed or truncated."""

    pass


class ModelVersionError(ModelFormatError):
    """Raised when a model file has an unsupported format version."""

    pass


def format_model(model: LinearModel) -> str:
    lines: List[str] = [
        f"{MAGIC} v{FORMAT_VERSION}",
        f"classes {model.n_classes} features {model.n_features} bias {model.bias!r}",
    ]
    lines.extend(model.labels)
    for class_index, row in enumerate(model.weights):
        pairs = " ".join(f"{i}:{float(row[i])!r}" for i in np.flatnonzero(row))
        lines.append(f"{class_index} {pairs}".rstrip())

    meta = dict(model.meta)
    meta["solver"] = model.params.to_dict()
    lines.append("meta " + json.dumps(meta, sort_keys=True))

    keys = model.dictionary.keys() if model.dictionary is not None else []
    lines.append(f"dictionary {len(keys)}")
    lines.extend(keys)
    return "\n".join(lines) + "\n"


def save_model(model: LinearModel, path: Union[str, Path]) -> None:
    """Write `model`; raises OSError if the path is not writable."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_model(model))
    logger.info(f"Saved model with {model.n_classes} classes to {path}")


def _next(lines: Iterator[str], what: str) -> str:
    try:
        return next(lines).rstrip("\n")
    except StopIteration:
        raise ModelFormatError(f"Model file truncated: missing {what}")


def parse_model(text: str) -> LinearModel:
    lines = iter(text.splitlines())

    header = _next(lines, "header").split()
    if len(header) != 2 or header[0] != MAGIC or not header[1].startswith("v"):
        raise ModelFormatError(f"Not a {MAGIC} model file")
    try:
        version = int(header[1][1:])
    except ValueError:
        raise ModelFormatError(f"Bad version tag '{header[1]}'")
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"Unsupported model format version {version} (expected {FORMAT_VERSION})"
        )

    shape = _next(lines, "shape line").split()
    if len(shape) != 6 or shape[0] != "classes" or shape[2] != "features" or shape[4] != "bias":
        raise ModelFormatError("Bad shape line")
    try:
        n_classes, n_features, bias = int(shape[1]), int(shape[3]), float(shape[5])
    except ValueError:
        raise ModelFormatError("Bad shape line")

    labels = [_next(lines, f"label {c}") for c in range(n_classes)]

    weights = np.zeros((n_classes, n_features + 1))
    for class_index in range(n_classes):
        fields = _next(lines, f"weights of class {class_index}").split()
        try:
            if int(fields[0]) != class_index:
                raise ModelFormatError(f"Weight line for class {fields[0]} out of order")
            for pair in fields[1:]:
                feature, value = pair.split(":", 1)
                weights[class_index, int(feature)] = float(value)
        except (ValueError, IndexError):
            raise ModelFormatError(f"Bad weight line for class {class_index}")

    meta_line = _next(lines, "meta line")
    if not meta_line.startswith("meta "):
        raise ModelFormatError("Missing meta line")
    try:
        meta = json.loads(meta_line[5:])
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"Bad meta line: {e}")

    dictionary_line = _next(lines, "dictionary header").split()
    if len(dictionary_line) != 2 or dictionary_line[0] != "dictionary":
        raise ModelFormatError("Missing dictionary header")
    try:
        size = int(dictionary_line[1])
    except ValueError:
        raise ModelFormatError("Bad dictionary header")
    keys = [_next(lines, f"dictionary entry {i}") for i in range(size)]
    dictionary = FeatureDictionary.from_keys(keys) if size else None

    solver = meta.pop("solver", {})
    params = SolverParams.from_dict({**solver, "bias": bias})
    return LinearModel(
        weights=weights,
        labels=tuple(labels),
        params=params,
        dictionary=dictionary,
        meta=meta,
    )


def load_model(path: Union[str, Path]) -> LinearModel:
    with open(path, encoding="utf-8") as f:
        model = parse_model(f.read())
    logger.debug(f"Loaded model from {path}: {model.n_classes} classes, {model.n_features} features")
    return model
