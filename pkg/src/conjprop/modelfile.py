"""Versioned binary container for trained models.

Layout: one JSON header line (UTF-8, sorted keys, compact separators,
terminated by "\\n"), then the raw bytes of every array in manifest order.
Arrays are little-endian, C-order.  The header carries format name,
version, model kind, a free-form "meta" object (vocabularies, label
inventories, scalar hyperparameters), and the array manifest with name,
dtype, shape, and byte count.  See docs/model_format.md.
"""

from __future__ import annotations

import json

import numpy as np

FORMAT = "conjprop-model"
VERSION = 1

_DTYPES = {"float64": "<f8", "int64": "<i8"}


class ModelFileError(Exception):
    pass


def save_model(path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    manifest = []
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        if arr.dtype == np.float64:
            dtype = "float64"
        elif arr.dtype == np.int64:
            dtype = "int64"
        else:
            raise ModelFileError(f"array {name!r} has unsupported dtype {arr.dtype}")
        raw = arr.astype(_DTYPES[dtype]).tobytes(order="C")
        manifest.append({"name": name, "dtype": dtype,
                         "shape": list(arr.shape), "nbytes": len(raw)})
        blobs.append(raw)
    header = {"format": FORMAT, "version": VERSION, "kind": kind,
              "meta": meta, "arrays": manifest}
    line = json.dumps(header, sort_keys=True, separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(line.encode("utf-8") + b"\n")
        for raw in blobs:
            fh.write(raw)


def load_model(path) -> tuple[str, dict, dict[str, np.ndarray]]:
    """Returns (kind, meta, arrays)."""
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ModelFileError(f"{path}: bad model header: {exc}") from None
        if header.get("format") != FORMAT:
            raise ModelFileError(f"{path}: not a {FORMAT} file")
        if header.get("version") != VERSION:
            raise ModelFileError(
                f"{path}: unsupported version {header.get('version')!r}")
        arrays = {}
        for entry in header["arrays"]:
            raw = fh.read(entry["nbytes"])
            if len(raw) != entry["nbytes"]:
                raise ModelFileError(
                    f"{path}: truncated array {entry['name']!r}")
            arr = np.frombuffer(raw, dtype=_DTYPES[entry["dtype"]])
            arrays[entry["name"]] = arr.reshape(entry["shape"]).copy()
        if fh.read(1):
            raise ModelFileError(f"{path}: trailing bytes after arrays")
    return header["kind"], header["meta"], arrays
