"""Token embedding sidecar files and a deterministic test provider.

Sidecar files carry one record per token: sentence id, token id, and the
vector values as text floats.  Multi-layer files (used by the edge
predictor) start with a header line "layers=L dim=D" and store L*D floats
per record; single-layer files have no header and a fixed dimension
inferred from the first record.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .conllu import Sentence, TokenId, parse_token_id


class EmbeddingError(Exception):
    """Lookup or format failure, with the offending sentence/token named."""


class EmbeddingProvider:
    """Maps (sent_id, token_id) to a vector, or to a stack of layer vectors."""

    def __init__(self, table: dict[tuple[str, TokenId], np.ndarray],
                 dim: int, layers: int = 1):
        self.table = table
        self.dim = dim
        self.layers = layers

    def lookup(self, sent_id: str, token_id: TokenId) -> np.ndarray:
        key = (sent_id, token_id)
        if key not in self.table:
            raise EmbeddingError(
                f"no embedding for token {token_id} in sentence {sent_id!r}")
        return self.table[key]

    def lookup_layers(self, sent_id: str, token_id: TokenId) -> np.ndarray:
        """Returns shape (layers, dim); a single-layer table gains an axis."""
        vec = self.lookup(sent_id, token_id)
        if vec.ndim == 1:
            return vec.reshape(1, -1)
        return vec


def read_sidecar(path) -> EmbeddingProvider:
    """Reads a sidecar file, either single-layer or with a layers= header."""
    table: dict[tuple[str, TokenId], np.ndarray] = {}
    layers = 1
    dim = None
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("layers="):
            head = dict(part.split("=", 1) for part in first.split())
            layers = int(head["layers"])
            dim = int(head["dim"])
        elif first.strip():
            _consume_record(first, 1, table, layers, dim)
            dim = next(iter(table.values())).shape[-1]
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            _consume_record(line, lineno, table, layers, dim)
            if dim is None:
                dim = next(iter(table.values())).shape[-1]
    if dim is None:
        raise EmbeddingError(f"empty sidecar file: {path}")
    return EmbeddingProvider(table, dim=dim, layers=layers)


def _consume_record(line, lineno, table, layers, dim):
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise EmbeddingError(
            f"sidecar line {lineno}: expected 3 tab-separated fields, "
            f"got {len(parts)}")
    sent_id, tid_text, values = parts
    try:
        tid = parse_token_id(tid_text)
    except Exception:
        raise EmbeddingError(
            f"sidecar line {lineno}: bad token id {tid_text!r}") from None
    vec = np.array([float(v) for v in values.split()], dtype=np.float64)
    if dim is not None and vec.size != layers * dim:
        raise EmbeddingError(
            f"sidecar line {lineno}: expected {layers * dim} values, "
            f"got {vec.size}")
    if layers > 1:
        vec = vec.reshape(layers, -1)
    table[(sent_id, tid)] = vec


def write_sidecar(path, provider: EmbeddingProvider) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if provider.layers > 1:
            fh.write(f"layers={provider.layers} dim={provider.dim}\n")
        for (sent_id, tid), vec in sorted(
                provider.table.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            flat = vec.reshape(-1)
            values = " ".join(repr(float(v)) for v in flat)
            fh.write(f"{sent_id}\t{tid}\t{values}\n")


def hash_provider(corpus: list[Sentence], dim: int = 16,
                  layers: int = 1, seed: int = 0) -> EmbeddingProvider:
    """Deterministic pseudo-random vectors derived from (seed, sent_id, form).

    Ships so that embedding-consuming models can run without any external
    encoder.  Values are uniform in [-1, 1) and stable across runs and
    platforms.
    """
    table: dict[tuple[str, TokenId], np.ndarray] = {}
    for idx, sent in enumerate(corpus):
        sid = sent.sent_id or str(idx)
        for tok in sent.tokens:
            key = f"{seed}\x00{sid}\x00{tok.id}\x00{tok.form}"
            vec = _hash_floats(key, layers * dim)
            if layers > 1:
                vec = vec.reshape(layers, dim)
            table[(sid, tok.id)] = vec
    return EmbeddingProvider(table, dim=dim, layers=layers)


def _hash_floats(key: str, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.float64)
    blob = b""
    block = 0
    while len(blob) < count * 8:
        blob += hashlib.sha256(f"{key}\x00{block}".encode()).digest()
        block += 1
    for i in range(count):
        (word,) = struct.unpack_from("<Q", blob, i * 8)
        out[i] = (word / 2**64) * 2.0 - 1.0
    return out
