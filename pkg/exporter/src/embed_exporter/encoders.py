"""Encoder registry: a builtin hash encoder plus locally installed models."""

import hashlib
import re

import numpy as np

_HASH_NAME = re.compile(r"hash-(\d+)")
_TOKEN = re.compile(r"[^\W_]+")


class EncoderError(Exception):
    """Encoder name unknown or its backing model cannot be loaded."""


class HashEncoder:
    """Deterministic bag-of-tokens encoder, one signed axis per token hash.

    Stands in for a sentence model when determinism matters more than
    semantics: equal texts map to equal unit vectors, disjoint token sets
    map to nearly orthogonal ones, and no model files are needed.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise EncoderError("hash encoder dimension must be >= 1")
        self.dim = dim

    def encode_batch(self, texts) -> list[np.ndarray]:
        return [self._encode(text) for text in texts]

    def _encode(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for token in _TOKEN.findall(text.lower()):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            raw = int.from_bytes(digest, "big")
            vec[(raw >> 1) % self.dim] += 1.0 if raw & 1 else -1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


class SentenceModelEncoder:
    """Adapter around a sentence-transformers model installed on this machine."""

    def __init__(self, name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                f"encoder {name!r} needs the sentence-transformers package"
            ) from exc
        try:
            self._model = SentenceTransformer(name)
        except Exception as exc:  # the loader raises assorted error types
            raise EncoderError(f"could not load encoder {name!r}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode_batch(self, texts) -> list[np.ndarray]:
        return [np.asarray(row, dtype=float) for row in self._model.encode(list(texts))]


def resolve_encoder(name: str):
    """``hash-D`` builds the builtin; any other name loads a local model."""
    match = _HASH_NAME.fullmatch(name)
    if match:
        return HashEncoder(int(match.group(1)))
    return SentenceModelEncoder(name)
