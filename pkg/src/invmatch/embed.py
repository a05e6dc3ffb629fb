"""Entity vector construction.

Companies and investors are turned into fixed-order block vectors:

* company: ``funding_status | description | industry_focus | location``
  (plus ``year_founded`` when enabled)
* investor: ``funding_style | industry_preference | location``

Funding blocks are small categorical encodings over a round vocabulary;
text blocks come from a pluggable text embedding provider. Two provider
slots exist, one for position-sensitive text (descriptions) and one for
bag-like text (industry labels, locations); by default both are served by
the same deterministic hashing stub.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Protocol

import numpy as np

from .config import ConfigError, get_bool, get_float, get_int, get_str
from .corpus import DEFAULT_ROUND_VOCABULARY, CompanyRecord, InvestorRecord

COMPANY_BLOCKS = ("funding_status", "description", "industry_focus", "location")
INVESTOR_BLOCKS = ("funding_style", "industry_preference", "location")
YEAR_BLOCK = "year_founded"

NORMALIZATION_MODES = ("per_block_unit", "none")


class EmbedError(Exception):
    """Raised for encoding contract violations and embedding file problems."""


class TextEmbeddingProvider(Protocol):
    def embed(self, text: str) -> np.ndarray: ...

    def dimension(self) -> int: ...


# ---------------------------------------------------------------------------
# Categorical encoders


def encode_funding_status(
    rounds: Iterable[str], vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY
) -> np.ndarray:
    """Multi-label indicator over the round vocabulary: slot v is 1 iff v was raised."""
    out = np.zeros(len(vocab))
    index = {label: k for k, label in enumerate(vocab)}
    for label in rounds:
        if label not in index:
            raise EmbedError(f"funding round {label!r} not in vocabulary {vocab}")
        out[index[label]] = 1.0
    return out


def encode_funding_style(
    round_deal_counts: Mapping[str, int],
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> np.ndarray:
    """Deal-count distribution over rounds; all-zero for a dealless investor."""
    out = np.zeros(len(vocab))
    index = {label: k for k, label in enumerate(vocab)}
    for label, count in round_deal_counts.items():
        if label not in index:
            raise EmbedError(f"funding round {label!r} not in vocabulary {vocab}")
        if count < 0:
            raise EmbedError(f"negative deal count for round {label!r}")
        out[index[label]] = float(count)
    total = out.sum()
    if total > 0:
        out /= total
    return out


def encode_industry_preference(
    industry_deal_counts: Mapping[str, int], provider: TextEmbeddingProvider
) -> np.ndarray:
    """Deal-count-weighted average of industry label embeddings."""
    total = 0
    for label, count in industry_deal_counts.items():
        if count < 0:
            raise EmbedError(f"negative deal count for industry {label!r}")
        total += count
    out = np.zeros(provider.dimension())
    if total == 0:
        return out
    for label, count in sorted(industry_deal_counts.items()):
        if count:
            out += (count / total) * provider.embed(label)
    return out


# ---------------------------------------------------------------------------
# Text providers

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class HashingTextProvider:
    """Deterministic stand-in for a pretrained text encoder.

    Each distinct token is hashed to a signed one-hot contribution; the
    token-set sum is normalized to unit length. Equal texts always agree,
    and texts sharing tokens land near each other, which is all the
    matching pipeline needs from an encoder.

    A nonempty token set can in principle cancel to the zero vector (two
    tokens, same slot, opposite signs); that degenerate case encodes as
    all-zero, same as empty text.
    """

    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 1:
            raise EmbedError("provider dimension must be >= 1")
        self._dim = dim
        self._seed = seed

    def dimension(self) -> int:
        return self._dim

    def embed(self, text: str) -> np.ndarray:
        out = np.zeros(self._dim)
        for token in set(tokenize(text)):
            digest = hashlib.blake2b(
                f"{self._seed}:{token}".encode("utf-8"), digest_size=8
            ).digest()
            value = int.from_bytes(digest, "big")
            sign = 1.0 if value & 1 else -1.0
            out[(value >> 1) % self._dim] += sign
        norm = float(np.linalg.norm(out))
        if norm > 0:
            out /= norm
        return out


class TableTextProvider:
    """Serves vectors from a loaded embedding table.

    Unknown text raises unless a fallback provider is supplied.
    """

    def __init__(
        self,
        table: Mapping[str, np.ndarray],
        dim: int,
        fallback: TextEmbeddingProvider | None = None,
    ):
        if fallback is not None and fallback.dimension() != dim:
            raise EmbedError(
                f"fallback dimension {fallback.dimension()} != table dimension {dim}"
            )
        self._table = dict(table)
        self._dim = dim
        self._fallback = fallback

    def dimension(self) -> int:
        return self._dim

    def embed(self, text: str) -> np.ndarray:
        hit = self._table.get(text)
        if hit is not None:
            return hit.copy()
        if self._fallback is None:
            raise EmbedError(f"no embedding stored for text {text!r}")
        return self._fallback.embed(text)


def load_embedding_file(path: str | Path) -> tuple[dict[str, np.ndarray], int]:
    """Read the embedding TSV: header ``#dim=D``, rows ``text<TAB>v1,v2,...,vD``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#dim="):
        raise EmbedError(f"{path}:1: expected '#dim=D' header")
    try:
        dim = int(lines[0][len("#dim="):])
    except ValueError as exc:
        raise EmbedError(f"{path}:1: malformed dimension header") from exc
    if dim < 1:
        raise EmbedError(f"{path}:1: dimension must be >= 1")
    table: dict[str, np.ndarray] = {}
    for lineno, raw in enumerate(lines[1:], 2):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) != 2:
            raise EmbedError(f"{path}:{lineno}: expected text<TAB>values")
        text, blob = parts
        try:
            vec = np.array([float(x) for x in blob.split(",")])
        except ValueError as exc:
            raise EmbedError(f"{path}:{lineno}: non-numeric vector entry") from exc
        if vec.shape != (dim,):
            raise EmbedError(
                f"{path}:{lineno}: vector has {vec.size} entries, header says {dim}"
            )
        table[text] = vec
    return table, dim


def write_embedding_file(
    path: str | Path, table: Mapping[str, np.ndarray], dim: int
) -> None:
    rows = []
    for text in sorted(table):
        vec = np.asarray(table[text])
        if vec.shape != (dim,):
            raise EmbedError(f"vector for {text!r} has {vec.size} entries, want {dim}")
        if "\t" in text or "\n" in text:
            raise EmbedError(f"text {text!r} contains tab or newline")
        rows.append(f"{text}\t{','.join(repr(v) for v in vec.tolist())}")
    Path(path).write_text(
        f"#dim={dim}\n" + "".join(row + "\n" for row in rows), encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Entity vectors


@dataclass(frozen=True, eq=False)
class EntityVector:
    """Named, ordered blocks plus their flat concatenation."""

    entity_id: str
    block_names: tuple[str, ...]
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.block_names) != len(self.blocks):
            raise EmbedError("block name/vector count mismatch")
        for arr in self.blocks:
            arr.setflags(write=False)

    @cached_property
    def flat(self) -> np.ndarray:
        out = np.concatenate(self.blocks)
        out.setflags(write=False)
        return out

    def block(self, name: str) -> np.ndarray:
        for bname, arr in zip(self.block_names, self.blocks):
            if bname == name:
                return arr
        raise EmbedError(f"no block named {name!r}")

    def zero_blocks(self, names: Iterable[str]) -> "EntityVector":
        """Copy with the named blocks replaced by zeros; absent names ignored."""
        drop = set(names)
        blocks = tuple(
            np.zeros_like(arr) if bname in drop else arr
            for bname, arr in zip(self.block_names, self.blocks)
        )
        return EntityVector(self.entity_id, self.block_names, blocks)


@dataclass(frozen=True)
class ProviderSlots:
    """Provider bindings: position-sensitive text vs bag-like text."""

    sequence: TextEmbeddingProvider
    bag: TextEmbeddingProvider


@dataclass(frozen=True)
class EmbedConfig:
    """Vector-building knobs, loadable from the flat config file."""

    stub_dimension: int = 64
    stub_seed: int = 0
    block_normalization: str = "per_block_unit"
    include_year: bool = False
    embeddings_file: str = ""
    strict_lookup: bool = False
    block_weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.block_normalization not in NORMALIZATION_MODES:
            raise EmbedError(
                f"unknown normalization {self.block_normalization!r}; "
                f"expected one of {NORMALIZATION_MODES}"
            )
        if self.stub_dimension < 1:
            raise EmbedError("stub_dimension must be >= 1")
        for name, w in self.block_weights.items():
            if w < 0:
                raise EmbedError(f"negative weight for block {name!r}")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "EmbedConfig":
        weights = {}
        for key, value in mapping.items():
            if key.startswith("block_weight_"):
                weights[key[len("block_weight_"):]] = get_float(mapping, key, 0.0)
        return cls(
            stub_dimension=get_int(mapping, "stub_dimension", 64),
            stub_seed=get_int(mapping, "stub_seed", 0),
            block_normalization=get_str(mapping, "block_normalization", "per_block_unit"),
            include_year=get_bool(mapping, "include_year", False),
            embeddings_file=get_str(mapping, "embeddings_file", ""),
            strict_lookup=get_bool(mapping, "strict_lookup", False),
            block_weights=weights,
        )

    def weight(self, block_name: str) -> float:
        return self.block_weights.get(block_name, 1.0)


def build_providers(config: EmbedConfig) -> ProviderSlots:
    """Bind provider slots per config: stored table if given, hashing stub otherwise."""
    stub = HashingTextProvider(config.stub_dimension, config.stub_seed)
    if not config.embeddings_file:
        return ProviderSlots(sequence=stub, bag=stub)
    table, dim = load_embedding_file(config.embeddings_file)
    fallback = None if config.strict_lookup else HashingTextProvider(dim, config.stub_seed)
    provider = TableTextProvider(table, dim, fallback)
    return ProviderSlots(sequence=provider, bag=provider)


def _finish_block(vec: np.ndarray, name: str, config: EmbedConfig) -> np.ndarray:
    if config.block_normalization == "per_block_unit":
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            vec = vec / norm
    w = config.weight(name)
    if w != 1.0:
        vec = vec * w
    return vec


def _embed_text(provider: TextEmbeddingProvider, text: str) -> np.ndarray:
    vec = np.asarray(provider.embed(text), dtype=float)
    want = provider.dimension()
    if vec.shape != (want,):
        raise EmbedError(f"provider returned {vec.size} entries, declared {want}")
    return vec


def build_company_vector(
    record: CompanyRecord,
    providers: ProviderSlots,
    config: EmbedConfig,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> EntityVector:
    """Blocks: funding_status, description, industry_focus, location[, year_founded]."""
    dim = providers.bag.dimension()
    status = encode_funding_status(record.funding_rounds, vocab)
    description = (
        _embed_text(providers.sequence, record.description)
        if record.description.strip()
        else np.zeros(providers.sequence.dimension())
    )
    if record.industry_focus:
        industry = np.zeros(dim)
        for label in record.industry_focus:
            industry += _embed_text(providers.bag, label)
        industry /= len(record.industry_focus)
    else:
        industry = np.zeros(dim)
    location = (
        _embed_text(providers.bag, record.location)
        if record.location.strip()
        else np.zeros(dim)
    )
    names: list[str] = list(COMPANY_BLOCKS)
    blocks = [status, description, industry, location]
    if config.include_year:
        names.append(YEAR_BLOCK)
        blocks.append(np.array([float(record.year_founded)]))
    finished = tuple(_finish_block(b, n, config) for n, b in zip(names, blocks))
    return EntityVector(record.id, tuple(names), finished)


def build_investor_vector(
    record: InvestorRecord,
    providers: ProviderSlots,
    config: EmbedConfig,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> EntityVector:
    """Blocks: funding_style, industry_preference, location."""
    dim = providers.bag.dimension()
    style = encode_funding_style(record.round_deal_counts, vocab)
    industry = encode_industry_preference(record.industry_deal_counts, providers.bag)
    location = (
        _embed_text(providers.bag, record.location)
        if record.location.strip()
        else np.zeros(dim)
    )
    names = INVESTOR_BLOCKS
    blocks = (style, industry, location)
    finished = tuple(_finish_block(b, n, config) for n, b in zip(names, blocks))
    return EntityVector(record.id, names, finished)


def build_all_vectors(
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    config: EmbedConfig,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> tuple[dict[str, EntityVector], dict[str, EntityVector]]:
    """Vectors for a whole corpus, keyed by entity id."""
    providers = build_providers(config)
    company_vectors = {
        rec.id: build_company_vector(rec, providers, config, vocab) for rec in companies
    }
    investor_vectors = {
        rec.id: build_investor_vector(rec, providers, config, vocab) for rec in investors
    }
    for kind, group in (("company", company_vectors), ("investor", investor_vectors)):
        dims = {v.flat.size for v in group.values()}
        if len(dims) > 1:
            raise EmbedError(f"inconsistent {kind} vector dimensions: {sorted(dims)}")
    return company_vectors, investor_vectors
