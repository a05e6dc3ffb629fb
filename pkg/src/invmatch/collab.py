"""Latent factors of the training link matrix.

The 0/1 interaction matrix is factorized with a dense truncated SVD; the
left-factor rows place investors in a low-rank space where proximity means
shared investment behavior. Output is deterministic: numpy's LAPACK SVD is
reproducible for identical input, and a sign convention removes the
remaining per-column ambiguity.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import LinkMatrix

MAGIC = b"LFB1"
DEFAULT_RANK_CAP = 64

# Latent rows below this norm are treated as empty (an investor absent from
# training gets a structurally zero row, up to floating-point noise).
ZERO_ROW_EPS = 1e-12


class CollabError(Exception):
    """Raised for factorization misuse and factor-file corruption."""


@dataclass(frozen=True, eq=False)
class LatentFactors:
    """Truncated SVD triple: u is n x k, s is k, d is m x k."""

    u: np.ndarray
    s: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        if self.u.ndim != 2 or self.d.ndim != 2 or self.s.ndim != 1:
            raise CollabError("malformed factor shapes")
        k = self.s.size
        if self.u.shape[1] != k or self.d.shape[1] != k:
            raise CollabError(
                f"rank mismatch: u has {self.u.shape[1]} columns, "
                f"d has {self.d.shape[1]}, s has {k}"
            )
        if np.any(self.s < 0):
            raise CollabError("negative singular value")
        if np.any(self.s[:-1] < self.s[1:] - 1e-12):
            raise CollabError("singular values not sorted nonincreasing")
        for arr in (self.u, self.s, self.d):
            arr.setflags(write=False)

    @property
    def rank(self) -> int:
        return self.s.size

    @property
    def n_investors(self) -> int:
        return self.u.shape[0]

    @property
    def n_companies(self) -> int:
        return self.d.shape[0]


def link_array(matrix: LinkMatrix) -> np.ndarray:
    out = np.zeros((matrix.n_investors, matrix.n_companies))
    for i, j in matrix.links:
        out[i, j] = 1.0
    return out


def factorize(train: LinkMatrix, rank: int | None = None) -> LatentFactors:
    """Rank-k SVD of the binary train matrix.

    Defaults to k = min(64, min(n, m)). Each u column is flipped so its
    largest-magnitude entry is positive (first occurrence wins on exact
    ties), with the matching d column flipped alongside to preserve the
    product u @ diag(s) @ d.T.
    """
    n, m = train.n_investors, train.n_companies
    if train.n_links == 0:
        raise CollabError("cannot factorize a matrix with zero links")
    k_max = min(n, m)
    k = min(DEFAULT_RANK_CAP, k_max) if rank is None else rank
    if not 1 <= k <= k_max:
        raise CollabError(f"rank {k} out of range [1, {k_max}]")

    u_full, s_full, vt_full = np.linalg.svd(link_array(train), full_matrices=False)
    u = u_full[:, :k].copy()
    s = s_full[:k].copy()
    d = vt_full[:k].T.copy()
    for c in range(k):
        pivot = int(np.argmax(np.abs(u[:, c])))
        if u[pivot, c] < 0:
            u[:, c] = -u[:, c]
            d[:, c] = -d[:, c]
    return LatentFactors(u, s, d)


def latent_similarity(
    factors: LatentFactors, i: int, inv: int, scale_by_s: bool = False
) -> float:
    """Cosine of investor latent rows; 0 when either row is (numerically) zero."""
    n = factors.n_investors
    if not (0 <= i < n and 0 <= inv < n):
        raise CollabError(f"investor index out of range for {n} investors")
    a = factors.u[i]
    b = factors.u[inv]
    if scale_by_s:
        a = a * factors.s
        b = b * factors.s
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na <= ZERO_ROW_EPS or nb <= ZERO_ROW_EPS:
        return 0.0
    return float(a @ b) / (na * nb)


# ---------------------------------------------------------------------------
# Serialization: MAGIC, then k/n/m as little-endian uint32, then u, s, d as
# little-endian float64 row-major.


def save_factors(path: str | Path, factors: LatentFactors) -> None:
    k, n, m = factors.rank, factors.n_investors, factors.n_companies
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", k, n, m))
        fh.write(np.ascontiguousarray(factors.u, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(factors.s, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(factors.d, dtype="<f8").tobytes())


def load_factors(path: str | Path) -> LatentFactors:
    blob = Path(path).read_bytes()
    header = len(MAGIC) + 12
    if len(blob) < header or blob[: len(MAGIC)] != MAGIC:
        raise CollabError(f"{path}: not a factor file (bad magic)")
    k, n, m = struct.unpack("<III", blob[len(MAGIC) : header])
    want = header + 8 * (n * k + k + m * k)
    if len(blob) != want:
        raise CollabError(f"{path}: expected {want} bytes, found {len(blob)}")
    body = np.frombuffer(blob, dtype="<f8", offset=header)
    u = body[: n * k].reshape(n, k).copy()
    s = body[n * k : n * k + k].copy()
    d = body[n * k + k :].reshape(m, k).copy()
    return LatentFactors(u, s, d)
