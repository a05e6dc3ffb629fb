"""Pair scoring: content score, collaborative score, gated final blend.

For a candidate pair (investor i, company j):

* content score CBS: the best cosine between j's vector and the vectors of
  companies already in i's training portfolio; the argmax company is CC and
  the first sentence of its description is CCB.
* collaborative score CB: over j's previous investors (i excluded), the
  best blend w1*sim1 + w2*sim2, where sim1 compares latent rows from the
  factorized link matrix and sim2 compares investor feature vectors; the
  argmax investor is CI.
* final score FS: w_CBS*CBS + w_CB*CB when CB clears the gate threshold,
  otherwise CBS alone. A link is predicted when FS exceeds link_threshold.

Maxima start from 0, so CBS and CB are never negative and the argmax ids
stay empty unless some similarity is strictly positive. Exact score ties
resolve to the lexicographically smallest id.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .collab import ZERO_ROW_EPS, LatentFactors, factorize
from .config import get_bool, get_float
from .corpus import DEFAULT_ROUND_VOCABULARY, CompanyRecord, InvestorRecord, LinkMatrix
from .embed import EmbedConfig, EntityVector, build_all_vectors

BREAKDOWN_HEADER = (
    "investor_id\tcompany_id\tCBS\tCC\tCB\tCI\tsim1\tsim2\tFS\tlink_predicted"
)


class ScoreError(Exception):
    """Raised for inconsistent scoring inputs."""


@dataclass(frozen=True)
class ScoreConfig:
    """Blend weights and thresholds.

    w1 + w2 and w_cbs + w_cb must each sum to 1; this is checked at
    construction, so config files with drifted weights fail fast.
    """

    w1: float = 0.5
    w2: float = 0.5
    w_cbs: float = 0.5
    w_cb: float = 0.5
    cb_thresh: float = 0.5
    link_threshold: float = 0.75
    scale_by_s: bool = False

    def __post_init__(self) -> None:
        for name in ("w1", "w2", "w_cbs", "w_cb"):
            if getattr(self, name) < 0:
                raise ScoreError(f"{name} must be nonnegative")
        if abs(self.w1 + self.w2 - 1.0) > 1e-9:
            raise ScoreError(f"w1 + w2 must equal 1, got {self.w1 + self.w2}")
        if abs(self.w_cbs + self.w_cb - 1.0) > 1e-9:
            raise ScoreError(
                f"w_CBS + w_CB must equal 1, got {self.w_cbs + self.w_cb}"
            )

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ScoreConfig":
        return cls(
            w1=get_float(mapping, "w1", 0.5),
            w2=get_float(mapping, "w2", 0.5),
            w_cbs=get_float(mapping, "w_cbs", 0.5),
            w_cb=get_float(mapping, "w_cb", 0.5),
            cb_thresh=get_float(mapping, "cb_thresh", 0.5),
            link_threshold=get_float(mapping, "link_threshold", 0.75),
            scale_by_s=get_bool(mapping, "scale_by_s", False),
        )


@dataclass(frozen=True)
class ScoreBreakdown:
    """Every intermediate the explanation engine needs, for one pair."""

    investor_id: str
    company_id: str
    cbs: float
    cc: str
    ccb: str
    cb: float
    ci: str
    sim1: float
    sim2: float
    fs: float
    gate_open: bool
    link_predicted: bool


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|), 0 when either norm is zero."""
    if a.shape != b.shape:
        raise ScoreError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b) / (na * nb)


_SENTENCE_END = re.compile(r"[.?!](?=\s|$)")


def first_sentence(text: str) -> str:
    """Text up to (excluding) the first sentence terminator; all of it if none.

    A terminator is '.', '?' or '!' followed by whitespace or end of text.
    """
    m = _SENTENCE_END.search(text)
    return (text[: m.start()] if m else text).strip()


def final_score(cbs: float, cb: float, config: ScoreConfig) -> float:
    if cb > config.cb_thresh:
        return config.w_cbs * cbs + config.w_cb * cb
    return cbs


def _unit_rows(mat: np.ndarray, eps: float = 0.0) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    safe = np.where(norms > eps, norms, 1.0)
    out = mat / safe
    out[norms[:, 0] <= eps] = 0.0
    return out


# Candidates this close to the maximum count as tied. Mathematically equal
# similarities can round differently under different summation orders; a
# strict float comparison would then make the argmax identity depend on
# whether scoring ran vectorized or element-wise.
TIE_EPS = 1e-12


def _best(values: np.ndarray, ids: Sequence[str]) -> tuple[float, str, int]:
    """Max against an initial 0; ties go to the smallest id.

    ids must be lexicographically sorted. Any strictly positive candidate
    within TIE_EPS of the maximum ties with it, and the first such wins.
    Returns (score, id, position), with ("", -1) when nothing is positive.
    """
    if len(values) == 0:
        return 0.0, "", -1
    top = float(values.max())
    if top <= 0.0:
        return 0.0, "", -1
    eligible = np.flatnonzero((values >= top - TIE_EPS) & (values > 0.0))
    pos = int(eligible[0])
    return float(values[pos]), ids[pos], pos


class Scorer:
    """Immutable scoring engine over prebuilt artifacts.

    All candidate lists are pre-sorted by entity id so that argmax tie-breaks
    fall out of first-occurrence semantics. Instances are safe to share
    across threads; every query is a pure read.
    """

    def __init__(
        self,
        train: LinkMatrix,
        company_vectors: dict[str, EntityVector],
        investor_vectors: dict[str, EntityVector],
        factors: LatentFactors,
        config: ScoreConfig,
        descriptions: dict[str, str],
    ):
        if factors.n_investors != train.n_investors or factors.n_companies != train.n_companies:
            raise ScoreError(
                f"factors trained on {factors.n_investors}x{factors.n_companies}, "
                f"matrix is {train.n_investors}x{train.n_companies}"
            )
        missing = [cid for cid in train.company_ids if cid not in company_vectors]
        missing += [iid for iid in train.investor_ids if iid not in investor_vectors]
        if missing:
            raise ScoreError(f"missing vectors for: {missing[:5]}")

        self.train = train
        self.config = config
        self.descriptions = descriptions

        self._comp_mat = np.stack(
            [company_vectors[cid].flat for cid in train.company_ids]
        )
        self._inv_mat = np.stack(
            [investor_vectors[iid].flat for iid in train.investor_ids]
        )
        self._comp_unit = _unit_rows(self._comp_mat)
        self._inv_unit = _unit_rows(self._inv_mat)
        latent = factors.u * factors.s if config.scale_by_s else factors.u
        self._latent_unit = _unit_rows(np.asarray(latent), eps=ZERO_ROW_EPS)

        def by_company_id(idx: int) -> str:
            return train.company_ids[idx]

        def by_investor_id(idx: int) -> str:
            return train.investor_ids[idx]

        self._portfolio: list[np.ndarray] = [
            np.array(sorted(train.portfolio_of(i), key=by_company_id), dtype=int)
            for i in range(train.n_investors)
        ]
        self._backers: list[np.ndarray] = [
            np.array(sorted(train.backers_of(j), key=by_investor_id), dtype=int)
            for j in range(train.n_companies)
        ]

    # -- single pair -------------------------------------------------------

    def _indices(self, investor_id: str, company_id: str) -> tuple[int, int]:
        try:
            i = self.train.investor_index[investor_id]
        except KeyError:
            raise ScoreError(f"unknown investor id {investor_id!r}") from None
        try:
            j = self.train.company_index[company_id]
        except KeyError:
            raise ScoreError(f"unknown company id {company_id!r}") from None
        return i, j

    def content_score(self, investor_id: str, company_id: str) -> tuple[float, str, str]:
        """(CBS, CC, CCB) for one pair."""
        i, j = self._indices(investor_id, company_id)
        cbs, cc, _ = self._content_from_indices(i, j)
        return cbs, cc, self._ccb(cc)

    def collaborative_score(
        self, investor_id: str, company_id: str
    ) -> tuple[float, str, float, float]:
        """(CB, CI, sim1, sim2) for one pair."""
        i, j = self._indices(investor_id, company_id)
        return self._collab_from_indices(i, j)

    def score_pair(self, investor_id: str, company_id: str) -> ScoreBreakdown:
        i, j = self._indices(investor_id, company_id)
        return self._score_indices(i, j)

    def _content_from_indices(self, i: int, j: int) -> tuple[float, str, int]:
        portfolio = self._portfolio[i]
        if portfolio.size == 0:
            return 0.0, "", -1
        sims = self._comp_unit[portfolio] @ self._comp_unit[j]
        ids = [self.train.company_ids[p] for p in portfolio]
        score, cc, pos = _best(sims, ids)
        return score, cc, pos

    def _collab_from_indices(self, i: int, j: int) -> tuple[float, str, float, float]:
        cand = self._backers[j]
        cand = cand[cand != i]
        if cand.size == 0:
            return 0.0, "", 0.0, 0.0
        sim1 = self._latent_unit[cand] @ self._latent_unit[i]
        sim2 = self._inv_unit[cand] @ self._inv_unit[i]
        blended = self.config.w1 * sim1 + self.config.w2 * sim2
        ids = [self.train.investor_ids[p] for p in cand]
        cb, ci, pos = _best(blended, ids)
        if pos < 0:
            return 0.0, "", 0.0, 0.0
        return cb, ci, float(sim1[pos]), float(sim2[pos])

    def _ccb(self, cc: str) -> str:
        if not cc:
            return ""
        return first_sentence(self.descriptions.get(cc, ""))

    def _score_indices(self, i: int, j: int) -> ScoreBreakdown:
        cbs, cc, _ = self._content_from_indices(i, j)
        cb, ci, sim1, sim2 = self._collab_from_indices(i, j)
        fs = final_score(cbs, cb, self.config)
        gate = cb > self.config.cb_thresh
        return ScoreBreakdown(
            investor_id=self.train.investor_ids[i],
            company_id=self.train.company_ids[j],
            cbs=cbs,
            cc=cc,
            ccb=self._ccb(cc),
            cb=cb,
            ci=ci,
            sim1=sim1,
            sim2=sim2,
            fs=fs,
            gate_open=gate,
            link_predicted=fs > self.config.link_threshold,
        )

    # -- bulk --------------------------------------------------------------

    def score_all(self, jobs: int = 1) -> Iterator[ScoreBreakdown]:
        """Every pair, investor-major in id order; companies id-ordered within.

        jobs > 1 splits work across threads per investor; ordering and
        values are independent of the thread count.
        """
        inv_ids = sorted(self.train.investor_ids)
        comp_ids = sorted(self.train.company_ids)

        def row(investor_id: str) -> list[ScoreBreakdown]:
            i = self.train.investor_index[investor_id]
            return [
                self._score_indices(i, self.train.company_index[cid])
                for cid in comp_ids
            ]

        if jobs <= 1:
            for iid in inv_ids:
                yield from row(iid)
            return
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(row, inv_ids):
                yield from result

    def score_pairs(
        self, pairs: Iterable[tuple[str, str]], jobs: int = 1
    ) -> list[ScoreBreakdown]:
        """Breakdowns for the given pairs, in the given order."""
        pair_list = list(pairs)
        if jobs <= 1:
            return [self.score_pair(a, b) for a, b in pair_list]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda p: self.score_pair(*p), pair_list))

    def recommend(
        self, entity_id: str, direction: str, top_n: int
    ) -> list[tuple[str, float]]:
        """Counterparts ranked by FS descending (ties by id), train links excluded."""
        if top_n < 1:
            raise ScoreError("top_n must be >= 1")
        if direction == "companies_for_investor":
            if entity_id not in self.train.investor_index:
                raise ScoreError(f"unknown investor id {entity_id!r}")
            i = self.train.investor_index[entity_id]
            taken = set(self._portfolio[i])
            scored = [
                (cid, self._score_indices(i, self.train.company_index[cid]).fs)
                for cid in sorted(self.train.company_ids)
                if self.train.company_index[cid] not in taken
            ]
        elif direction == "investors_for_company":
            if entity_id not in self.train.company_index:
                raise ScoreError(f"unknown company id {entity_id!r}")
            j = self.train.company_index[entity_id]
            taken = set(self._backers[j])
            scored = [
                (iid, self._score_indices(self.train.investor_index[iid], j).fs)
                for iid in sorted(self.train.investor_ids)
                if self.train.investor_index[iid] not in taken
            ]
        else:
            raise ScoreError(f"unknown direction {direction!r}")
        scored.sort(key=lambda item: (-item[1], item[0]))
        return scored[:top_n]


def build_scorer(
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    train: LinkMatrix,
    score_config: ScoreConfig,
    embed_config: EmbedConfig,
    rank: int | None = None,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
    factors: LatentFactors | None = None,
) -> Scorer:
    """Assemble a Scorer from records: vectors, factorization, bookkeeping."""
    company_vectors, investor_vectors = build_all_vectors(
        companies, investors, embed_config, vocab
    )
    if factors is None:
        factors = factorize(train, rank)
    descriptions = {rec.id: rec.description for rec in companies}
    return Scorer(train, company_vectors, investor_vectors, factors, score_config, descriptions)


# ---------------------------------------------------------------------------
# Breakdown TSV


def format_breakdown_row(b: ScoreBreakdown) -> str:
    return "\t".join(
        (
            b.investor_id,
            b.company_id,
            f"{b.cbs:.6f}",
            b.cc,
            f"{b.cb:.6f}",
            b.ci,
            f"{b.sim1:.6f}",
            f"{b.sim2:.6f}",
            f"{b.fs:.6f}",
            "true" if b.link_predicted else "false",
        )
    )


def write_breakdowns(path: str | Path, rows: Iterable[ScoreBreakdown]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(BREAKDOWN_HEADER + "\n")
        for b in rows:
            fh.write(format_breakdown_row(b) + "\n")


def read_breakdowns(path: str | Path, config: ScoreConfig) -> list[ScoreBreakdown]:
    """Parse a breakdown TSV back; gate/CCB are not stored, gate is recomputed."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != BREAKDOWN_HEADER:
        raise ScoreError(f"{path}: missing or wrong breakdown header")
    out = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 10:
            raise ScoreError(f"{path}:{lineno}: expected 10 columns")
        try:
            cbs, cb, sim1, sim2, fs = (
                float(parts[2]), float(parts[4]),
                float(parts[6]), float(parts[7]), float(parts[8]),
            )
        except ValueError as exc:
            raise ScoreError(f"{path}:{lineno}: non-numeric score") from exc
        if parts[9] not in ("true", "false"):
            raise ScoreError(f"{path}:{lineno}: bad link_predicted flag")
        out.append(
            ScoreBreakdown(
                investor_id=parts[0], company_id=parts[1],
                cbs=cbs, cc=parts[3], ccb="",
                cb=cb, ci=parts[5], sim1=sim1, sim2=sim2, fs=fs,
                gate_open=cb > config.cb_thresh,
                link_predicted=parts[9] == "true",
            )
        )
    return out


def breakdown_consistent(b: ScoreBreakdown, config: ScoreConfig, tol: float = 1e-12) -> bool:
    """Does the stored FS obey the gate law for the given config?"""
    if b.gate_open:
        return math.isclose(
            b.fs, config.w_cbs * b.cbs + config.w_cb * b.cb, abs_tol=tol
        )
    return b.fs == b.cbs
