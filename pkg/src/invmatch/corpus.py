"""Corpus data model, file ingestion, link splitting, and synthetic data.

The on-disk corpus is a directory with three UTF-8 files:

* ``companies.jsonl``  -- one company record object per line
* ``investors.jsonl``  -- one investor record object per line
* ``links.tsv``        -- one ``investor_id<TAB>company_id`` line per
  historical investment

All objects constructed here are immutable and safe for concurrent reads.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

DEFAULT_ROUND_VOCABULARY: tuple[str, ...] = (
    "Seed",
    "Series A",
    "Series B",
    "Series C",
    "Later",
)

COMPANIES_FILE = "companies.jsonl"
INVESTORS_FILE = "investors.jsonl"
LINKS_FILE = "links.tsv"

CORPUS_FORMATS = ("jsonl",)


class CorpusError(Exception):
    """Raised for malformed or referentially inconsistent corpus data."""


@dataclass(frozen=True)
class CompanyRecord:
    """Raw attribute bundle for one company."""

    id: str
    description: str
    industry_focus: tuple[str, ...]
    year_founded: int
    location: str
    funding_rounds: frozenset[str]

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("company id must be nonempty")

    def validate_rounds(self, vocab: tuple[str, ...]) -> None:
        unknown = self.funding_rounds - set(vocab)
        if unknown:
            raise CorpusError(
                f"company {self.id!r}: rounds {sorted(unknown)} not in vocabulary"
            )


@dataclass(frozen=True)
class InvestorRecord:
    """Raw attribute bundle for one investor.

    Both count maps may be empty: a cold-start investor is legal.
    """

    id: str
    round_deal_counts: dict[str, int]
    industry_deal_counts: dict[str, int]
    location: str

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("investor id must be nonempty")
        for name, counts in (
            ("round_deal_counts", self.round_deal_counts),
            ("industry_deal_counts", self.industry_deal_counts),
        ):
            for key, value in counts.items():
                if value < 0:
                    raise CorpusError(
                        f"investor {self.id!r}: negative {name} for {key!r}"
                    )


@dataclass(frozen=True)
class LinkMatrix:
    """Sparse binary investor x company interaction matrix.

    ``links`` holds (investor_index, company_index) pairs; presence means a
    historical investment.
    """

    investor_ids: tuple[str, ...]
    company_ids: tuple[str, ...]
    links: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if len(set(self.investor_ids)) != len(self.investor_ids):
            raise CorpusError("duplicate investor ids in matrix")
        if len(set(self.company_ids)) != len(self.company_ids):
            raise CorpusError("duplicate company ids in matrix")
        n, m = len(self.investor_ids), len(self.company_ids)
        for i, j in self.links:
            if not (0 <= i < n and 0 <= j < m):
                raise CorpusError(f"link index ({i}, {j}) out of range for {n}x{m}")

    @property
    def n_investors(self) -> int:
        return len(self.investor_ids)

    @property
    def n_companies(self) -> int:
        return len(self.company_ids)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @cached_property
    def investor_index(self) -> dict[str, int]:
        return {iid: idx for idx, iid in enumerate(self.investor_ids)}

    @cached_property
    def company_index(self) -> dict[str, int]:
        return {cid: idx for idx, cid in enumerate(self.company_ids)}

    @cached_property
    def _portfolios(self) -> dict[int, tuple[int, ...]]:
        rows: dict[int, list[int]] = {}
        for i, j in self.links:
            rows.setdefault(i, []).append(j)
        return {i: tuple(sorted(js)) for i, js in rows.items()}

    @cached_property
    def _backers(self) -> dict[int, tuple[int, ...]]:
        cols: dict[int, list[int]] = {}
        for i, j in self.links:
            cols.setdefault(j, []).append(i)
        return {j: tuple(sorted(res)) for j, res in cols.items()}

    def portfolio_of(self, investor_index: int) -> tuple[int, ...]:
        """Company indices this investor has invested in, ascending."""
        return self._portfolios.get(investor_index, ())

    def backers_of(self, company_index: int) -> tuple[int, ...]:
        """Investor indices that invested in this company, ascending."""
        return self._backers.get(company_index, ())

    def has_link(self, investor_index: int, company_index: int) -> bool:
        return (investor_index, company_index) in self.links

    def id_pairs(self) -> list[tuple[str, str]]:
        """All links as (investor_id, company_id), in canonical index order."""
        return [
            (self.investor_ids[i], self.company_ids[j])
            for i, j in sorted(self.links)
        ]

    def with_links(self, links: frozenset[tuple[int, int]]) -> "LinkMatrix":
        return LinkMatrix(self.investor_ids, self.company_ids, links)

    def restrict_investors(self, keep_ids: list[str]) -> "LinkMatrix":
        """Sub-matrix over the given investors (companies unchanged)."""
        index = self.investor_index
        missing = [iid for iid in keep_ids if iid not in index]
        if missing:
            raise CorpusError(f"unknown investor ids: {missing[:5]}")
        old_rows = [index[iid] for iid in keep_ids]
        remap = {old: new for new, old in enumerate(old_rows)}
        links = frozenset(
            (remap[i], j) for i, j in self.links if i in remap
        )
        return LinkMatrix(tuple(keep_ids), self.company_ids, links)


@dataclass(frozen=True)
class SplitSpec:
    """Parameters for the train/test link split."""

    train_fraction: float = 0.7
    rng_seed: int = 0
    negatives_per_positive: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.train_fraction < 1.0):
            raise CorpusError("train_fraction must be in (0, 1)")
        if self.negatives_per_positive < 0:
            raise CorpusError("negatives_per_positive must be >= 0")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str], seed: int | None = None) -> "SplitSpec":
        from . import config as _cfg

        return cls(
            train_fraction=_cfg.get_float(mapping, "train_fraction", 0.7),
            rng_seed=seed if seed is not None else _cfg.get_int(mapping, "split_seed", 0),
            negatives_per_positive=_cfg.get_float(mapping, "negatives_per_positive", 1.0),
        )


# ---------------------------------------------------------------------------
# Ingestion


def _parse_jsonl(path: Path) -> list[tuple[int, dict]]:
    rows = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise CorpusError(f"{path}:{lineno}: expected an object")
        rows.append((lineno, obj))
    return rows


def _require(obj: dict, key: str, path: Path, lineno: int):
    if key not in obj:
        raise CorpusError(f"{path}:{lineno}: missing field {key!r}")
    return obj[key]


def load_corpus(
    path: str | Path, format: str = "jsonl"
) -> tuple[list[CompanyRecord], list[InvestorRecord], LinkMatrix]:
    """Read a corpus directory and verify referential integrity.

    Every link endpoint must resolve to a record; ids must be unique.
    Record order (and hence matrix index order) follows file order.
    """
    if format not in CORPUS_FORMATS:
        raise CorpusError(f"unknown corpus format {format!r}; expected one of {CORPUS_FORMATS}")
    root = Path(path)
    for name in (COMPANIES_FILE, INVESTORS_FILE, LINKS_FILE):
        if not (root / name).is_file():
            raise CorpusError(f"missing corpus file: {root / name}")

    companies: list[CompanyRecord] = []
    comp_path = root / COMPANIES_FILE
    for lineno, obj in _parse_jsonl(comp_path):
        companies.append(
            CompanyRecord(
                id=str(_require(obj, "id", comp_path, lineno)),
                description=str(_require(obj, "description", comp_path, lineno)),
                industry_focus=tuple(_require(obj, "industry_focus", comp_path, lineno)),
                year_founded=int(_require(obj, "year_founded", comp_path, lineno)),
                location=str(_require(obj, "location", comp_path, lineno)),
                funding_rounds=frozenset(_require(obj, "funding_rounds", comp_path, lineno)),
            )
        )

    investors: list[InvestorRecord] = []
    inv_path = root / INVESTORS_FILE
    for lineno, obj in _parse_jsonl(inv_path):
        investors.append(
            InvestorRecord(
                id=str(_require(obj, "id", inv_path, lineno)),
                round_deal_counts={
                    str(k): int(v)
                    for k, v in _require(obj, "round_deal_counts", inv_path, lineno).items()
                },
                industry_deal_counts={
                    str(k): int(v)
                    for k, v in _require(obj, "industry_deal_counts", inv_path, lineno).items()
                },
                location=str(_require(obj, "location", inv_path, lineno)),
            )
        )

    for kind, records in (("company", companies), ("investor", investors)):
        seen: set[str] = set()
        for rec in records:
            if rec.id in seen:
                raise CorpusError(f"duplicate {kind} id: {rec.id!r}")
            seen.add(rec.id)

    investor_ids = tuple(rec.id for rec in investors)
    company_ids = tuple(rec.id for rec in companies)
    inv_index = {iid: k for k, iid in enumerate(investor_ids)}
    comp_index = {cid: k for k, cid in enumerate(company_ids)}

    links: set[tuple[int, int]] = set()
    links_path = root / LINKS_FILE
    for lineno, raw in enumerate(links_path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorpusError(f"{links_path}:{lineno}: expected investor_id<TAB>company_id")
        inv_id, comp_id = parts
        if inv_id not in inv_index:
            raise CorpusError(f"{links_path}:{lineno}: dangling link to unknown investor {inv_id!r}")
        if comp_id not in comp_index:
            raise CorpusError(f"{links_path}:{lineno}: dangling link to unknown company {comp_id!r}")
        links.add((inv_index[inv_id], comp_index[comp_id]))

    matrix = LinkMatrix(investor_ids, company_ids, frozenset(links))
    return companies, investors, matrix


def save_corpus(
    path: str | Path,
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    matrix: LinkMatrix,
) -> None:
    """Write a corpus directory in the documented format, deterministically."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / COMPANIES_FILE).open("w", encoding="utf-8") as fh:
        for rec in companies:
            fh.write(
                json.dumps(
                    {
                        "id": rec.id,
                        "description": rec.description,
                        "industry_focus": list(rec.industry_focus),
                        "year_founded": rec.year_founded,
                        "location": rec.location,
                        "funding_rounds": sorted(rec.funding_rounds),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with (root / INVESTORS_FILE).open("w", encoding="utf-8") as fh:
        for rec in investors:
            fh.write(
                json.dumps(
                    {
                        "id": rec.id,
                        "round_deal_counts": dict(sorted(rec.round_deal_counts.items())),
                        "industry_deal_counts": dict(sorted(rec.industry_deal_counts.items())),
                        "location": rec.location,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    write_pairs_tsv(root / LINKS_FILE, matrix.id_pairs())


def write_pairs_tsv(path: str | Path, pairs: list[tuple[str, str]]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for inv_id, comp_id in pairs:
            fh.write(f"{inv_id}\t{comp_id}\n")


def read_pairs_tsv(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorpusError(f"{path}:{lineno}: expected investor_id<TAB>company_id")
        pairs.append((parts[0], parts[1]))
    return pairs


# ---------------------------------------------------------------------------
# Train/test splitting


def split_links(
    matrix: LinkMatrix, spec: SplitSpec
) -> tuple[LinkMatrix, list[tuple[str, str]], list[tuple[str, str]]]:
    """Partition links into train/test and sample non-link negatives.

    Negatives are drawn against the FULL matrix, so "no historical link"
    means absent from the original data, not merely held out of train.
    The same spec always yields byte-identical output.
    """
    if matrix.n_links == 0:
        raise CorpusError("cannot split a matrix with zero links")

    rng = random.Random(spec.rng_seed)
    ordered = sorted(matrix.links)
    rng.shuffle(ordered)
    n_train = int(round(spec.train_fraction * len(ordered)))
    n_train = min(max(n_train, 0), len(ordered))
    train_links = frozenset(ordered[:n_train])
    test_links = ordered[n_train:]

    train = matrix.with_links(train_links)
    test_positive = sorted(
        (matrix.investor_ids[i], matrix.company_ids[j]) for i, j in test_links
    )

    n_neg = int(round(spec.negatives_per_positive * len(test_positive)))
    n, m = matrix.n_investors, matrix.n_companies
    n_absent = n * m - matrix.n_links
    if n_neg > n_absent:
        raise CorpusError(
            f"requested {n_neg} negatives but only {n_absent} non-link pairs exist"
        )

    negatives: set[tuple[int, int]] = set()
    # Rejection sampling is fast while the matrix is sparse; fall back to
    # exhaustive enumeration for very dense matrices.
    attempts = 0
    max_attempts = 50 * max(n_neg, 1)
    while len(negatives) < n_neg and attempts < max_attempts:
        pair = (rng.randrange(n), rng.randrange(m))
        attempts += 1
        if pair not in matrix.links:
            negatives.add(pair)
    if len(negatives) < n_neg:
        pool = sorted(
            (i, j)
            for i in range(n)
            for j in range(m)
            if (i, j) not in matrix.links and (i, j) not in negatives
        )
        negatives.update(rng.sample(pool, n_neg - len(negatives)))

    test_negative = sorted(
        (matrix.investor_ids[i], matrix.company_ids[j]) for i, j in negatives
    )
    return train, test_positive, test_negative


# ---------------------------------------------------------------------------
# Synthetic corpus generation

_THEMES = (
    "software", "healthcare", "energy", "finance",
    "mobility", "agriculture", "media", "logistics",
)

# Company attributes carry a planted "style" signal (adjective, domain, craft
# pools) and a "variant" signal (product, mode, audience pools). Pools are
# disjoint from each other and from themes/noise, so token overlap between two
# descriptions mirrors how many group labels the companies share.
_STYLE_ADJS = (
    "adaptive", "modular", "federated", "streamlined", "resilient", "composable",
    "verified", "tiered", "calibrated", "encrypted", "predictive", "curated",
    "distributed", "immersive", "frictionless", "autonomous", "layered", "portable",
    "auditable", "concurrent", "localized", "elastic", "durable", "seamless",
)

_STYLE_WORDS = (
    "analytics", "security", "robotics", "diagnostics", "payments", "learning",
    "imaging", "sensing", "automation", "commerce", "gaming", "networking",
    "storage", "forecasting", "compliance", "staffing", "insurance", "wellness",
    "mapping", "translation", "billing", "hiring", "irrigation", "shipping",
)

_STYLE_CRAFTS = (
    "onboarding", "reconciliation", "benchmarking", "provisioning", "escrow",
    "telemetry", "routing", "attestation", "indexing", "replication",
    "brokerage", "curation", "dispatch", "enrollment", "metering",
    "notarization", "orchestration", "procurement", "quotas", "rostering",
    "settlement", "triage", "underwriting", "validation",
)

_VARIANT_WORDS = (
    "platform", "marketplace", "toolkit", "devices", "api", "suite",
    "dashboard", "engine", "assistant", "network", "studio", "exchange",
)

_VARIANT_MODES = (
    "subscription", "managed", "turnkey", "embedded", "whitelabel", "freemium",
    "concierge", "wholesale", "onsite", "remote", "hybrid", "bundled",
)

_AUDIENCE_WORDS = (
    "retailers", "hospitals", "factories", "agencies", "carriers", "labs",
    "studios", "cooperatives", "municipalities", "distributors", "brokers",
    "clinics", "warehouses", "refineries", "schools", "airlines",
)

_NOISE_WORDS = (
    "amber", "basalt", "cedar", "dune", "ember", "fjord", "garnet", "harbor",
    "indigo", "juniper", "krypton", "lagoon", "meadow", "nimbus", "onyx",
    "prairie", "quartz", "reef", "sierra", "tundra", "umber", "vermilion",
    "willow", "xenon", "yarrow", "zephyr", "atlas", "beacon", "cobalt",
    "delta", "echo", "flint", "glacier", "heather", "iris", "jade",
    "kestrel", "larch", "mosaic", "nectar", "opal", "pike", "quill",
    "ridge", "sable", "thistle", "ultramarine", "vista", "wren", "zenith",
)

_CITY_STEMS = (
    "Arlen", "Brandt", "Corvale", "Dunmore", "Eastvale", "Farrow", "Glenrock",
    "Halvern", "Istmere", "Jorvik", "Kelsey", "Loring", "Marwick", "Norfall",
    "Ostend", "Penrose", "Quarry", "Rexford", "Selwyn", "Tarmon",
)

_COUNTRIES = (
    "Veland", "Ostria", "Kandor", "Imara",
)


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of the seeded synthetic corpus generator.

    ``taste_strength`` redistributes intra-cluster link probability between
    taste-aligned and unaligned investor/company groups while keeping the
    marginal rate at exactly ``p_in``; 0.0 gives plain Bernoulli(p_in).
    ``activity_spread`` scales each investor's link probabilities by a
    seeded lognormal factor; 0.0 disables it.
    """

    clusters: int = 2
    investors: int = 60
    companies: int = 150
    p_in: float = 0.15
    p_out: float = 0.01
    taste_groups: int = 1
    taste_strength: float = 0.0
    variants: int = 6
    activity_spread: float = 0.0
    cities_per_cluster: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.clusters < 1:
            raise CorpusError("clusters must be >= 1")
        if self.investors < 1 or self.companies < 1:
            raise CorpusError("entity counts must be >= 1")
        if not (0.0 <= self.p_out <= 1.0 and 0.0 <= self.p_in <= 1.0):
            raise CorpusError("link probabilities must be in [0, 1]")
        if self.p_in <= self.p_out:
            raise CorpusError("p_in must exceed p_out")
        if self.taste_groups < 1 or self.variants < 1:
            raise CorpusError("taste_groups and variants must be >= 1")
        if not (0.0 <= self.taste_strength < 1.0):
            raise CorpusError("taste_strength must be in [0, 1)")
        p_hi = self.p_in * (1.0 + self.taste_strength * (self.taste_groups - 1))
        if p_hi > 1.0:
            raise CorpusError(
                f"taste_strength too high: aligned link probability {p_hi:.3f} > 1"
            )
        if self.activity_spread < 0:
            raise CorpusError("activity_spread must be >= 0")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str], seed: int | None = None) -> "SyntheticConfig":
        from . import config as _cfg

        return cls(
            clusters=_cfg.get_int(mapping, "synth_clusters", 2),
            investors=_cfg.get_int(mapping, "synth_investors", 60),
            companies=_cfg.get_int(mapping, "synth_companies", 150),
            p_in=_cfg.get_float(mapping, "synth_p_in", 0.15),
            p_out=_cfg.get_float(mapping, "synth_p_out", 0.01),
            taste_groups=_cfg.get_int(mapping, "synth_taste_groups", 1),
            taste_strength=_cfg.get_float(mapping, "synth_taste_strength", 0.0),
            variants=_cfg.get_int(mapping, "synth_variants", 6),
            activity_spread=_cfg.get_float(mapping, "synth_activity_spread", 0.0),
            cities_per_cluster=_cfg.get_int(mapping, "synth_cities_per_cluster", 5),
            seed=seed if seed is not None else _cfg.get_int(mapping, "synth_seed", 0),
        )


def _pool_word(pool: tuple[str, ...], k: int) -> str:
    word = pool[k % len(pool)]
    if k >= len(pool):
        word = f"{word}{k // len(pool)}"
    return word


def _style_tokens(cluster: int, taste: int, taste_groups: int) -> tuple[str, str, str]:
    """Adjective, domain, and craft words for one style group."""
    k = cluster * taste_groups + taste
    return (
        _pool_word(_STYLE_ADJS, k),
        _pool_word(_STYLE_WORDS, k),
        _pool_word(_STYLE_CRAFTS, k),
    )


def _variant_tokens(index: int) -> tuple[str, str, str]:
    """Product, delivery-mode, and audience words for one variant archetype."""
    return (
        _pool_word(_VARIANT_WORDS, index),
        _pool_word(_VARIANT_MODES, index),
        _pool_word(_AUDIENCE_WORDS, index),
    )


def _cluster_cities(cluster: int, count: int) -> list[str]:
    country = _pool_word(_COUNTRIES, cluster)
    cities = []
    for c in range(count):
        k = cluster * count + c
        stem = _CITY_STEMS[k % len(_CITY_STEMS)]
        if k >= len(_CITY_STEMS):
            stem = f"{stem} {k // len(_CITY_STEMS)}"
        cities.append(f"{stem}, {country}")
    return cities


def _round_window(vocab: tuple[str, ...], stage: int) -> tuple[str, ...]:
    # Three disjoint stages partitioning the vocabulary: early / mid / late.
    n = len(vocab)
    start = round(stage * n / 3)
    stop = round((stage + 1) * n / 3)
    return vocab[start:stop] or vocab[-1:]


def generate_synthetic(
    config: SyntheticConfig,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> tuple[list[CompanyRecord], list[InvestorRecord], LinkMatrix]:
    """Generate a cluster-structured corpus standing in for licensed data.

    Entities are assigned clusters round-robin; companies additionally get a
    style group and a variant archetype that shape industry strings and
    descriptions. Links are Bernoulli: probability p_in inside a cluster
    (redistributed by taste alignment when taste_strength > 0, marginal rate
    unchanged) and p_out across clusters. Investor profiles are derived from
    their realized portfolios, the way vendor data reports deal histories.
    """
    rng = random.Random(config.seed)
    c = config.clusters
    t_groups = config.taste_groups

    inv_cluster = [k % c for k in range(config.investors)]
    comp_cluster = [k % c for k in range(config.companies)]
    # Taste (investors) and style (companies) groups within each cluster,
    # assigned round-robin within the cluster for balance.
    inv_taste = []
    per_cluster_seen: dict[int, int] = {}
    for cl in inv_cluster:
        k = per_cluster_seen.get(cl, 0)
        inv_taste.append(k % t_groups)
        per_cluster_seen[cl] = k + 1
    comp_style = []
    per_cluster_seen = {}
    for cl in comp_cluster:
        k = per_cluster_seen.get(cl, 0)
        comp_style.append(k % t_groups)
        per_cluster_seen[cl] = k + 1

    comp_variant = [rng.randrange(config.variants) for _ in range(config.companies)]

    if config.activity_spread > 0:
        activity = [
            math.exp(config.activity_spread * rng.gauss(0.0, 1.0))
            for _ in range(config.investors)
        ]
    else:
        activity = [1.0] * config.investors

    p_hi = config.p_in * (1.0 + config.taste_strength * (t_groups - 1))
    p_lo = config.p_in * (1.0 - config.taste_strength)

    links: set[tuple[int, int]] = set()
    for i in range(config.investors):
        for j in range(config.companies):
            if inv_cluster[i] != comp_cluster[j]:
                p = config.p_out
            elif inv_taste[i] == comp_style[j]:
                p = p_hi
            else:
                p = p_lo
            p = min(1.0, p * activity[i])
            if p >= 1.0 or rng.random() < p:
                links.add((i, j))

    cities = [_cluster_cities(cl, config.cities_per_cluster) for cl in range(c)]
    theme = [
        _THEMES[cl % len(_THEMES)] + (str(cl // len(_THEMES)) if cl >= len(_THEMES) else "")
        for cl in range(c)
    ]

    companies: list[CompanyRecord] = []
    for j in range(config.companies):
        cl, style, variant = comp_cluster[j], comp_style[j], comp_variant[j]
        adj_w, style_w, craft_w = _style_tokens(cl, style, t_groups)
        variant_w, mode_w, audience_w = _variant_tokens(variant)
        window = _round_window(vocab, (style + cl) % 3)
        rounds = frozenset(window[: rng.randint(1, len(window))])
        noise = rng.sample(_NOISE_WORDS, 2)
        description = (
            f"{adj_w.capitalize()} {style_w} {mode_w} {variant_w} for "
            f"{theme[cl]} {audience_w}. "
            f"{craft_w.capitalize()} blends {noise[0]} and {noise[1]}."
        )
        industry = [f"{theme[cl]} / {adj_w} {style_w} / {variant_w} {mode_w}"]
        if rng.random() < 0.5:
            industry.append(f"{theme[cl]} / {adj_w} {style_w}")
        companies.append(
            CompanyRecord(
                id=f"comp_{j:04d}",
                description=description,
                industry_focus=tuple(industry),
                year_founded=rng.randint(1995, 2021),
                location=rng.choice(cities[cl]),
                funding_rounds=rounds,
            )
        )

    matrix = LinkMatrix(
        tuple(f"inv_{i:04d}" for i in range(config.investors)),
        tuple(comp.id for comp in companies),
        frozenset(links),
    )

    investors: list[InvestorRecord] = []
    for i in range(config.investors):
        cl = inv_cluster[i]
        round_counts: dict[str, int] = {}
        industry_counts: dict[str, int] = {}
        for j in matrix.portfolio_of(i):
            comp = companies[j]
            round_label = rng.choice(sorted(comp.funding_rounds))
            round_counts[round_label] = round_counts.get(round_label, 0) + 1
            primary = comp.industry_focus[0]
            industry_counts[primary] = industry_counts.get(primary, 0) + 1
        investors.append(
            InvestorRecord(
                id=f"inv_{i:04d}",
                round_deal_counts=round_counts,
                industry_deal_counts=industry_counts,
                location=rng.choice(cities[cl]),
            )
        )

    return companies, investors, matrix
