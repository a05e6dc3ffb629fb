"""Encoder, provider, and entity-vector tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invmatch.corpus import CompanyRecord, InvestorRecord
from invmatch.embed import (
    COMPANY_BLOCKS,
    INVESTOR_BLOCKS,
    EmbedConfig,
    EmbedError,
    EntityVector,
    HashingTextProvider,
    ProviderSlots,
    TableTextProvider,
    build_all_vectors,
    build_company_vector,
    build_investor_vector,
    build_providers,
    encode_funding_status,
    encode_funding_style,
    encode_industry_preference,
    load_embedding_file,
    tokenize,
    write_embedding_file,
)

VOCAB4 = ("Seed", "Series A", "Series B", "Series C")


class TestFundingStatus:
    def test_worked_example(self):
        # Seed and Series A raised over a four-round vocabulary.
        out = encode_funding_status({"Seed", "Series A"}, VOCAB4)
        assert out.tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_empty(self):
        assert encode_funding_status(set(), VOCAB4).tolist() == [0, 0, 0, 0]

    def test_saturated(self):
        assert encode_funding_status(set(VOCAB4), VOCAB4).tolist() == [1, 1, 1, 1]

    def test_unknown_label(self):
        with pytest.raises(EmbedError, match="Mezzanine"):
            encode_funding_status({"Mezzanine"}, VOCAB4)

    @given(st.sets(st.sampled_from(VOCAB4)))
    def test_indicator_properties(self, rounds):
        out = encode_funding_status(rounds, VOCAB4)
        assert set(out.tolist()) <= {0.0, 1.0}
        assert out.sum() == len(rounds)


class TestFundingStyle:
    def test_worked_example(self):
        out = encode_funding_style(
            {"Seed": 80, "Series A": 10, "Series B": 10, "Series C": 0}, VOCAB4
        )
        assert np.allclose(out, [0.8, 0.1, 0.1, 0.0], atol=1e-12)

    def test_one_hot(self):
        out = encode_funding_style({"Series B": 17}, VOCAB4)
        assert out.tolist() == [0.0, 0.0, 1.0, 0.0]

    def test_cold_start_all_zero(self):
        assert encode_funding_style({}, VOCAB4).tolist() == [0, 0, 0, 0]
        assert encode_funding_style({"Seed": 0}, VOCAB4).tolist() == [0, 0, 0, 0]

    def test_negative_count(self):
        with pytest.raises(EmbedError, match="negative"):
            encode_funding_style({"Seed": -1}, VOCAB4)

    def test_unknown_label(self):
        with pytest.raises(EmbedError, match="Bridge"):
            encode_funding_style({"Bridge": 3}, VOCAB4)

    @settings(max_examples=300)
    @given(
        st.dictionaries(
            st.sampled_from(VOCAB4), st.integers(min_value=0, max_value=10**6)
        )
    )
    def test_distribution_properties(self, counts):
        out = encode_funding_style(counts, VOCAB4)
        assert np.all(out >= 0) and np.all(out <= 1)
        if sum(counts.values()) > 0:
            assert math.isclose(out.sum(), 1.0, abs_tol=1e-9)
        else:
            assert out.sum() == 0.0


class TestIndustryPreference:
    def test_single_industry_is_its_embedding(self):
        p = HashingTextProvider(16, seed=1)
        out = encode_industry_preference({"fintech": 5}, p)
        assert np.array_equal(out, p.embed("fintech"))

    def test_equal_counts_give_mean(self):
        p = HashingTextProvider(16, seed=1)
        out = encode_industry_preference({"fintech": 2, "biotech": 2}, p)
        want = (p.embed("fintech") + p.embed("biotech")) / 2.0
        assert np.allclose(out, want, atol=1e-12)

    def test_weighted_example(self):
        # Expected vector computed from the provider's own outputs with the
        # stated 3:1 weighting, independent of the implementation's loop.
        p = HashingTextProvider(8, seed=2)
        out = encode_industry_preference({"alpha works": 3, "beta works": 1}, p)
        want = 0.75 * p.embed("alpha works") + 0.25 * p.embed("beta works")
        assert np.allclose(out, want, atol=1e-12)

    def test_zero_total(self):
        p = HashingTextProvider(8)
        assert encode_industry_preference({}, p).tolist() == [0.0] * 8
        assert encode_industry_preference({"x": 0}, p).tolist() == [0.0] * 8

    @settings(max_examples=100)
    @given(
        st.dictionaries(
            st.sampled_from(["health", "energy", "retail"]),
            st.integers(min_value=0, max_value=100),
            min_size=1,
        ),
        st.integers(min_value=2, max_value=9),
    )
    def test_count_scale_invariance(self, counts, scale):
        p = HashingTextProvider(12, seed=3)
        a = encode_industry_preference(counts, p)
        b = encode_industry_preference({k: v * scale for k, v in counts.items()}, p)
        assert np.allclose(a, b, atol=1e-9)


class TestHashingProvider:
    def test_deterministic(self):
        p = HashingTextProvider(32, seed=5)
        a = p.embed("Develops analytics platform products")
        b = p.embed("Develops analytics platform products")
        assert np.array_equal(a, b)
        q = HashingTextProvider(32, seed=5)
        assert np.array_equal(a, q.embed("Develops analytics platform products"))

    def test_unit_norm_on_real_texts(self):
        p = HashingTextProvider(64)
        for text in (
            "Develops analytics platform products for software teams.",
            "software / analytics / platform",
            "Arlen, Northmark, Veland",
            "single",
            "a b c d e f g",
        ):
            assert math.isclose(np.linalg.norm(p.embed(text)), 1.0, abs_tol=1e-12)

    def test_empty_text_is_zero(self):
        p = HashingTextProvider(16)
        assert p.embed("").tolist() == [0.0] * 16
        assert p.embed("  ,;  ").tolist() == [0.0] * 16

    def test_token_overlap_orders_similarity(self):
        p = HashingTextProvider(64, seed=0)
        base = p.embed("software analytics platform")
        near = p.embed("software analytics toolkit")
        far = p.embed("healthcare imaging devices")
        assert float(base @ near) > float(base @ far)

    def test_case_and_punctuation_insensitive(self):
        p = HashingTextProvider(32)
        assert np.array_equal(
            p.embed("Software, Analytics!"), p.embed("software analytics")
        )

    def test_seed_changes_vectors(self):
        a = HashingTextProvider(32, seed=1).embed("some text here")
        b = HashingTextProvider(32, seed=2).embed("some text here")
        assert not np.array_equal(a, b)

    def test_dimension_validation(self):
        with pytest.raises(EmbedError):
            HashingTextProvider(0)

    @settings(max_examples=200)
    @given(st.text(alphabet="abcdefgh xyz,.", max_size=40))
    def test_norm_is_unit_or_zero(self, text):
        p = HashingTextProvider(32, seed=7)
        norm = float(np.linalg.norm(p.embed(text)))
        assert norm == 0.0 or math.isclose(norm, 1.0, abs_tol=1e-9)
        if not tokenize(text):
            assert norm == 0.0

    def test_tokenize(self):
        assert tokenize("A-b c_d 12!e") == ["a", "b", "c", "d", "12", "e"]


class TestEmbeddingFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "emb.tsv"
        table = {
            "alpha": np.array([0.5, -0.25, 0.125]),
            "beta gamma": np.array([1.0, 0.0, 1e-8]),
        }
        write_embedding_file(path, table, 3)
        loaded, dim = load_embedding_file(path)
        assert dim == 3
        assert set(loaded) == set(table)
        for key in table:
            assert np.array_equal(loaded[key], table[key])

    def test_rows_sorted_by_text(self, tmp_path):
        path = tmp_path / "emb.tsv"
        write_embedding_file(path, {"b": np.zeros(1), "a": np.ones(1)}, 1)
        lines = path.read_text().splitlines()
        assert lines[0] == "#dim=1"
        assert [ln.split("\t")[0] for ln in lines[1:]] == ["a", "b"]

    def test_missing_header(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("alpha\t1.0,2.0\n")
        with pytest.raises(EmbedError, match="header"):
            load_embedding_file(path)

    def test_dimension_mismatch_row(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("#dim=2\nalpha\t1.0,2.0\nbeta\t1.0,2.0,3.0\n")
        with pytest.raises(EmbedError, match=":3"):
            load_embedding_file(path)

    def test_non_numeric_entry(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("#dim=2\nalpha\t1.0,zap\n")
        with pytest.raises(EmbedError, match="non-numeric"):
            load_embedding_file(path)

    def test_writer_rejects_tab_in_text(self, tmp_path):
        with pytest.raises(EmbedError, match="tab"):
            write_embedding_file(tmp_path / "e.tsv", {"a\tb": np.zeros(1)}, 1)

    def test_table_provider_lookup_and_strictness(self, tmp_path):
        table = {"known": np.array([3.0, 4.0])}
        strict = TableTextProvider(table, 2)
        assert strict.embed("known").tolist() == [3.0, 4.0]
        with pytest.raises(EmbedError, match="unknown text"):
            strict.embed("unknown text")
        fallback = HashingTextProvider(2, seed=0)
        soft = TableTextProvider(table, 2, fallback)
        assert np.array_equal(soft.embed("unknown text"), fallback.embed("unknown text"))

    def test_table_provider_fallback_dimension_check(self):
        with pytest.raises(EmbedError, match="dimension"):
            TableTextProvider({}, 4, HashingTextProvider(8))


def company(description="Builds billing tools for clinics.", industries=("health / billing",),
            location="Arlen, Northmark, Veland", rounds=frozenset({"Seed", "Series A"})):
    return CompanyRecord(
        id="comp_x", description=description, industry_focus=tuple(industries),
        year_founded=2012, location=location, funding_rounds=rounds,
    )


def investor(rounds=None, industries=None, location="Arlen, Northmark, Veland"):
    return InvestorRecord(
        id="inv_x",
        round_deal_counts=rounds if rounds is not None else {"Seed": 3, "Series A": 1},
        industry_deal_counts=industries if industries is not None else {"health / billing": 4},
        location=location,
    )


def slots(dim=8, seed=0):
    p = HashingTextProvider(dim, seed)
    return ProviderSlots(sequence=p, bag=p)


class TestVectorBuilders:
    def test_company_flat_length(self):
        vec = build_company_vector(company(), slots(8), EmbedConfig(stub_dimension=8), VOCAB4)
        assert vec.block_names == COMPANY_BLOCKS
        assert vec.flat.size == 4 + 3 * 8

    def test_investor_flat_length(self):
        vec = build_investor_vector(investor(), slots(8), EmbedConfig(stub_dimension=8), VOCAB4)
        assert vec.block_names == INVESTOR_BLOCKS
        assert vec.flat.size == 4 + 2 * 8

    def test_per_block_unit_norms(self):
        vec = build_company_vector(company(), slots(8), EmbedConfig(stub_dimension=8), VOCAB4)
        for arr in vec.blocks:
            n = np.linalg.norm(arr)
            assert n == 0.0 or math.isclose(n, 1.0, abs_tol=1e-9)
        assert np.linalg.norm(vec.block("funding_status")) > 0

    def test_normalization_none_keeps_raw_blocks(self):
        cfg = EmbedConfig(stub_dimension=8, block_normalization="none")
        vec = build_company_vector(company(), slots(8), cfg, VOCAB4)
        assert vec.block("funding_status").tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_empty_description_zero_block(self):
        vec = build_company_vector(company(description="  "), slots(8),
                                   EmbedConfig(stub_dimension=8), VOCAB4)
        assert not vec.block("description").any()
        assert vec.block("location").any()

    def test_empty_industry_zero_block(self):
        vec = build_company_vector(company(industries=()), slots(8),
                                   EmbedConfig(stub_dimension=8), VOCAB4)
        assert not vec.block("industry_focus").any()

    def test_cold_start_investor(self):
        vec = build_investor_vector(investor(rounds={}, industries={}), slots(8),
                                    EmbedConfig(stub_dimension=8), VOCAB4)
        assert not vec.block("funding_style").any()
        assert not vec.block("industry_preference").any()
        assert vec.block("location").any()

    def test_identical_records_identical_vectors(self):
        cfg = EmbedConfig(stub_dimension=8)
        a = build_investor_vector(investor(), slots(8), cfg, VOCAB4)
        b = build_investor_vector(investor(), slots(8), cfg, VOCAB4)
        assert np.array_equal(a.flat, b.flat)

    def test_include_year_appends_block(self):
        cfg = EmbedConfig(stub_dimension=8, include_year=True)
        vec = build_company_vector(company(), slots(8), cfg, VOCAB4)
        assert vec.block_names[-1] == "year_founded"
        assert vec.flat.size == 4 + 3 * 8 + 1

    def test_block_weights_scale(self):
        cfg = EmbedConfig(stub_dimension=8, block_weights={"location": 2.0})
        vec = build_company_vector(company(), slots(8), cfg, VOCAB4)
        assert math.isclose(np.linalg.norm(vec.block("location")), 2.0, abs_tol=1e-9)

    def test_multi_industry_mean(self):
        p = slots(8)
        cfg = EmbedConfig(stub_dimension=8, block_normalization="none")
        vec = build_company_vector(
            company(industries=("health / billing", "health / records")), p, cfg, VOCAB4
        )
        want = (p.bag.embed("health / billing") + p.bag.embed("health / records")) / 2
        assert np.allclose(vec.block("industry_focus"), want, atol=1e-12)

    def test_corpus_wide_dimension_consistency(self):
        import dataclasses

        cfg = EmbedConfig(stub_dimension=8)
        comps = [company(), dataclasses.replace(company(description=""), id="comp_y")]
        invs = [investor()]
        cvecs, ivecs = build_all_vectors(comps, invs, cfg, VOCAB4)
        assert {v.flat.size for v in cvecs.values()} == {28}
        assert {v.flat.size for v in ivecs.values()} == {20}


class TestEntityVector:
    def test_flat_is_block_concatenation(self):
        v = EntityVector("e", ("a", "b"), (np.array([1.0, 2.0]), np.array([3.0])))
        assert v.flat.tolist() == [1.0, 2.0, 3.0]

    def test_zero_blocks(self):
        v = EntityVector("e", ("a", "b"), (np.array([1.0, 2.0]), np.array([3.0])))
        z = v.zero_blocks({"a", "not_present"})
        assert z.flat.tolist() == [0.0, 0.0, 3.0]
        assert v.flat.tolist() == [1.0, 2.0, 3.0]

    def test_unknown_block_lookup(self):
        v = EntityVector("e", ("a",), (np.zeros(1),))
        with pytest.raises(EmbedError):
            v.block("zzz")

    def test_flat_cosine_is_mean_of_block_cosines_for_unit_blocks(self):
        # With every block unit-norm, the flat cosine equals the average of
        # per-block cosines: numerator is the sum of block dot products and
        # each flat norm is sqrt(B).
        rng = np.random.default_rng(0)
        for _ in range(20):
            blocks_u = []
            blocks_v = []
            for size in (3, 5, 4):
                a = rng.normal(size=size)
                b = rng.normal(size=size)
                blocks_u.append(a / np.linalg.norm(a))
                blocks_v.append(b / np.linalg.norm(b))
            u = EntityVector("u", ("x", "y", "z"), tuple(blocks_u))
            v = EntityVector("v", ("x", "y", "z"), tuple(blocks_v))
            flat_cos = float(u.flat @ v.flat) / (
                np.linalg.norm(u.flat) * np.linalg.norm(v.flat)
            )
            block_cos = [float(a @ b) for a, b in zip(u.blocks, v.blocks)]
            assert math.isclose(flat_cos, sum(block_cos) / 3.0, abs_tol=1e-12)


class TestEmbedConfig:
    def test_defaults(self):
        cfg = EmbedConfig()
        assert cfg.block_normalization == "per_block_unit"
        assert cfg.stub_dimension == 64
        assert not cfg.include_year

    def test_from_mapping(self):
        cfg = EmbedConfig.from_mapping(
            {
                "stub_dimension": "16",
                "block_normalization": "none",
                "include_year": "true",
                "block_weight_location": "0.5",
            }
        )
        assert cfg.stub_dimension == 16
        assert cfg.block_normalization == "none"
        assert cfg.include_year
        assert cfg.weight("location") == 0.5
        assert cfg.weight("description") == 1.0

    def test_invalid_normalization(self):
        with pytest.raises(EmbedError, match="normalization"):
            EmbedConfig(block_normalization="l2_global")

    def test_negative_weight(self):
        with pytest.raises(EmbedError, match="weight"):
            EmbedConfig(block_weights={"location": -1.0})

    def test_build_providers_stub_and_file(self, tmp_path):
        stub_slots = build_providers(EmbedConfig(stub_dimension=4))
        assert stub_slots.sequence is stub_slots.bag
        assert stub_slots.bag.dimension() == 4

        path = tmp_path / "emb.tsv"
        write_embedding_file(path, {"known": np.array([1.0, 0.0])}, 2)
        soft = build_providers(EmbedConfig(embeddings_file=str(path)))
        assert soft.bag.dimension() == 2
        assert soft.bag.embed("known").tolist() == [1.0, 0.0]
        assert np.linalg.norm(soft.bag.embed("never seen")) > 0

        strict = build_providers(
            EmbedConfig(embeddings_file=str(path), strict_lookup=True)
        )
        with pytest.raises(EmbedError):
            strict.bag.embed("never seen")
