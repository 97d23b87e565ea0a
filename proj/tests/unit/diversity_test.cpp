#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "seedforge/diversity/dedup.hpp"
#include "seedforge/errors.hpp"
#include "seedforge/gateway/mock.hpp"
#include "seedforge/util/rng.hpp"

using namespace seedforge;

namespace {

// Reference cosine in long double, no SIMD.
double ref_cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    long double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        d += static_cast<long double>(a.values[i]) * b.values[i];
        na += static_cast<long double>(a.values[i]) * a.values[i];
        nb += static_cast<long double>(b.values[i]) * b.values[i];
    }
    return static_cast<double>(d / std::sqrt(na * nb));
}

std::vector<EmbeddingVector> random_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EmbeddingVector> out(n);
    for (auto& v : out) {
        v.values.resize(dim);
        for (auto& x : v.values) x = static_cast<float>(rng.normal());
    }
    return out;
}

// Random vectors with `pairs` planted near-duplicates: the copy of vector k
// is perturbed slightly and placed at a random later position.
std::vector<EmbeddingVector> planted(std::size_t n, std::size_t pairs, std::size_t dim,
                                     std::uint64_t seed) {
    auto base = random_vectors(n - pairs, dim, seed);
    Rng rng(seed ^ 0xabc);
    for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t src = rng.uniform_index(base.size());
        EmbeddingVector copy = base[src];
        for (auto& x : copy.values) x += static_cast<float>(0.05 * rng.normal());
        const std::size_t at = src + 1 + rng.uniform_index(base.size() - src);
        base.insert(base.begin() + static_cast<std::ptrdiff_t>(at), std::move(copy));
    }
    return base;
}

// O(n^2) keep-first greedy.
std::vector<std::size_t> oracle_keep_first(const std::vector<EmbeddingVector>& vs, double th) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        bool dup = false;
        for (std::size_t k : kept) {
            if (ref_cosine(vs[i], vs[k]) > th) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(i);
    }
    return kept;
}

std::size_t oracle_nearest(const std::vector<EmbeddingVector>& vs, const EmbeddingVector& q,
                           std::optional<std::size_t> exclude) {
    std::size_t best = 0;
    double best_sim = -2;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (exclude && i == *exclude) continue;
        const double s = ref_cosine(q, vs[i]);
        if (s > best_sim) {
            best_sim = s;
            best = i;
        }
    }
    return best;
}

InstructionRecord rec(std::string id, std::string ins, std::optional<std::string> ctx, std::string out) {
    InstructionRecord r;
    r.id = std::move(id);
    r.instruction = std::move(ins);
    r.context = std::move(ctx);
    r.output = std::move(out);
    return r;
}

}  // namespace

TEST(SampleText, JoinsFieldsWithNewlines) {
    EXPECT_EQ(sample_text(rec("a", "i", "c", "o")), "i\nc\no");
    EXPECT_EQ(sample_text(rec("a", "i", std::nullopt, "o")), "i\n\no");
}

TEST(Cosine, Examples) {
    const EmbeddingVector v{{0.3f, -1.2f, 4.0f}};
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
    EXPECT_NEAR(cosine(EmbeddingVector{{1, 0}}, EmbeddingVector{{0, 1}}), 0.0, 1e-12);
    EXPECT_NEAR(cosine(EmbeddingVector{{1, 1}}, EmbeddingVector{{1, 0}}), 1.0 / std::sqrt(2.0), 1e-9);
    EXPECT_THROW(cosine(EmbeddingVector{{0, 0}}, EmbeddingVector{{1, 0}}), UndefinedSimilarityError);
    EXPECT_THROW(cosine(EmbeddingVector{{1}}, EmbeddingVector{{1, 0}}), PreconditionError);
}

TEST(Cosine, MatchesReferenceAndStaysInRange) {
    const auto vs = random_vectors(200, 48, 3);
    for (std::size_t i = 1; i < vs.size(); ++i) {
        const double c = cosine(vs[i - 1], vs[i]);
        EXPECT_NEAR(c, ref_cosine(vs[i - 1], vs[i]), 1e-6);
        EXPECT_LE(std::abs(c), 1.0);
    }
}

TEST(NeighborIndex, IdenticalPair) {
    for (IndexKind kind : {IndexKind::exact, IndexKind::approximate}) {
        const std::vector<EmbeddingVector> vs = {{{1, 2, 3}}, {{1, 2, 3}}};
        auto idx = build_index(vs, kind);
        auto a = idx->nearest(vs[0].values, 0);
        auto b = idx->nearest(vs[1].values, 1);
        ASSERT_TRUE(a && b);
        EXPECT_EQ(a->id, 1u);
        EXPECT_EQ(b->id, 0u);
        EXPECT_NEAR(a->similarity, 1.0, 1e-9);
    }
}

TEST(NeighborIndex, MixedDimensionsRejected) {
    const std::vector<EmbeddingVector> vs = {{{1, 2, 3}}, {{1, 2}}};
    EXPECT_THROW(build_index(vs, IndexKind::exact), ProtocolError);
    EXPECT_THROW(build_index(vs, IndexKind::approximate), ProtocolError);
    EXPECT_THROW(build_index(std::vector<EmbeddingVector>{}, IndexKind::exact), PreconditionError);
}

TEST(NeighborIndex, ExactMatchesBruteForce) {
    const auto vs = random_vectors(1000, 32, 11);
    auto idx = build_index(vs, IndexKind::exact);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        EXPECT_EQ(idx->nearest(vs[i].values, i)->id, oracle_nearest(vs, vs[i], i)) << i;
    }
}

TEST(NeighborIndex, HnswRecallAtOne) {
    const auto vs = random_vectors(1000, 32, 12);
    const auto queries = random_vectors(500, 32, 13);
    auto idx = build_index(vs, IndexKind::approximate);
    std::size_t hits = 0;
    for (const auto& q : queries) hits += idx->nearest(q.values)->id == oracle_nearest(vs, q, {});
    const double held_out = static_cast<double>(hits) / queries.size();
    hits = 0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        hits += idx->nearest(vs[i].values, i)->id == oracle_nearest(vs, vs[i], i);
    }
    const double self = static_cast<double>(hits) / vs.size();
    EXPECT_GE(held_out, 0.99);
    EXPECT_GE(self, 0.99);
}

TEST(DedupConfig, Validation) {
    DedupConfig c;
    EXPECT_NO_THROW(c.validate());
    c.threshold = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c.threshold = 1.01;
    EXPECT_THROW(c.validate(), ConfigError);
    c.threshold = 1.0;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.index_for(50000), IndexKind::exact);
    EXPECT_EQ(c.index_for(50001), IndexKind::approximate);
}

TEST(DedupVectors, ThresholdIsStrict) {
    // cos((3,4),(4,3)) = 24/25 with every intermediate exact.
    const std::vector<EmbeddingVector> vs = {{{3, 4}}, {{4, 3}}};
    DedupConfig c;
    c.threshold = 0.96;
    EXPECT_EQ(dedup_vectors(vs, c).kept.size(), 2u);
    c.threshold = 0.9599;
    const auto d = dedup_vectors(vs, c);
    ASSERT_EQ(d.kept.size(), 1u);
    EXPECT_EQ(d.kept[0], 0u);
}

TEST(DedupVectors, DimensionDrift) {
    const std::vector<EmbeddingVector> vs = {{{3, 4}}, {{4, 3, 1}}};
    EXPECT_THROW(dedup_vectors(vs, DedupConfig{}), ProtocolError);
}

TEST(DedupVectors, NothingRemovedWhenAllBelowThreshold) {
    const auto vs = random_vectors(300, 64, 5);
    EXPECT_EQ(dedup_vectors(vs, DedupConfig{}).kept.size(), 300u);
}

TEST(DedupVectors, ExactMatchesKeepFirstOracleOnPlantedCorpus) {
    const auto vs = planted(5000, 500, 32, 21);
    const auto expected = oracle_keep_first(vs, 0.95);
    const auto d = dedup_vectors(vs, DedupConfig{});
    EXPECT_EQ(d.kept, expected);
    EXPECT_GE(d.removed.size(), 400u);
    EXPECT_EQ(d.kept.size() + d.removed.size(), vs.size());
    std::set<std::size_t> removed;
    for (const auto& [r, nb, s] : d.removed) {
        EXPECT_GT(s, 0.95);
        EXPECT_LT(nb, r);
        EXPECT_TRUE(removed.insert(r).second);
    }
}

TEST(DedupVectors, IdempotentAndAudited) {
    const auto vs = planted(1500, 200, 24, 22);
    const auto d = dedup_vectors(vs, DedupConfig{});
    std::vector<EmbeddingVector> kept;
    for (std::size_t k : d.kept) kept.push_back(vs[k]);
    EXPECT_EQ(dedup_vectors(kept, DedupConfig{}).kept.size(), kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            ASSERT_LE(ref_cosine(kept[i], kept[j]), 0.95 + 1e-9);
        }
    }
}

TEST(DedupVectors, ApproximateCloseToExact) {
    const auto vs = planted(3000, 300, 32, 23);
    DedupConfig exact;
    DedupConfig approx;
    approx.index_kind = IndexKind::approximate;
    const auto a = dedup_vectors(vs, exact);
    const auto b = dedup_vectors(vs, approx);
    std::set<std::size_t> ka(a.kept.begin(), a.kept.end());
    std::size_t same = 0;
    for (std::size_t k : b.kept) same += ka.count(k);
    EXPECT_GE(static_cast<double>(same) / a.kept.size(), 0.99);
}

TEST(DedupVectors, FullSetModeDropsBothMembers) {
    const std::vector<EmbeddingVector> vs = {{{1, 0, 0}}, {{1, 0, 0}}, {{0, 1, 0}}};
    DedupConfig c;
    c.mode = DedupMode::full_set;
    const auto d = dedup_vectors(vs, c);
    EXPECT_EQ(d.kept, std::vector<std::size_t>{2});
    c.mode = DedupMode::keep_first;
    EXPECT_EQ(dedup_vectors(vs, c).kept, (std::vector<std::size_t>{0, 2}));
}

TEST(DedupFilter, IdenticalRecordsKeepLowestId) {
    Gateway gw({.embedder = std::make_shared<MockEmbedder>(64)}, ProviderBudget{});
    const std::vector<InstructionRecord> rs = {rec("b", "same", "ctx", "out"), rec("a", "same", "ctx", "out"),
                                               rec("c", "different question", std::nullopt, "other")};
    const auto res = dedup_filter(rs, DedupConfig{}, gw);
    ASSERT_EQ(res.kept.size(), 2u);
    EXPECT_EQ(res.kept[0].id, "a");
    EXPECT_EQ(res.kept[1].id, "c");
    ASSERT_EQ(res.log.removed.size(), 1u);
    EXPECT_EQ(res.log.removed[0].record_id, "b");
    EXPECT_EQ(res.log.removed[0].nearest_id, "a");
    EXPECT_NEAR(res.log.removed[0].similarity, 1.0, 1e-9);
}

TEST(DedupFilter, Preconditions) {
    Gateway gw({.embedder = std::make_shared<MockEmbedder>(16)}, ProviderBudget{});
    EXPECT_THROW(dedup_filter(std::vector<InstructionRecord>{}, DedupConfig{}, gw), PreconditionError);
    const std::vector<InstructionRecord> dup_ids = {rec("a", "x", {}, "y"), rec("a", "z", {}, "w")};
    EXPECT_THROW(dedup_filter(dup_ids, DedupConfig{}, gw), PreconditionError);
}

TEST(DedupFilter, ManyRecordsAcrossEmbedChunks) {
    Gateway gw({.embedder = std::make_shared<MockEmbedder>(64, 50)}, ProviderBudget{});
    std::vector<InstructionRecord> rs;
    for (int i = 0; i < 700; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "r%04d", i);
        rs.push_back(rec(id, "question " + std::to_string(i % 600), std::nullopt, "answer " + std::to_string(i % 600)));
    }
    const auto res = dedup_filter(rs, DedupConfig{}, gw);
    EXPECT_EQ(res.kept.size(), 600u);
    EXPECT_EQ(res.log.removed.size(), 100u);
    for (const auto& r : res.log.removed) EXPECT_GE(r.record_id, "r0600");
}
