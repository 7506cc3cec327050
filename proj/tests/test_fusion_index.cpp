#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "fusion_index.hpp"
#include "rng.hpp"
#include "semb_io.hpp"
#include "test_util.hpp"

using namespace hdgrag;

namespace {

Vector rand_vec(Rng& rng, size_t d, bool integer = false) {
    Vector v(d);
    for (auto& x : v) x = integer ? static_cast<double>(static_cast<int>(rng.below(5)) - 2) : rng.normal();
    return v;
}

std::vector<FusedRecord> rand_records(Rng& rng, size_t n, size_t dt, size_t ds, bool integer = false) {
    std::vector<FusedRecord> out;
    for (size_t i = 0; i < n; ++i) {
        out.push_back({"p" + std::to_string(rng.next_u64() % 100000) + "_" + std::to_string(i),
                       rand_vec(rng, dt, integer), rand_vec(rng, ds)});
    }
    return out;
}

// Full sort of all records by (score desc, id asc).
std::vector<std::pair<std::string, double>> brute_force(
        const std::vector<FusedRecord>& recs, const Vector& q, size_t k) {
    std::vector<std::pair<std::string, double>> all;
    for (const auto& r : recs) {
        double s = 0;
        for (size_t i = 0; i < q.size(); ++i) s += q[i] * r.text[i];
        all.emplace_back(r.passage_id, s);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

void expect_same(const RetrievalResult& r, const std::vector<std::pair<std::string, double>>& oracle) {
    ASSERT_EQ(r.hits.size(), oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
        EXPECT_EQ(r.hits[i].passage_id, oracle[i].first);
        EXPECT_EQ(r.hits[i].text_score, oracle[i].second);
    }
}

} // namespace

TEST(Fuse, Concatenation) {
    EXPECT_EQ(fuse(Vector{1, 2}, Vector{3}), (Vector{1, 2, 3}));
    EXPECT_EQ(fuse(Vector{1, 2}, Vector{0, 0}), (Vector{1, 2, 0, 0}));
}

TEST(Fuse, SliceRecoversPartsBitwise) {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const Vector m = rand_vec(rng, 1 + rng.below(30)), h = rand_vec(rng, 1 + rng.below(30));
        const Vector e = fuse(m, h);
        ASSERT_EQ(e.size(), m.size() + h.size());
        EXPECT_EQ(Vector(e.begin(), e.begin() + m.size()), m);
        EXPECT_EQ(Vector(e.begin() + m.size(), e.end()), h);
    }
}

TEST(ReaderInput, ConcatAndShape) {
    EXPECT_EQ(make_reader_input(Vector{1}, Vector{2, 3}), (Vector{1, 2, 3}));
    Rng rng(2);
    const Vector q = rand_vec(rng, 8);
    const auto recs = rand_records(rng, 20, 8, 4);
    std::set<Vector> distinct;
    for (const auto& r : recs) {
        const Vector e = make_reader_input(q, r.fused());
        ASSERT_EQ(e.size(), 8u + 8u + 4u);
        EXPECT_EQ(Vector(e.begin(), e.begin() + 8), q);
        distinct.insert(e);
    }
    EXPECT_EQ(distinct.size(), 20u);
}

TEST(Build, EmptyIndexValid) {
    const auto idx = FlatIndex::build({});
    EXPECT_EQ(idx.size(), 0u);
    EXPECT_TRUE(idx.topk(Vector{}, 5).hits.empty());
}

TEST(Build, DimensionMismatch) {
    std::vector<FusedRecord> recs = {{"a", {1, 2}, {1}}, {"b", {1}, {1}}};
    try {
        FlatIndex::build(recs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    }
    EXPECT_THROW(FlatIndex::build({{"a", {1}, {1, 2}}, {"b", {1}, {1}}}), Error);
}

TEST(Build, DuplicateId) {
    try {
        FlatIndex::build({{"a", {1}, {1}}, {"a", {2}, {2}}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kConflict);
    }
}

TEST(Build, NonFiniteRejected) {
    EXPECT_THROW(FlatIndex::build({{"a", {NAN}, {1}}}), Error);
}

TEST(TopK, KAtLeastNReturnsAllSorted) {
    const auto idx = FlatIndex::build({{"a", {1, 0}, {}}, {"b", {3, 0}, {}}, {"c", {2, 0}, {}}});
    const auto r = idx.topk(Vector{1, 0}, 10);
    EXPECT_EQ(r.k_requested, 10u);
    EXPECT_EQ(r.k_returned(), 3u);
    EXPECT_EQ(r.hits[0].passage_id, "b");
    EXPECT_EQ(r.hits[1].passage_id, "c");
    EXPECT_EQ(r.hits[2].passage_id, "a");
    EXPECT_FALSE(r.structure_reranked);
    EXPECT_FALSE(r.hits[0].combined_score.has_value());
}

TEST(TopK, OrthogonalQueryTiesByAscendingId) {
    const auto idx = FlatIndex::build({{"z", {1, 0}, {}}, {"m", {2, 0}, {}}, {"a", {5, 0}, {}}});
    const auto r = idx.topk(Vector{0, 1}, 3);
    EXPECT_EQ(r.hits[0].passage_id, "a");
    EXPECT_EQ(r.hits[1].passage_id, "m");
    EXPECT_EQ(r.hits[2].passage_id, "z");
    for (const auto& h : r.hits) EXPECT_EQ(h.text_score, 0.0);
}

TEST(TopK, DefaultKIsTwenty) {
    Rng rng(3);
    const auto idx = FlatIndex::build(rand_records(rng, 50, 4, 2));
    EXPECT_EQ(idx.topk(rand_vec(rng, 4)).hits.size(), 20u);
    EXPECT_EQ(kDefaultTopK, 20u);
}

TEST(TopK, Errors) {
    const auto idx = FlatIndex::build({{"a", {1, 0}, {}}});
    EXPECT_THROW(idx.topk(Vector{1}, 1), Error);
    EXPECT_THROW(idx.topk(Vector{1, 0}, 0), Error);
}

TEST(TopK, MatchesBruteForceWithTies) {
    Rng rng(4);
    for (int c = 0; c < 10; ++c) {
        const auto recs = rand_records(rng, 500, 16, 4, c % 2 == 0);
        const auto idx = FlatIndex::build(recs);
        for (int q = 0; q < 50; ++q) {
            const Vector qv = rand_vec(rng, 16, c % 2 == 0);
            const size_t k = 1 + rng.below(40);
            expect_same(idx.topk(qv, k), brute_force(recs, qv, k));
        }
    }
}

TEST(TopK, ShuffledInsertionIdentical) {
    Rng rng(5);
    auto recs = rand_records(rng, 200, 8, 3, true);
    auto sorted = recs;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.passage_id < b.passage_id; });
    rng.shuffle(recs);
    const auto i1 = FlatIndex::build(recs), i2 = FlatIndex::build(sorted);
    for (int q = 0; q < 20; ++q) {
        const Vector qv = rand_vec(rng, 8, true);
        const auto a = i1.topk(qv, 25), b = i2.topk(qv, 25);
        ASSERT_EQ(a.hits.size(), b.hits.size());
        for (size_t i = 0; i < a.hits.size(); ++i) {
            EXPECT_EQ(a.hits[i].passage_id, b.hits[i].passage_id);
            EXPECT_EQ(a.hits[i].text_score, b.hits[i].text_score);
        }
    }
}

TEST(TopK, QueriesDoNotMutateIndex) {
    Rng rng(6);
    const auto idx = FlatIndex::build(rand_records(rng, 30, 4, 2));
    const auto before = idx.records();
    (void)idx.topk(rand_vec(rng, 4), 10);
    (void)rerank_with_structure(idx.topk(rand_vec(rng, 4), 10), idx, 1.0, 5);
    ASSERT_EQ(idx.records().size(), before.size());
    for (size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(idx.records()[i].text, before[i].text);
        EXPECT_EQ(idx.records()[i].structure, before[i].structure);
    }
}

TEST(Rerank, BetaZeroKeepsOrder) {
    Rng rng(7);
    const auto idx = FlatIndex::build(rand_records(rng, 100, 8, 4));
    for (int q = 0; q < 10; ++q) {
        const auto pool = idx.topk(rand_vec(rng, 8), 30);
        const auto r = rerank_with_structure(pool, idx, 0.0, 10);
        ASSERT_EQ(r.hits.size(), 10u);
        EXPECT_TRUE(r.structure_reranked);
        for (size_t i = 0; i < 10; ++i) {
            EXPECT_EQ(r.hits[i].passage_id, pool.hits[i].passage_id);
            EXPECT_TRUE(r.hits[i].combined_score.has_value());
        }
    }
}

TEST(Rerank, ConstantStructureKeepsOrderAndShiftsScores) {
    Rng rng(8);
    auto recs = rand_records(rng, 60, 8, 3);
    const Vector h = rand_vec(rng, 3);
    for (auto& r : recs) r.structure = h;
    const auto idx = FlatIndex::build(recs);
    const auto pool = idx.topk(rand_vec(rng, 8), 20);
    const auto r = rerank_with_structure(pool, idx, 0.7, 20);
    for (size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(r.hits[i].passage_id, pool.hits[i].passage_id);
        // Identical unit vectors: structural term is beta * 1.
        EXPECT_NEAR(*r.hits[i].combined_score - r.hits[i].text_score, 0.7, 1e-12);
    }
}

TEST(Rerank, CombinedScoreMatchesOracle) {
    Rng rng(9);
    const auto recs = rand_records(rng, 40, 6, 5);
    const auto idx = FlatIndex::build(recs);
    const auto pool = idx.topk(rand_vec(rng, 6), 12);
    const double beta = 0.5;
    const auto r = rerank_with_structure(pool, idx, beta, 12);
    auto unit = [](Vector v) {
        double n = 0;
        for (double x : v) n += x * x;
        for (double& x : v) x /= std::sqrt(n);
        return v;
    };
    for (const auto& hit : r.hits) {
        const Vector hi = unit(idx.find(hit.passage_id)->structure);
        double s = 0;
        for (const auto& other : pool.hits) {
            if (other.passage_id == hit.passage_id) continue;
            const Vector hj = unit(idx.find(other.passage_id)->structure);
            for (size_t d = 0; d < hi.size(); ++d) s += hi[d] * hj[d];
        }
        EXPECT_NEAR(*hit.combined_score, hit.text_score + beta * s / 11.0, 1e-12);
    }
    for (size_t i = 1; i < r.hits.size(); ++i) {
        EXPECT_GE(*r.hits[i - 1].combined_score, *r.hits[i].combined_score);
    }
}

TEST(Rerank, PoolOfOneHasZeroStructuralTerm) {
    const auto idx = FlatIndex::build({{"a", {1}, {1, 1}}, {"b", {0.5}, {1, 0}}});
    const auto r = rerank_with_structure(idx.topk(Vector{1}, 1), idx, 2.0, 1);
    ASSERT_EQ(r.hits.size(), 1u);
    EXPECT_EQ(*r.hits[0].combined_score, r.hits[0].text_score);
}

TEST(Rerank, NegativeBetaRejected) {
    const auto idx = FlatIndex::build({{"a", {1}, {1}}});
    EXPECT_THROW(rerank_with_structure(idx.topk(Vector{1}, 1), idx, -1.0, 1), Error);
}

TEST(Semb, RoundTripAndLayout) {
    testutil::TempDir dir("semb");
    const auto m = to_matrix({{1.0, -2.5}, {0.25, 3.0}, {0, 1}}, 2);
    write_semb(dir.file("x.semb"), m);
    const std::string bytes = testutil::read_file(dir.file("x.semb"));
    ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 6 * 4);
    EXPECT_EQ(bytes.substr(0, 4), "SEMB");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);  // rows, little-endian
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);  // dim
    // 1.0f = 0x3f800000, little-endian.
    EXPECT_EQ(static_cast<unsigned char>(bytes[15]), 0x3f);
    EXPECT_EQ(static_cast<unsigned char>(bytes[14]), 0x80);
    const auto back = read_semb(dir.file("x.semb"));
    EXPECT_EQ(back.rows, 3u);
    EXPECT_EQ(back.dim, 2u);
    EXPECT_EQ(back.data, m.data);
}

TEST(Semb, CorruptFilesRejected) {
    testutil::TempDir dir("semb2");
    testutil::write_file(dir.file("bad.semb"), "XXXX\x01\0\0\0\x01\0\0\0abcd");
    EXPECT_THROW(read_semb(dir.file("bad.semb")), Error);
    testutil::write_file(dir.file("short.semb"), std::string("SEMB\x02\0\0\0\x01\0\0\0abcd", 16));
    EXPECT_THROW(read_semb(dir.file("short.semb")), Error);
}

TEST(Persist, SaveLoadPreservesResults) {
    testutil::TempDir dir("idx");
    Rng rng(10);
    // Float-representable values survive the float32 round trip exactly.
    auto recs = rand_records(rng, 50, 6, 3, true);
    const auto idx = FlatIndex::build(recs);
    idx.save(dir.str(), 15);
    size_t k_default = 0;
    const auto back = FlatIndex::load(dir.str(), &k_default);
    EXPECT_EQ(k_default, 15u);
    EXPECT_EQ(back.size(), 50u);
    EXPECT_EQ(back.text_dim(), 6u);
    EXPECT_EQ(back.struct_dim(), 3u);
    const Vector q = rand_vec(rng, 6, true);
    expect_same(back.topk(q, 10), brute_force(recs, q, 10));
    const std::string manifest = testutil::read_file(dir.file("manifest.txt"));
    EXPECT_NE(manifest.find("d_t=6\n"), std::string::npos);
    EXPECT_NE(manifest.find("d_s=3\n"), std::string::npos);
    EXPECT_NE(manifest.find("k_default=15\n"), std::string::npos);
}

TEST(Persist, MissingManifestIsIoError) {
    testutil::TempDir dir("idx2");
    EXPECT_THROW(FlatIndex::load(dir.str()), Error);
}
