#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"
#include "training_signals.hpp"

using namespace hdgrag;

namespace {

std::vector<std::string> toks(size_t n, const std::string& stem = "t") {
    std::vector<std::string> v;
    for (size_t i = 0; i < n; ++i) v.push_back(stem + std::to_string(i));
    return v;
}

size_t masked_count(const MaskedSample& s) {
    size_t n = 0;
    for (const auto& t : s.target) n += sentinel_index(t) < 0 ? 1 : 0;
    return n;
}

// Reference softmax in long double.
std::vector<long double> ref_softmax(const Vector& x) {
    long double mx = *std::max_element(x.begin(), x.end()), s = 0;
    std::vector<long double> out;
    for (double v : x) s += std::exp(static_cast<long double>(v) - mx);
    for (double v : x) out.push_back(std::exp(static_cast<long double>(v) - mx) / s);
    return out;
}

Vector random_dist(Rng& rng, size_t k) {
    Vector p(k);
    double s = 0;
    for (auto& x : p) s += (x = rng.uniform() + 1e-3);
    for (auto& x : p) x /= s;
    return p;
}

} // namespace

TEST(Sentinel, Literals) {
    EXPECT_EQ(sentinel(0), "<extra_id_0>");
    EXPECT_EQ(sentinel(12), "<extra_id_12>");
    EXPECT_EQ(sentinel_index("<extra_id_7>"), 7);
    EXPECT_EQ(sentinel_index("<extra_id_>"), -1);
    EXPECT_EQ(sentinel_index("extra_id_1"), -1);
    EXPECT_EQ(sentinel_index("<extra_id_x>"), -1);
}

TEST(Mask, AdjacentSpansMergeIntoOneSentinel) {
    const auto t = toks(10);
    const auto s = apply_span_mask(t, {{2, 2}, {4, 1}});
    EXPECT_EQ(s.corrupted, (std::vector<std::string>{"t0", "t1", "<extra_id_0>", "t5", "t6", "t7", "t8", "t9"}));
    EXPECT_EQ(s.target, (std::vector<std::string>{"<extra_id_0>", "t2", "t3", "t4"}));
}

TEST(Mask, SeparateSpansGetAscendingSentinels) {
    const auto t = toks(8);
    const auto s = apply_span_mask(t, {{5, 1}, {1, 2}});
    EXPECT_EQ(s.corrupted, (std::vector<std::string>{"t0", "<extra_id_0>", "t3", "t4", "<extra_id_1>", "t6", "t7"}));
    EXPECT_EQ(s.target, (std::vector<std::string>{"<extra_id_0>", "t1", "t2", "<extra_id_1>", "t5"}));
}

TEST(Mask, TooShort) {
    try {
        mask_spans({"one"}, MaskingConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "too short to mask");
    }
    EXPECT_THROW(mask_spans({}, MaskingConfig{}), Error);
}

TEST(Mask, InvalidConfig) {
    EXPECT_THROW(mask_spans(toks(10), {0.0, 3.0, 1}), Error);
    EXPECT_THROW(mask_spans(toks(10), {1.0, 3.0, 1}), Error);
    EXPECT_THROW(mask_spans(toks(10), {0.15, 0.5, 1}), Error);
}

TEST(Mask, SentinelLikeInputRejected) {
    auto t = toks(10);
    t[3] = "<extra_id_0>";
    EXPECT_THROW(mask_spans(t, MaskingConfig{}), Error);
}

TEST(Mask, ExactTargetPerSequence) {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = mask_spans(toks(200), {0.15, 3.0, seed});
        EXPECT_EQ(masked_count(s), 30u);
        const double frac = static_cast<double>(masked_count(s)) / 200.0;
        EXPECT_GE(frac, 0.10);
        EXPECT_LE(frac, 0.20);
    }
    EXPECT_EQ(masked_count(mask_spans(toks(2), {0.15, 3.0, 1})), 1u);
}

TEST(Mask, SpansNeverTouch) {
    Rng rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        const size_t n = 2 + rng.below(300);
        const auto s = mask_spans(toks(n), {0.05 + 0.5 * rng.uniform(), 1.0 + 4 * rng.uniform(), rng.next_u64()});
        for (size_t i = 1; i < s.corrupted.size(); ++i) {
            EXPECT_FALSE(sentinel_index(s.corrupted[i]) >= 0 && sentinel_index(s.corrupted[i - 1]) >= 0);
        }
        long expect = 0;
        for (const auto& t : s.corrupted) {
            const long k = sentinel_index(t);
            if (k >= 0) EXPECT_EQ(k, expect++);
        }
    }
}

TEST(Mask, MeanSpanLengthNearThree) {
    // Long sequences leave room for gaps, so few spans merge.
    size_t spans = 0, masked = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
        const auto s = mask_spans(toks(2000), {0.15, 3.0, seed});
        for (const auto& t : s.target) (sentinel_index(t) >= 0 ? spans : masked) += 1;
    }
    EXPECT_NEAR(static_cast<double>(masked) / spans, 3.0, 0.35);
}

TEST(Mask, Deterministic) {
    const auto t = toks(120);
    const auto a = mask_spans(t, {0.15, 3.0, 42}), b = mask_spans(t, {0.15, 3.0, 42});
    EXPECT_EQ(a.corrupted, b.corrupted);
    EXPECT_EQ(a.target, b.target);
    EXPECT_NE(mask_spans(t, {0.15, 3.0, 43}).corrupted, a.corrupted);
}

TEST(Mask, FuzzRoundTrip) {
    Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 2 + rng.below(400);
        std::vector<std::string> t;
        for (size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(rng.below(20)));
        const auto s = mask_spans(t, {0.15, 3.0, rng.next_u64()});
        ASSERT_EQ(unmask(s.corrupted, s.target), t);
    }
}

TEST(Unmask, NoSentinels) {
    const auto t = toks(5);
    EXPECT_EQ(unmask(t, {}), t);
}

TEST(Unmask, SingleMiddleSpan) {
    const auto t = toks(9);
    const auto s = apply_span_mask(t, {{3, 3}});
    EXPECT_EQ(unmask(s.corrupted, s.target), t);
}

TEST(Unmask, MismatchIsFormatError) {
    const std::vector<std::string> corrupted = {"a", "<extra_id_0>", "b"};
    for (const std::vector<std::string>& target :
         {std::vector<std::string>{"<extra_id_1>", "x"}, std::vector<std::string>{},
          std::vector<std::string>{"x", "<extra_id_0>"},
          std::vector<std::string>{"<extra_id_0>", "x", "<extra_id_1>", "y"}}) {
        try {
            unmask(corrupted, target);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::kFormat);
        }
    }
}

TEST(Posterior, Uniform) {
    for (double c : {-5.0, 0.0, 7.5}) {
        const auto p = passage_posterior(Vector(4, c));
        for (double x : p) EXPECT_NEAR(x, 0.25, 1e-15);
    }
}

TEST(Posterior, ZeroAndLogThree) {
    const auto p = passage_posterior(Vector{0.0, std::log(3.0)});
    EXPECT_NEAR(p[0], 0.25, 1e-12);
    EXPECT_NEAR(p[1], 0.75, 1e-12);
}

TEST(Posterior, ShiftInvariantAndNormalized) {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        Vector l(1 + rng.below(20));
        for (auto& x : l) x = 10 * rng.normal();
        Vector shifted = l;
        for (auto& x : shifted) x += 100;
        const auto p = passage_posterior(l), q = passage_posterior(shifted);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        const auto ref = ref_softmax(l);
        for (size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(p[i], q[i], 1e-12);
            EXPECT_NEAR(p[i], static_cast<double>(ref[i]), 1e-13);
        }
    }
}

TEST(Posterior, Errors) {
    EXPECT_THROW(passage_posterior(Vector{}), Error);
    EXPECT_THROW(passage_posterior(Vector{1.0, NAN}), Error);
    EXPECT_THROW(passage_posterior(Vector{1.0, INFINITY}), Error);
}

TEST(RetrieverDist, Basics) {
    for (double x : retriever_distribution(Vector(5, 2.0), 0.3)) EXPECT_NEAR(x, 0.2, 1e-15);
    const Vector s = {1.0, 2.0, 4.0, -3.0};
    const auto hot = retriever_distribution(s, 1000.0);
    EXPECT_LE(*std::max_element(hot.begin(), hot.end()), 0.25 + 0.01);
    EXPECT_EQ(retriever_distribution(s, 1.0), passage_posterior(s));
    Vector shifted = s;
    for (auto& x : shifted) x -= 50;
    const auto a = retriever_distribution(s, 0.7), b = retriever_distribution(shifted, 0.7);
    for (size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    EXPECT_THROW(retriever_distribution(s, 0.0), Error);
    EXPECT_THROW(retriever_distribution(s, -1.0), Error);
}

TEST(Kl, ClosedForms) {
    EXPECT_NEAR(kl_divergence(Vector{1, 0}, Vector{0.5, 0.5}), std::log(2.0), 1e-9);
    const Vector p = {0.2, 0.3, 0.5};
    EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-12);
}

TEST(Kl, InfiniteDivergence) {
    try {
        kl_divergence(Vector{0.5, 0.5}, Vector{1, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("infinite divergence"), std::string::npos);
    }
}

TEST(Kl, InputValidation) {
    EXPECT_THROW(kl_divergence(Vector{0.5, 0.5}, Vector{1.0}), Error);
    EXPECT_THROW(kl_divergence(Vector{0.6, 0.6}, Vector{0.5, 0.5}), Error);
    EXPECT_THROW(kl_divergence(Vector{-0.1, 1.1}, Vector{0.5, 0.5}), Error);
}

TEST(Kl, MatchesHighPrecisionOracle) {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        const Vector p = random_dist(rng, 5), q = random_dist(rng, 5);
        long double ref = 0;
        for (size_t i = 0; i < 5; ++i) {
            ref += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
        }
        EXPECT_NEAR(kl_divergence(p, q), static_cast<double>(ref), 1e-14);
    }
}

TEST(Kl, GibbsInequality) {
    Rng rng(5);
    for (int t = 0; t < 10000; ++t) {
        const size_t k = 1 + rng.below(10);
        const Vector p = random_dist(rng, k), q = random_dist(rng, k);
        EXPECT_GE(kl_divergence(p, q), 0.0);
    }
}

TEST(Distill, ZeroAtPosterior) {
    const Vector loglik = {-1.0, -2.5, 0.3, -0.7};
    // theta * loglik induces exactly the posterior.
    for (double theta : {1.0, 2.0, 0.5}) {
        Vector scores = loglik;
        for (auto& x : scores) x *= theta;
        for (auto dir : {KlDirection::kRetrieverToPosterior, KlDirection::kPosteriorToRetriever}) {
            const auto r = distill_loss({loglik, scores, theta}, dir);
            EXPECT_NEAR(r.loss, 0.0, 1e-10);
            for (double g : r.grad) EXPECT_NEAR(g, 0.0, 1e-10);
        }
    }
}

TEST(Distill, GradientMatchesFiniteDifferences) {
    Rng rng(6);
    for (auto dir : {KlDirection::kRetrieverToPosterior, KlDirection::kPosteriorToRetriever}) {
        for (int trial = 0; trial < 20; ++trial) {
            DistillInputs in;
            for (int i = 0; i < 6; ++i) {
                in.loglik.push_back(2 * rng.normal());
                in.scores.push_back(2 * rng.normal());
            }
            in.temperature = 0.5 + rng.uniform();
            const auto r = distill_loss(in, dir);
            double diff = 0, norm = 0, sum = 0;
            for (size_t i = 0; i < 6; ++i) {
                const double h = 1e-6;
                DistillInputs a = in, b = in;
                a.scores[i] += h;
                b.scores[i] -= h;
                const double fd = (distill_loss(a, dir).loss - distill_loss(b, dir).loss) / (2 * h);
                diff += (fd - r.grad[i]) * (fd - r.grad[i]);
                norm += fd * fd;
                sum += r.grad[i];
            }
            EXPECT_LT(std::sqrt(diff / norm), 1e-5);
            EXPECT_NEAR(sum, 0.0, 1e-12);
        }
    }
}

TEST(Distill, SharperPosteriorRaisesLossForUniformScores) {
    const Vector base = {0.1, -0.4, 0.9, 0.0, -1.2};
    const Vector scores(5, 0.0);
    double prev = -1;
    for (double scale : {0.5, 1.0, 2.0, 4.0}) {
        Vector l = base;
        for (auto& x : l) x *= scale;
        const double loss = distill_loss({l, scores, 1.0}).loss;
        EXPECT_GT(loss, prev);
        prev = loss;
    }
}

TEST(Distill, DefaultDirectionIsRetrieverToPosterior) {
    const DistillInputs in{{0.0, 1.0, -1.0}, {0.5, 0.2, 0.1}, 1.0};
    const auto r = distill_loss(in);
    const auto p = retriever_distribution(in.scores, 1.0);
    const auto q = passage_posterior(in.loglik);
    EXPECT_NEAR(r.loss, kl_divergence(p, q), 1e-15);
    EXPECT_NEAR(distill_loss(in, KlDirection::kPosteriorToRetriever).loss, kl_divergence(q, p), 1e-15);
}

TEST(Distill, Errors) {
    EXPECT_THROW(distill_loss({{}, {}, 1.0}), Error);
    EXPECT_THROW(distill_loss({{0.0}, {0.0, 1.0}, 1.0}), Error);
    EXPECT_THROW(distill_loss({{0.0}, {0.0}, 0.0}), Error);
}
