#include "training_signals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace hdgrag {

std::string sentinel(size_t n) {
    return "<extra_id_" + std::to_string(n) + ">";
}

long sentinel_index(std::string_view token) {
    constexpr std::string_view prefix = "<extra_id_";
    if (token.size() <= prefix.size() + 1 || !token.starts_with(prefix) || token.back() != '>') {
        return -1;
    }
    const auto digits = token.substr(prefix.size(), token.size() - prefix.size() - 1);
    if (digits.size() > 1 && digits.front() == '0') {
        return -1;
    }
    long n = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc() || end != digits.data() + digits.size() || n < 0) {
        return -1;
    }
    return n;
}

MaskedSample apply_span_mask(
        const std::vector<std::string>& tokens,
        std::vector<std::pair<size_t, size_t>> spans) {
    std::vector<bool> masked(tokens.size(), false);
    for (const auto& [start, len] : spans) {
        HDGRAG_REQUIRE(
                start + len <= tokens.size(),
                ErrorCode::kInvalidArgument,
                "span exceeds token sequence");
        std::fill_n(masked.begin() + static_cast<std::ptrdiff_t>(start), len, true);
    }
    MaskedSample out;
    size_t next = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (!masked[i]) {
            out.corrupted.push_back(tokens[i]);
            continue;
        }
        if (i == 0 || !masked[i - 1]) {
            out.corrupted.push_back(sentinel(next));
            out.target.push_back(sentinel(next));
            ++next;
        }
        out.target.push_back(tokens[i]);
    }
    return out;
}

MaskedSample mask_spans(const std::vector<std::string>& tokens, const MaskingConfig& cfg) {
    HDGRAG_REQUIRE(
            cfg.mask_ratio > 0 && cfg.mask_ratio < 1,
            ErrorCode::kInvalidArgument,
            "mask_ratio must be in (0, 1)");
    HDGRAG_REQUIRE(cfg.mean_span >= 1, ErrorCode::kInvalidArgument, "mean_span must be >= 1");
    HDGRAG_REQUIRE(tokens.size() >= 2, ErrorCode::kInvalidArgument, "too short to mask");
    for (const auto& t : tokens) {
        HDGRAG_REQUIRE(
                sentinel_index(t) < 0,
                ErrorCode::kInvalidArgument,
                "input already contains sentinel token " + t);
    }
    const size_t len = tokens.size();
    const auto n_mask = std::clamp<size_t>(
            static_cast<size_t>(std::llround(cfg.mask_ratio * static_cast<double>(len))), 1, len - 1);
    Rng rng(cfg.seed);

    // Geometric span lengths (support 1, 2, ...) until the budget is spent;
    // the last span is cut to hit it exactly.
    const double stop_p = 1.0 / cfg.mean_span;
    std::vector<size_t> lengths;
    for (size_t total = 0; total < n_mask;) {
        size_t l = 1;
        if (stop_p < 1.0) {
            double u;
            do {
                u = rng.uniform();
            } while (u <= 0.0);
            l += static_cast<size_t>(std::floor(std::log(u) / std::log1p(-stop_p)));
        }
        l = std::min(l, n_mask - total);
        lengths.push_back(l);
        total += l;
    }
    rng.shuffle(lengths);

    // Each interior gap needs one unmasked token. Merge spans while there
    // are too few unmasked tokens to separate them.
    const size_t n_keep = len - n_mask;
    while (lengths.size() > 1 && lengths.size() - 1 > n_keep) {
        const size_t last = lengths.back();
        lengths.pop_back();
        lengths.back() += last;
    }
    const size_t n_spans = lengths.size();

    // Distribute the spare unmasked tokens over n_spans + 1 gaps (leading,
    // interior, trailing) uniformly via sorted cut points.
    const size_t spare = n_keep - (n_spans - 1);
    std::vector<size_t> cuts(n_spans);
    for (auto& c : cuts) {
        c = static_cast<size_t>(rng.below(spare + 1));
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<size_t, size_t>> spans;
    size_t pos = 0;
    size_t prev_cut = 0;
    for (size_t s = 0; s < n_spans; ++s) {
        pos += (cuts[s] - prev_cut) + (s > 0 ? 1 : 0);
        prev_cut = cuts[s];
        spans.emplace_back(pos, lengths[s]);
        pos += lengths[s];
    }
    return apply_span_mask(tokens, std::move(spans));
}

std::vector<std::string> unmask(
        const std::vector<std::string>& corrupted,
        const std::vector<std::string>& target) {
    // Target: sentinel_0 span_0 sentinel_1 span_1 ...
    std::vector<std::vector<std::string>> spans;
    for (const auto& t : target) {
        const long s = sentinel_index(t);
        if (s >= 0) {
            HDGRAG_REQUIRE(
                    static_cast<size_t>(s) == spans.size(),
                    ErrorCode::kFormat,
                    "target sentinels out of order at " + t);
            spans.emplace_back();
            continue;
        }
        HDGRAG_REQUIRE(!spans.empty(), ErrorCode::kFormat, "target does not start with a sentinel");
        spans.back().push_back(t);
    }
    std::vector<std::string> out;
    size_t used = 0;
    for (const auto& t : corrupted) {
        const long s = sentinel_index(t);
        if (s < 0) {
            out.push_back(t);
            continue;
        }
        HDGRAG_REQUIRE(
                static_cast<size_t>(s) == used && used < spans.size(),
                ErrorCode::kFormat,
                "sentinel mismatch between corrupted and target at " + t);
        out.insert(out.end(), spans[used].begin(), spans[used].end());
        ++used;
    }
    HDGRAG_REQUIRE(
            used == spans.size(),
            ErrorCode::kFormat,
            "target has sentinels missing from the corrupted sequence");
    return out;
}

std::string masked_sample_to_json(const MaskedSample& s, uint64_t seed) {
    nlohmann::json rec = {{"corrupted", s.corrupted}, {"target", s.target}, {"seed", seed}};
    return rec.dump();
}

namespace {

Vector log_softmax(std::span<const double> x) {
    HDGRAG_REQUIRE(!x.empty(), ErrorCode::kInvalidArgument, "distribution over zero passages");
    HDGRAG_REQUIRE(all_finite(x), ErrorCode::kInvalidArgument, "non-finite input to softmax");
    const double mx = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (double v : x) {
        sum += std::exp(v - mx);
    }
    const double log_z = std::log(sum);
    Vector out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        out[i] = (x[i] - mx) - log_z;
    }
    return out;
}

Vector exp_of(const Vector& logp) {
    Vector p(logp.size());
    double sum = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logp[i]);
        sum += p[i];
    }
    for (double& v : p) {
        v /= sum;
    }
    return p;
}

Vector scaled(std::span<const double> scores, double temperature) {
    HDGRAG_REQUIRE(temperature > 0, ErrorCode::kInvalidArgument, "temperature must be > 0");
    Vector z(scores.begin(), scores.end());
    for (double& v : z) {
        v /= temperature;
    }
    return z;
}

} // namespace

Vector passage_posterior(std::span<const double> loglik) {
    return exp_of(log_softmax(loglik));
}

Vector retriever_distribution(std::span<const double> scores, double temperature) {
    return exp_of(log_softmax(scaled(scores, temperature)));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    HDGRAG_REQUIRE(p.size() == q.size(), ErrorCode::kDimensionMismatch, "KL: length mismatch");
    HDGRAG_REQUIRE(!p.empty(), ErrorCode::kInvalidArgument, "KL: empty distributions");
    double sp = 0.0, sq = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        HDGRAG_REQUIRE(
                p[i] >= 0 && q[i] >= 0 && std::isfinite(p[i]) && std::isfinite(q[i]),
                ErrorCode::kInvalidArgument,
                "KL: entries must be finite and non-negative");
        sp += p[i];
        sq += q[i];
    }
    HDGRAG_REQUIRE(
            std::abs(sp - 1.0) <= 1e-9 && std::abs(sq - 1.0) <= 1e-9,
            ErrorCode::kInvalidArgument,
            "KL: inputs must be normalized");
    double kl = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            continue;
        }
        HDGRAG_REQUIRE(q[i] > 0.0, ErrorCode::kInvalidArgument, "infinite divergence");
        kl += p[i] * std::log(p[i] / q[i]);
    }
    // Rounding can leave a tiny negative residue.
    return std::max(kl, 0.0);
}

DistillResult distill_loss(const DistillInputs& in, KlDirection direction) {
    HDGRAG_REQUIRE(
            in.loglik.size() == in.scores.size(),
            ErrorCode::kDimensionMismatch,
            "distill: loglik and scores differ in length");
    const Vector log_q = log_softmax(in.loglik);
    const Vector log_p = log_softmax(scaled(in.scores, in.temperature));
    const Vector p = exp_of(log_p);
    const Vector q = exp_of(log_q);
    const size_t k = p.size();

    DistillResult out;
    out.grad.assign(k, 0.0);
    if (direction == KlDirection::kRetrieverToPosterior) {
        // L = sum p (log p - log q); dL/dz_j = p_j (g_j - L), g = log p - log q.
        for (size_t i = 0; i < k; ++i) {
            out.loss += p[i] * (log_p[i] - log_q[i]);
        }
        for (size_t j = 0; j < k; ++j) {
            out.grad[j] = p[j] * ((log_p[j] - log_q[j]) - out.loss) / in.temperature;
        }
    } else {
        // L = sum q (log q - log p); dL/dz_j = p_j - q_j.
        for (size_t i = 0; i < k; ++i) {
            out.loss += q[i] * (log_q[i] - log_p[i]);
        }
        for (size_t j = 0; j < k; ++j) {
            out.grad[j] = (p[j] - q[j]) / in.temperature;
        }
    }
    out.loss = std::max(out.loss, 0.0);
    return out;
}

} // namespace hdgrag
