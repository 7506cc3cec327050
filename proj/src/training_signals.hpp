#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vec.hpp"

namespace hdgrag {

// ---- span masking -------------------------------------------------------

struct MaskingConfig {
    double mask_ratio = 0.15;
    double mean_span = 3.0;
    uint64_t seed = 0;
};

/// Corrupted input and target for span-corruption pretraining. Each dropped
/// span becomes one "<extra_id_N>" sentinel in `corrupted`; `target` lists
/// the sentinels in the same order, each followed by its span's tokens.
struct MaskedSample {
    std::vector<std::string> corrupted;
    std::vector<std::string> target;
};

std::string sentinel(size_t n);
/// Index of a sentinel literal, or -1.
long sentinel_index(std::string_view token);

/// Masks round(mask_ratio * len) tokens in spans of geometric length
/// (mean mean_span, min 1). Spans never touch. Deterministic in config.seed.
MaskedSample mask_spans(const std::vector<std::string>& tokens, const MaskingConfig& cfg);

/// Builds the sample from explicit (start, length) spans. Overlapping or
/// adjacent spans merge into one sentinel.
MaskedSample apply_span_mask(
        const std::vector<std::string>& tokens,
        std::vector<std::pair<size_t, size_t>> spans);

/// Splices target spans back at their sentinels. Throws kFormat when the
/// sentinel sequences disagree.
std::vector<std::string> unmask(
        const std::vector<std::string>& corrupted,
        const std::vector<std::string>& target);

/// {"corrupted": [...], "target": [...], "seed": n}
std::string masked_sample_to_json(const MaskedSample& s, uint64_t seed);

// ---- distillation -------------------------------------------------------

/// softmax(loglik), max-subtracted.
Vector passage_posterior(std::span<const double> loglik);

/// softmax(scores / temperature).
Vector retriever_distribution(std::span<const double> scores, double temperature);

/// sum p ln(p / q) with 0 ln 0 = 0. Throws "infinite divergence" when
/// p_i > 0 and q_i = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

enum class KlDirection {
    kRetrieverToPosterior,  // KL(retriever || posterior)
    kPosteriorToRetriever,  // KL(posterior || retriever)
};

struct DistillInputs {
    Vector loglik;  // reader log-likelihood of the target per passage
    Vector scores;  // retriever dot-product scores per passage
    double temperature = 1.0;
};

struct DistillResult {
    double loss = 0.0;
    Vector grad;  // d loss / d scores
};

DistillResult distill_loss(
        const DistillInputs& in,
        KlDirection direction = KlDirection::kRetrieverToPosterior);

} // namespace hdgrag
