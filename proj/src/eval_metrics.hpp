#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vec.hpp"

namespace hdgrag {

/// Lowercase, punctuation stripped, whitespace split.
std::vector<std::string> normalize_answer(std::string_view s);

double exact_match(std::string_view prediction, std::string_view gold);

/// Harmonic mean of token precision and recall over normalized multisets.
/// Both empty scores 1, exactly one empty scores 0.
double token_f1(std::string_view prediction, std::string_view gold);

/// Mean dot(Q, M_i) over retrieved passages. Raw dot-product scale, so
/// values above 1 are possible with unnormalized embeddings.
double query_relevance(std::span<const double> query, const std::vector<Vector>& retrieved);

/// |unique ids| / |ids|.
double diversity(const std::vector<std::string>& retrieved_ids);

/// 2ar / (a + r). Not clamped: relevance above 1 can push it above 1.
/// Throws when a = r = 0.
double faithfulness(double accuracy, double relevance);

struct MetricReport {
    double exact_match = 0.0;
    double f1 = 0.0;
    double relevance = 0.0;
    double diversity = 0.0;
    double faithfulness = 0.0;
    size_t queries = 0;

    std::string to_kv() const;
};

struct QueryMetrics {
    std::string query_id;
    double exact_match = 0.0;
    double f1 = 0.0;
    double relevance = 0.0;
    double diversity = 0.0;

    std::string to_json() const;
};

/// Arithmetic means over queries; faithfulness is taken on the mean exact
/// match and mean relevance.
MetricReport aggregate(const std::vector<QueryMetrics>& per_query);

} // namespace hdgrag
