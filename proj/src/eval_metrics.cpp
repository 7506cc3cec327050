#include "eval_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corpus.hpp"
#include "error.hpp"

namespace hdgrag {

std::vector<std::string> normalize_answer(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) {
            continue;
        }
        cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    return split_whitespace(cleaned);
}

double exact_match(std::string_view prediction, std::string_view gold) {
    return normalize_answer(prediction) == normalize_answer(gold) ? 1.0 : 0.0;
}

double token_f1(std::string_view prediction, std::string_view gold) {
    const auto p = normalize_answer(prediction);
    const auto g = normalize_answer(gold);
    if (p.empty() && g.empty()) {
        return 1.0;
    }
    if (p.empty() || g.empty()) {
        return 0.0;
    }
    std::map<std::string, int> counts;
    for (const auto& t : g) {
        ++counts[t];
    }
    int common = 0;
    for (const auto& t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) {
        return 0.0;
    }
    const double precision = static_cast<double>(common) / static_cast<double>(p.size());
    const double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2 * precision * recall / (precision + recall);
}

double query_relevance(std::span<const double> query, const std::vector<Vector>& retrieved) {
    HDGRAG_REQUIRE(!retrieved.empty(), ErrorCode::kInvalidArgument, "relevance of an empty retrieval");
    double sum = 0.0;
    for (const auto& m : retrieved) {
        sum += dot(query, m);
    }
    return sum / static_cast<double>(retrieved.size());
}

double diversity(const std::vector<std::string>& ids) {
    HDGRAG_REQUIRE(!ids.empty(), ErrorCode::kInvalidArgument, "diversity of an empty retrieval");
    const std::set<std::string> unique(ids.begin(), ids.end());
    return static_cast<double>(unique.size()) / static_cast<double>(ids.size());
}

double faithfulness(double accuracy, double relevance) {
    HDGRAG_REQUIRE(
            accuracy >= 0 && relevance >= 0,
            ErrorCode::kInvalidArgument,
            "faithfulness inputs must be non-negative");
    HDGRAG_REQUIRE(
            accuracy + relevance > 0,
            ErrorCode::kInvalidArgument,
            "faithfulness undefined when accuracy and relevance are both 0");
    return 2 * accuracy * relevance / (accuracy + relevance);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

std::string MetricReport::to_kv() const {
    std::ostringstream out;
    out << "queries=" << queries << '\n'
        << "exact_match=" << fmt(exact_match) << '\n'
        << "f1=" << fmt(f1) << '\n'
        << "relevance=" << fmt(relevance) << '\n'
        << "diversity=" << fmt(diversity) << '\n'
        << "faithfulness=" << fmt(faithfulness) << '\n';
    return out.str();
}

std::string QueryMetrics::to_json() const {
    nlohmann::json rec = {
            {"query_id", query_id},
            {"exact_match", exact_match},
            {"f1", f1},
            {"relevance", relevance},
            {"diversity", diversity},
    };
    return rec.dump();
}

MetricReport aggregate(const std::vector<QueryMetrics>& per_query) {
    HDGRAG_REQUIRE(!per_query.empty(), ErrorCode::kInvalidArgument, "no queries to aggregate");
    MetricReport r;
    r.queries = per_query.size();
    for (const auto& q : per_query) {
        r.exact_match += q.exact_match;
        r.f1 += q.f1;
        r.relevance += q.relevance;
        r.diversity += q.diversity;
    }
    const double n = static_cast<double>(per_query.size());
    r.exact_match /= n;
    r.f1 /= n;
    r.relevance /= n;
    r.diversity /= n;
    // Negative mean relevance (possible with signed embeddings) gives no
    // meaningful harmonic mean; report 0 there.
    r.faithfulness = (r.exact_match > 0 && r.relevance > 0) ? faithfulness(r.exact_match, r.relevance) : 0.0;
    return r;
}

} // namespace hdgrag
