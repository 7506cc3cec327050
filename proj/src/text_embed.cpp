#include "text_embed.hpp"

#include <algorithm>
#include <cctype>

#include "corpus.hpp"
#include "hash.hpp"
#include "semb_io.hpp"

namespace hdgrag {

namespace {

void normalize_in_place(Vector& v) {
    const double n = l2_norm(v);
    if (n > 0.0) {
        for (double& x : v) {
            x /= n;
        }
    }
}

} // namespace

std::vector<std::string> embed_tokens(std::string_view text) {
    auto tokens = split_whitespace(text);
    for (auto& t : tokens) {
        std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) {
            return static_cast<char>(std::tolower(c));
        });
    }
    return tokens;
}

size_t hashed_bucket(std::string_view token, int dim) {
    return static_cast<size_t>(fnv1a64(token) % static_cast<uint64_t>(dim));
}

double hashed_sign(std::string_view token) {
    return (mix64(fnv1a64(token)) >> 63) ? -1.0 : 1.0;
}

Vector embed_text(std::string_view text, const EmbedderSpec& spec) {
    HDGRAG_REQUIRE(spec.dim >= 1, ErrorCode::kInvalidArgument, "embedding dimension must be >= 1");
    HDGRAG_REQUIRE(
            spec.kind == EmbedderKind::kHashedTf,
            ErrorCode::kInvalidArgument,
            "embed_text needs a hashed_tf spec; external vectors are served by ExternalEmbedder");
    auto tokens = embed_tokens(text);
    HDGRAG_REQUIRE(!tokens.empty(), ErrorCode::kInvalidArgument, "empty text");
    std::sort(tokens.begin(), tokens.end());

    Vector v(static_cast<size_t>(spec.dim), 0.0);
    for (size_t i = 0; i < tokens.size();) {
        size_t j = i;
        while (j < tokens.size() && tokens[j] == tokens[i]) {
            ++j;
        }
        const double weight = 1.0 + std::log(static_cast<double>(j - i));
        v[hashed_bucket(tokens[i], spec.dim)] += hashed_sign(tokens[i]) * weight;
        i = j;
    }
    if (spec.normalize) {
        normalize_in_place(v);
    }
    return v;
}

Vector embed_query(std::string_view text, const EmbedderSpec& spec) {
    return embed_text(text, spec);
}

HashedTfEmbedder::HashedTfEmbedder(EmbedderSpec spec) : spec_(spec) {
    HDGRAG_REQUIRE(spec_.dim >= 1, ErrorCode::kInvalidArgument, "embedding dimension must be >= 1");
}

Vector HashedTfEmbedder::embed(std::string_view, std::string_view text) const {
    return embed_text(text, spec_);
}

ExternalEmbedder::ExternalEmbedder(
        const std::string& matrix_path,
        const std::string& ids_path,
        bool normalize)
        : normalize_(normalize) {
    const auto m = read_semb(matrix_path);
    const auto ids = read_ids(ids_path);
    HDGRAG_REQUIRE(
            ids.size() == m.rows,
            ErrorCode::kFormat,
            "external embedding sidecar has " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(m.rows) + " rows");
    HDGRAG_REQUIRE(m.dim >= 1, ErrorCode::kFormat, "external embeddings have zero dimension");
    dim_ = static_cast<int>(m.dim);
    for (size_t i = 0; i < ids.size(); ++i) {
        Vector v(m.row(i), m.row(i) + m.dim);
        HDGRAG_REQUIRE(all_finite(v), ErrorCode::kFormat, "non-finite external embedding");
        HDGRAG_REQUIRE(
                table_.emplace(ids[i], std::move(v)).second,
                ErrorCode::kConflict,
                "duplicate external embedding id '" + ids[i] + "'");
    }
}

Vector ExternalEmbedder::embed(std::string_view key, std::string_view) const {
    auto it = table_.find(key);
    HDGRAG_REQUIRE(
            it != table_.end(),
            ErrorCode::kNotFound,
            "no external embedding for '" + std::string(key) + "'");
    Vector v = it->second;
    if (normalize_) {
        normalize_in_place(v);
    }
    return v;
}

std::unique_ptr<TextEmbedder> make_embedder(
        const EmbedderSpec& spec,
        const std::string& external_matrix,
        const std::string& external_ids) {
    if (spec.kind == EmbedderKind::kExternal) {
        return std::make_unique<ExternalEmbedder>(external_matrix, external_ids, spec.normalize);
    }
    return std::make_unique<HashedTfEmbedder>(spec);
}

} // namespace hdgrag
