#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vec.hpp"

namespace hdgrag {

enum class EmbedderKind { kHashedTf, kExternal };

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::kHashedTf;
    int dim = 256;
    bool normalize = true;
};

/// Lowercased whitespace tokens.
std::vector<std::string> embed_tokens(std::string_view text);

// Feature hashing. bucket = fnv1a64(token) mod dim; the sign is negative
// when the top bit of mix64(fnv1a64(token)) is set.
size_t hashed_bucket(std::string_view token, int dim);
double hashed_sign(std::string_view token);

/// Hashed term frequency embedding: each distinct token adds
/// sign * (1 + ln tf) to its bucket, then optional L2 normalization.
/// Throws on empty or whitespace-only text.
Vector embed_text(std::string_view text, const EmbedderSpec& spec);

/// Queries share the passage encoder.
Vector embed_query(std::string_view text, const EmbedderSpec& spec);

class TextEmbedder {
  public:
    virtual ~TextEmbedder() = default;
    virtual int dim() const = 0;
    /// `key` identifies the item (passage_id or query id); `text` its content.
    virtual Vector embed(std::string_view key, std::string_view text) const = 0;
};

class HashedTfEmbedder final : public TextEmbedder {
  public:
    explicit HashedTfEmbedder(EmbedderSpec spec);
    int dim() const override { return spec_.dim; }
    Vector embed(std::string_view key, std::string_view text) const override;

  private:
    EmbedderSpec spec_;
};

/// Serves precomputed vectors from a SEMB matrix and id sidecar.
class ExternalEmbedder final : public TextEmbedder {
  public:
    ExternalEmbedder(const std::string& matrix_path, const std::string& ids_path, bool normalize);
    int dim() const override { return dim_; }
    Vector embed(std::string_view key, std::string_view text) const override;

  private:
    int dim_ = 0;
    bool normalize_ = false;
    std::map<std::string, Vector, std::less<>> table_;
};

std::unique_ptr<TextEmbedder> make_embedder(
        const EmbedderSpec& spec,
        const std::string& external_matrix = {},
        const std::string& external_ids = {});

} // namespace hdgrag
