#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vec.hpp"

namespace hdgrag {

inline constexpr size_t kDefaultTopK = 20;

/// E = M (+) H: text part first, structural part second.
Vector fuse(std::span<const double> text, std::span<const double> structure);

/// E' = Q (+) E, the per-passage reader input.
Vector make_reader_input(std::span<const double> query, std::span<const double> fused);

struct FusedRecord {
    std::string passage_id;
    Vector text;       // M
    Vector structure;  // H

    Vector fused() const { return fuse(text, structure); }
};

struct ScoredPassage {
    std::string passage_id;
    double text_score = 0.0;
    std::optional<double> combined_score;
};

struct RetrievalResult {
    std::vector<ScoredPassage> hits;
    size_t k_requested = 0;
    /// Set when the ranking went through the structure-aware rerank, which
    /// is an extension on top of plain dense retrieval.
    bool structure_reranked = false;

    size_t k_returned() const { return hits.size(); }
};

/// Exact dot-product store. Records are kept sorted by passage_id, so the
/// insertion order never affects results. Immutable once built.
class FlatIndex {
  public:
    FlatIndex() = default;

    /// Throws kDimensionMismatch on ragged dimensions and kConflict on
    /// duplicate passage ids.
    static FlatIndex build(std::vector<FusedRecord> records);

    size_t size() const { return records_.size(); }
    size_t text_dim() const { return text_dim_; }
    size_t struct_dim() const { return struct_dim_; }
    const std::vector<FusedRecord>& records() const { return records_; }
    const FusedRecord* find(std::string_view passage_id) const;

    /// min(k, N) records with the highest dot(Q, M); scores non-increasing,
    /// ties by ascending passage_id.
    RetrievalResult topk(std::span<const double> query, size_t k = kDefaultTopK) const;

    /// Files: text.semb/text.ids, struct.semb/struct.ids, manifest.txt.
    void save(const std::string& dir, size_t k_default = kDefaultTopK) const;
    static FlatIndex load(const std::string& dir, size_t* k_default = nullptr);

  private:
    std::vector<FusedRecord> records_;
    size_t text_dim_ = 0;
    size_t struct_dim_ = 0;
};

/// Re-scores a retrieved pool: text score plus beta times the mean cosine
/// between the record's structural embedding and every other pool member's.
/// Returns the top k of the re-sorted pool. A pool of one gets a zero
/// structural term.
RetrievalResult rerank_with_structure(
        const RetrievalResult& pool,
        const FlatIndex& index,
        double beta = 0.5,
        size_t k = kDefaultTopK);

} // namespace hdgrag
