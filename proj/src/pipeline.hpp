#pragma once

// File-level pipeline stages. Every stage reads documented files from the
// output directory (or the corpus file) and writes its own artifacts there.
//
// Seeds: one global seed; each stage uses derive_seed(seed, "<stage>").

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eval_metrics.hpp"
#include "fusion_index.hpp"
#include "hdg.hpp"
#include "struct_embed.hpp"
#include "text_embed.hpp"
#include "training_signals.hpp"

namespace hdgrag {

struct PipelineConfig {
    std::string corpus;
    std::string out = "out";
    std::string domain;  // empty: all domains
    int max_words = 100;
    int max_tokens = 512;
    int d_t = 256;
    bool normalize = true;
    std::string embedder = "hashed_tf";  // or "external"
    std::string external_matrix;
    std::string external_ids;
    int d_s = 64;
    int gnn_input_dim = 64;
    int gnn_layers = 2;
    int gnn_heads = 2;
    int epochs = 100;
    double learning_rate = 0.005;
    int k_neg = 1;
    double holdout = 0.1;
    size_t k = kDefaultTopK;
    size_t pool = 40;
    double beta = 0.5;
    double theta = 1.0;
    std::string kl_direction = "retriever_to_posterior";
    double mask_ratio = 0.15;
    double mean_span = 3.0;
    std::string diversity_level = "passage";  // or "document"
    uint64_t seed = 0;

    /// Throws kInvalidArgument for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    /// Flat "key=value" lines; '#' starts a comment.
    void load_file(const std::string& path);
    std::string get(const std::string& key) const;
    static std::vector<std::string> keys();
    void validate() const;

    EmbedderSpec embedder_spec() const;
    GnnConfig gnn_config() const;
    TrainConfig train_config() const;
    FeatureConfig feature_config() const;
    MaskingConfig masking_config() const;
    KlDirection direction() const;
};

/// Paths of every artifact inside the output directory.
struct ArtifactPaths {
    explicit ArtifactPaths(const std::string& out);
    std::string corpus, passages;
    std::string graph_nodes, graph_edges, graph_links, graph_stats;
    std::string doc_struct_matrix, doc_struct_ids, train_report;
    std::string text_matrix, text_ids, struct_matrix, struct_ids;
    std::string index_dir;
    std::string masked, distill, metrics_kv, metrics_jsonl;
};

struct IngestSummary {
    size_t documents = 0;
    size_t passages = 0;
};

IngestSummary run_ingest(const PipelineConfig& cfg);
GraphStats run_build_graph(const PipelineConfig& cfg);
TrainReport run_train_gnn(const PipelineConfig& cfg);
size_t run_embed(const PipelineConfig& cfg);
size_t run_index(const PipelineConfig& cfg);
size_t run_mask(const PipelineConfig& cfg);
/// Input lines: {"query_id"?, "scores": [...], "loglik": [...]}.
size_t run_distill(const PipelineConfig& cfg, const std::string& input_path);
/// Input lines: {"query_id", "query", "gold", "prediction"}.
MetricReport run_eval(const PipelineConfig& cfg, const std::string& queries_path);
GraphStats run_stats(const PipelineConfig& cfg);

/// Corpus used by stages: the --corpus file when set, otherwise the copy
/// written by ingest. Applies the domain filter.
Corpus load_stage_corpus(const PipelineConfig& cfg);

/// In-memory build used by tests and experiments: passages, text and
/// structural embeddings fused into a flat index.
FlatIndex build_index_in_memory(
        const std::vector<Passage>& passages,
        const TextEmbedder& embedder,
        const DocEmbeddings& doc_embeddings);

std::vector<Passage> read_passages(const std::string& path);

} // namespace hdgrag
