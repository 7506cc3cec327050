#pragma once

// Structural encoder: a heterogeneous graph attention network trained by
// link prediction on the base edges of the document graph. This is a
// simplified stand-in for HGT: relation-specific message maps with
// GAT-style additive attention, no temporal encoding, no per-type
// key/query/value split.
//
// Node states are stored column-wise (dim x node_count) in global node
// order (see HeteroGraph::global_index).

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdg.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace hdgrag {

using Matrix = Eigen::MatrixXd;

/// Each base edge type is traversed in both directions.
inline constexpr size_t kRelationCount = 2 * kEdgeTypeCount;

struct GnnConfig {
    int input_dim = 64;
    int dim = 64;
    int layers = 2;
    int heads = 2;
    double leaky_slope = 0.2;
    /// Message maps start at this fraction of the self map's scale, so an
    /// untrained encoder is dominated by each node's own state.
    double message_init_scale = 0.1;
};

struct FeatureConfig {
    int input_dim = 64;
    int title_dim = 256;
    uint64_t seed = 0;
};

/// All tensors are matrices; vectors are single columns.
struct GnnParams {
    std::array<Matrix, kNodeTypeCount> input_proj;  // dim x input_dim
    std::array<Matrix, kNodeTypeCount> input_bias;  // dim x 1
    struct Layer {
        std::array<Matrix, kRelationCount> message;  // dim x dim
        std::array<Matrix, kRelationCount> att_src;  // dim x 1, split per head
        std::array<Matrix, kRelationCount> att_dst;  // dim x 1, split per head
        Matrix self;                                 // dim x dim
        Matrix bias;                                 // dim x 1
    };
    std::vector<Layer> layers;

    static GnnParams zeros(const GnnConfig& cfg);
    static GnnParams random(const GnnConfig& cfg, uint64_t seed);

    void for_each(const std::function<void(Matrix&)>& fn);
    void for_each(const std::function<void(const Matrix&)>& fn) const;
    size_t size() const;
    Vector flatten() const;
    void assign(const Vector& flat);
    bool all_finite() const;
};

/// Title projection used for Paper features: input_dim x title_dim,
/// N(0, 1/input_dim) entries drawn from the feature seed.
Matrix title_projection(const FeatureConfig& cfg);

/// Paper nodes with a title get title_projection * embed_text(title);
/// other nodes get a unit vector seeded by (seed, type, key).
Matrix init_node_features(
        const HeteroGraph& graph,
        const std::map<std::string, std::string, std::less<>>& titles,
        const FeatureConfig& cfg);

std::map<std::string, std::string, std::less<>> titles_of(const Corpus& corpus);

/// Final-layer states for every node.
Matrix gnn_forward(
        const HeteroGraph& graph,
        const GnnParams& params,
        const GnnConfig& cfg,
        const Matrix& features);

struct LinkSample {
    EdgeType type;
    uint32_t src;  // global node index
    uint32_t dst;  // global node index
    double label;
};

struct LinkPredBatch {
    std::vector<LinkSample> positives;
    std::vector<LinkSample> negatives;
};

/// All edges of the graph as positive samples, in sorted edge order.
std::vector<LinkSample> positive_samples(const HeteroGraph& graph);

/// k_neg corrupted destinations per positive, uniform within the
/// destination type, never equal to a known positive of that edge type.
LinkPredBatch sample_link_batch(
        const HeteroGraph& known,
        const std::vector<LinkSample>& positives,
        int k_neg,
        Rng& rng);

/// Mean binary cross-entropy of sigmoid(dot(h_src, h_dst)). Fills `grad`
/// (same shapes as params) when non-null. Message passing runs on `graph`.
double link_loss(
        const HeteroGraph& graph,
        const GnnParams& params,
        const GnnConfig& cfg,
        const Matrix& features,
        const std::vector<LinkSample>& samples,
        GnnParams* grad);

/// Mann-Whitney AUC; ties count one half.
double roc_auc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 0.005;
    int k_neg = 1;
    uint64_t seed = 0;
    double holdout = 0.1;
    GnnConfig gnn;
};

struct TrainReport {
    int epochs = 0;
    double final_loss = 0.0;
    std::vector<double> loss_history;
    std::array<double, kEdgeTypeCount> auc;      // NaN when no held-out edges
    std::array<double, kEdgeTypeCount> pre_auc;  // before training
    double auc_overall = 0.0;
    double pre_auc_overall = 0.0;
    size_t train_edges = 0;
    size_t holdout_edges = 0;

    std::string to_kv() const;
};

struct TrainResult {
    GnnParams params;
    TrainReport report;
};

/// Full-batch Adam on link prediction with a per-type held-out split.
/// Throws kUntrainable on a graph without edges.
TrainResult train_link_prediction(
        const HeteroGraph& graph,
        const Matrix& features,
        const TrainConfig& cfg);

/// Frozen encoder: extraction never mutates parameters.
class StructuralEncoder {
  public:
    StructuralEncoder(GnnParams params, GnnConfig cfg)
            : params_(std::move(params)), cfg_(cfg) {}

    const GnnParams& params() const { return params_; }
    const GnnConfig& config() const { return cfg_; }

    /// Paper node embeddings keyed by doc_id.
    std::map<std::string, Vector, std::less<>> document_embeddings(
            const HeteroGraph& graph,
            const Matrix& features) const;

  private:
    GnnParams params_;
    GnnConfig cfg_;
};

using DocEmbeddings = std::map<std::string, Vector, std::less<>>;

/// Throws kNotFound for an unknown doc_id.
const Vector& document_embedding(const DocEmbeddings& table, std::string_view doc_id);

/// Every passage carries its document's embedding verbatim.
const Vector& passage_structural_embedding(const Passage& passage, const DocEmbeddings& table);

} // namespace hdgrag
