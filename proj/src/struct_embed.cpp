#include "struct_embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "error.hpp"
#include "hash.hpp"
#include "text_embed.hpp"

namespace hdgrag {

namespace {

size_t relation_index(EdgeType et, bool reverse) {
    return static_cast<size_t>(et) * 2 + (reverse ? 1 : 0);
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = stddev * rng.normal();
        }
    }
    return m;
}

void check_config(const GnnConfig& cfg) {
    HDGRAG_REQUIRE(
            cfg.input_dim >= 1 && cfg.dim >= 1 && cfg.layers >= 1 && cfg.heads >= 1,
            ErrorCode::kInvalidArgument,
            "GNN dimensions, layers and heads must be positive");
    HDGRAG_REQUIRE(
            cfg.dim % cfg.heads == 0,
            ErrorCode::kInvalidArgument,
            "GNN dimension must be divisible by the head count");
}

// Edges of one relation, grouped by destination.
struct RelationEdges {
    std::vector<uint32_t> src;
    std::vector<uint32_t> dst;
    std::vector<size_t> seg;  // segment boundaries: edges [seg[i], seg[i+1]) share dst
};

using Topology = std::array<RelationEdges, kRelationCount>;

Topology make_topology(const HeteroGraph& g) {
    Topology topo;
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        const auto et = static_cast<EdgeType>(e);
        const auto [st, dt] = edge_signature(et);
        for (bool reverse : {false, true}) {
            std::vector<std::pair<uint32_t, uint32_t>> pairs;  // (dst, src)
            for (const auto& [s, d] : g.edges(et)) {
                const auto gs = static_cast<uint32_t>(g.global_index(st, s));
                const auto gd = static_cast<uint32_t>(g.global_index(dt, d));
                pairs.emplace_back(reverse ? gs : gd, reverse ? gd : gs);
            }
            std::sort(pairs.begin(), pairs.end());
            auto& rel = topo[relation_index(et, reverse)];
            for (size_t i = 0; i < pairs.size(); ++i) {
                if (i == 0 || pairs[i].first != pairs[i - 1].first) {
                    rel.seg.push_back(i);
                }
                rel.dst.push_back(pairs[i].first);
                rel.src.push_back(pairs[i].second);
            }
            rel.seg.push_back(pairs.size());
        }
    }
    return topo;
}

struct LayerCache {
    Matrix h_in;
    std::array<Matrix, kRelationCount> msg;
    std::array<std::vector<double>, kRelationCount> pre;    // edge * heads + head
    std::array<std::vector<double>, kRelationCount> alpha;  // edge * heads + head
    Matrix h_out;
};

struct ForwardCache {
    Matrix h0;
    std::vector<LayerCache> layers;
};

Matrix input_states(const HeteroGraph& g, const GnnParams& p, const Matrix& x) {
    Matrix h(p.input_proj[0].rows(), x.cols());
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        const auto type = static_cast<NodeType>(t);
        const auto n = static_cast<Eigen::Index>(g.node_count(type));
        if (n == 0) {
            continue;
        }
        const auto off = static_cast<Eigen::Index>(g.type_offset(type));
        h.middleCols(off, n) =
                (p.input_proj[t] * x.middleCols(off, n)).colwise() + p.input_bias[t].col(0);
    }
    return h;
}

void forward_layer(
        const Topology& topo,
        const GnnParams::Layer& L,
        const GnnConfig& cfg,
        LayerCache& c) {
    const int dh = cfg.dim / cfg.heads;
    Matrix z = (L.self * c.h_in).colwise() + L.bias.col(0);
    for (size_t r = 0; r < kRelationCount; ++r) {
        const auto& rel = topo[r];
        if (rel.src.empty()) {
            continue;
        }
        const Matrix& m = c.msg[r] = L.message[r] * c.h_in;
        auto& pre = c.pre[r];
        auto& alpha = c.alpha[r];
        pre.assign(rel.src.size() * cfg.heads, 0.0);
        alpha.assign(rel.src.size() * cfg.heads, 0.0);
        for (int h = 0; h < cfg.heads; ++h) {
            const auto as = L.att_src[r].col(0).segment(h * dh, dh);
            const auto ad = L.att_dst[r].col(0).segment(h * dh, dh);
            for (size_t s = 0; s + 1 < rel.seg.size(); ++s) {
                const size_t b = rel.seg[s], e = rel.seg[s + 1];
                const uint32_t v = rel.dst[b];
                const double dst_term = ad.dot(m.col(v).segment(h * dh, dh));
                double mx = -std::numeric_limits<double>::infinity();
                for (size_t i = b; i < e; ++i) {
                    const double x = as.dot(m.col(rel.src[i]).segment(h * dh, dh)) + dst_term;
                    pre[i * cfg.heads + h] = x;
                    const double act = x > 0 ? x : cfg.leaky_slope * x;
                    alpha[i * cfg.heads + h] = act;
                    mx = std::max(mx, act);
                }
                double sum = 0.0;
                for (size_t i = b; i < e; ++i) {
                    double& a = alpha[i * cfg.heads + h];
                    a = std::exp(a - mx);
                    sum += a;
                }
                for (size_t i = b; i < e; ++i) {
                    double& a = alpha[i * cfg.heads + h];
                    a /= sum;
                    z.col(v).segment(h * dh, dh) += a * m.col(rel.src[i]).segment(h * dh, dh);
                }
            }
        }
    }
    c.h_out = z.array().tanh().matrix();
}

// Accumulates parameter gradients into `g`; returns gradient wrt h_in.
Matrix backward_layer(
        const Topology& topo,
        const GnnParams::Layer& L,
        const GnnConfig& cfg,
        const LayerCache& c,
        const Matrix& d_out,
        GnnParams::Layer& g) {
    const int dh = cfg.dim / cfg.heads;
    const Matrix dz = (d_out.array() * (1.0 - c.h_out.array().square())).matrix();
    g.bias.col(0) += dz.rowwise().sum();
    g.self += dz * c.h_in.transpose();
    Matrix d_in = L.self.transpose() * dz;
    for (size_t r = 0; r < kRelationCount; ++r) {
        const auto& rel = topo[r];
        if (rel.src.empty()) {
            continue;
        }
        const Matrix& m = c.msg[r];
        Matrix dm = Matrix::Zero(m.rows(), m.cols());
        for (int h = 0; h < cfg.heads; ++h) {
            const auto as = L.att_src[r].col(0).segment(h * dh, dh);
            const auto ad = L.att_dst[r].col(0).segment(h * dh, dh);
            for (size_t s = 0; s + 1 < rel.seg.size(); ++s) {
                const size_t b = rel.seg[s], e = rel.seg[s + 1];
                const uint32_t v = rel.dst[b];
                const auto dzv = dz.col(v).segment(h * dh, dh);
                double weighted = 0.0;
                std::vector<double> d_alpha(e - b);
                for (size_t i = b; i < e; ++i) {
                    const uint32_t u = rel.src[i];
                    const double a = c.alpha[r][i * cfg.heads + h];
                    d_alpha[i - b] = dzv.dot(m.col(u).segment(h * dh, dh));
                    weighted += a * d_alpha[i - b];
                    dm.col(u).segment(h * dh, dh) += a * dzv;
                }
                for (size_t i = b; i < e; ++i) {
                    const uint32_t u = rel.src[i];
                    const double a = c.alpha[r][i * cfg.heads + h];
                    const double x = c.pre[r][i * cfg.heads + h];
                    const double d_pre = a * (d_alpha[i - b] - weighted) * (x > 0 ? 1.0 : cfg.leaky_slope);
                    g.att_src[r].col(0).segment(h * dh, dh) += d_pre * m.col(u).segment(h * dh, dh);
                    g.att_dst[r].col(0).segment(h * dh, dh) += d_pre * m.col(v).segment(h * dh, dh);
                    dm.col(u).segment(h * dh, dh) += d_pre * as;
                    dm.col(v).segment(h * dh, dh) += d_pre * ad;
                }
            }
        }
        g.message[r] += dm * c.h_in.transpose();
        d_in += L.message[r].transpose() * dm;
    }
    return d_in;
}

ForwardCache run_forward(
        const HeteroGraph& g,
        const Topology& topo,
        const GnnParams& p,
        const GnnConfig& cfg,
        const Matrix& x) {
    check_config(cfg);
    HDGRAG_REQUIRE(
            x.rows() == cfg.input_dim && x.cols() == static_cast<Eigen::Index>(g.node_count()),
            ErrorCode::kDimensionMismatch,
            "feature matrix shape does not match graph and config");
    HDGRAG_REQUIRE(
            p.layers.size() == static_cast<size_t>(cfg.layers),
            ErrorCode::kDimensionMismatch,
            "parameter layer count does not match config");
    ForwardCache fc;
    fc.h0 = input_states(g, p, x);
    const Matrix* h = &fc.h0;
    fc.layers.resize(p.layers.size());
    for (size_t l = 0; l < p.layers.size(); ++l) {
        fc.layers[l].h_in = *h;
        forward_layer(topo, p.layers[l], cfg, fc.layers[l]);
        h = &fc.layers[l].h_out;
    }
    return fc;
}

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

GnnParams GnnParams::zeros(const GnnConfig& cfg) {
    check_config(cfg);
    GnnParams p;
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        p.input_proj[t] = Matrix::Zero(cfg.dim, cfg.input_dim);
        p.input_bias[t] = Matrix::Zero(cfg.dim, 1);
    }
    p.layers.resize(cfg.layers);
    for (auto& L : p.layers) {
        for (size_t r = 0; r < kRelationCount; ++r) {
            L.message[r] = Matrix::Zero(cfg.dim, cfg.dim);
            L.att_src[r] = Matrix::Zero(cfg.dim, 1);
            L.att_dst[r] = Matrix::Zero(cfg.dim, 1);
        }
        L.self = Matrix::Zero(cfg.dim, cfg.dim);
        L.bias = Matrix::Zero(cfg.dim, 1);
    }
    return p;
}

GnnParams GnnParams::random(const GnnConfig& cfg, uint64_t seed) {
    GnnParams p = zeros(cfg);
    Rng rng(seed);
    const double head_dim = static_cast<double>(cfg.dim / cfg.heads);
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        p.input_proj[t] = gaussian(cfg.dim, cfg.input_dim, 1.0 / std::sqrt(cfg.input_dim), rng);
    }
    for (auto& L : p.layers) {
        for (size_t r = 0; r < kRelationCount; ++r) {
            L.message[r] = gaussian(cfg.dim, cfg.dim, cfg.message_init_scale / std::sqrt(cfg.dim), rng);
            L.att_src[r] = gaussian(cfg.dim, 1, 1.0 / std::sqrt(head_dim), rng);
            L.att_dst[r] = gaussian(cfg.dim, 1, 1.0 / std::sqrt(head_dim), rng);
        }
        L.self = gaussian(cfg.dim, cfg.dim, 1.0 / std::sqrt(cfg.dim), rng);
    }
    return p;
}

void GnnParams::for_each(const std::function<void(Matrix&)>& fn) {
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        fn(input_proj[t]);
        fn(input_bias[t]);
    }
    for (auto& L : layers) {
        for (size_t r = 0; r < kRelationCount; ++r) {
            fn(L.message[r]);
            fn(L.att_src[r]);
            fn(L.att_dst[r]);
        }
        fn(L.self);
        fn(L.bias);
    }
}

void GnnParams::for_each(const std::function<void(const Matrix&)>& fn) const {
    const_cast<GnnParams*>(this)->for_each([&](Matrix& m) { fn(m); });
}

size_t GnnParams::size() const {
    size_t n = 0;
    for_each([&](const Matrix& m) { n += static_cast<size_t>(m.size()); });
    return n;
}

Vector GnnParams::flatten() const {
    Vector out;
    out.reserve(size());
    for_each([&](const Matrix& m) { out.insert(out.end(), m.data(), m.data() + m.size()); });
    return out;
}

void GnnParams::assign(const Vector& flat) {
    HDGRAG_REQUIRE(flat.size() == size(), ErrorCode::kDimensionMismatch, "flat parameter size mismatch");
    size_t pos = 0;
    for_each([&](Matrix& m) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), m.size(), m.data());
        pos += static_cast<size_t>(m.size());
    });
}

bool GnnParams::all_finite() const {
    bool ok = true;
    for_each([&](const Matrix& m) { ok = ok && m.allFinite(); });
    return ok;
}

Matrix title_projection(const FeatureConfig& cfg) {
    HDGRAG_REQUIRE(
            cfg.input_dim >= 1 && cfg.title_dim >= 1,
            ErrorCode::kInvalidArgument,
            "feature dimensions must be positive");
    Rng rng(derive_seed(cfg.seed, "title_projection"));
    return gaussian(cfg.input_dim, cfg.title_dim, 1.0 / std::sqrt(cfg.input_dim), rng);
}

Matrix init_node_features(
        const HeteroGraph& graph,
        const std::map<std::string, std::string, std::less<>>& titles,
        const FeatureConfig& cfg) {
    const Matrix proj = title_projection(cfg);
    const EmbedderSpec spec{EmbedderKind::kHashedTf, cfg.title_dim, true};
    Matrix x(cfg.input_dim, static_cast<Eigen::Index>(graph.node_count()));
    for (size_t i = 0; i < graph.node_count(); ++i) {
        const NodeRef n = graph.node_at(i);
        const auto col = static_cast<Eigen::Index>(i);
        if (n.type == NodeType::kPaper) {
            auto it = titles.find(n.key);
            if (it != titles.end() && !embed_tokens(it->second).empty()) {
                const Vector e = embed_text(it->second, spec);
                x.col(col) = proj * Eigen::Map<const Eigen::VectorXd>(e.data(), cfg.title_dim);
                continue;
            }
        }
        const std::string label = std::string(to_string(n.type)) + ":" + n.key;
        Rng rng(derive_seed(cfg.seed, label));
        Eigen::VectorXd v(cfg.input_dim);
        for (int k = 0; k < cfg.input_dim; ++k) {
            v(k) = rng.normal();
        }
        x.col(col) = v / v.norm();
    }
    return x;
}

std::map<std::string, std::string, std::less<>> titles_of(const Corpus& corpus) {
    std::map<std::string, std::string, std::less<>> out;
    for (const auto& d : corpus.documents()) {
        out.emplace(d.doc_id, d.title);
    }
    return out;
}

Matrix gnn_forward(
        const HeteroGraph& graph,
        const GnnParams& params,
        const GnnConfig& cfg,
        const Matrix& features) {
    const Topology topo = make_topology(graph);
    auto fc = run_forward(graph, topo, params, cfg, features);
    return std::move(fc.layers.back().h_out);
}

std::vector<LinkSample> positive_samples(const HeteroGraph& graph) {
    std::vector<LinkSample> out;
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        const auto et = static_cast<EdgeType>(e);
        const auto [st, dt] = edge_signature(et);
        for (const auto& [s, d] : graph.edges(et)) {
            out.push_back(
                    {et,
                     static_cast<uint32_t>(graph.global_index(st, s)),
                     static_cast<uint32_t>(graph.global_index(dt, d)),
                     1.0});
        }
    }
    return out;
}

LinkPredBatch sample_link_batch(
        const HeteroGraph& known,
        const std::vector<LinkSample>& positives,
        int k_neg,
        Rng& rng) {
    HDGRAG_REQUIRE(k_neg >= 0, ErrorCode::kInvalidArgument, "k_neg must be >= 0");
    std::set<std::tuple<EdgeType, uint32_t, uint32_t>> pos_set;
    for (const auto& s : positive_samples(known)) {
        pos_set.emplace(s.type, s.src, s.dst);
    }
    LinkPredBatch batch;
    batch.positives = positives;
    for (const auto& p : positives) {
        const NodeType dt = edge_signature(p.type).second;
        const uint64_t n = known.node_count(dt);
        const uint32_t off = static_cast<uint32_t>(known.type_offset(dt));
        for (int k = 0; k < k_neg; ++k) {
            // Prefer a non-edge; fall back to anything but the positive's own
            // destination when the type is saturated.
            std::optional<uint32_t> pick;
            for (int attempt = 0; attempt < 64 && !pick; ++attempt) {
                const auto cand = static_cast<uint32_t>(off + rng.below(n));
                if (!pos_set.contains({p.type, p.src, cand})) {
                    pick = cand;
                }
            }
            if (!pick && n > 1) {
                auto cand = static_cast<uint32_t>(off + rng.below(n - 1));
                if (cand >= p.dst) {
                    ++cand;
                }
                pick = cand;
            }
            if (pick) {
                batch.negatives.push_back({p.type, p.src, *pick, 0.0});
            }
        }
    }
    return batch;
}

double link_loss(
        const HeteroGraph& graph,
        const GnnParams& params,
        const GnnConfig& cfg,
        const Matrix& features,
        const std::vector<LinkSample>& samples,
        GnnParams* grad) {
    HDGRAG_REQUIRE(!samples.empty(), ErrorCode::kInvalidArgument, "link_loss needs samples");
    const Topology topo = make_topology(graph);
    const ForwardCache fc = run_forward(graph, topo, params, cfg, features);
    const Matrix& h = fc.layers.back().h_out;
    const double inv_n = 1.0 / static_cast<double>(samples.size());

    double loss = 0.0;
    Matrix d_out = Matrix::Zero(h.rows(), h.cols());
    for (const auto& s : samples) {
        const double z = h.col(s.src).dot(h.col(s.dst));
        loss += (softplus(z) - s.label * z) * inv_n;
        if (grad) {
            const double dz = (sigmoid(z) - s.label) * inv_n;
            d_out.col(s.src) += dz * h.col(s.dst);
            d_out.col(s.dst) += dz * h.col(s.src);
        }
    }
    if (!grad) {
        return loss;
    }
    *grad = GnnParams::zeros(cfg);
    Matrix d = d_out;
    for (size_t l = params.layers.size(); l-- > 0;) {
        d = backward_layer(topo, params.layers[l], cfg, fc.layers[l], d, grad->layers[l]);
    }
    for (size_t t = 0; t < kNodeTypeCount; ++t) {
        const auto type = static_cast<NodeType>(t);
        const auto n = static_cast<Eigen::Index>(graph.node_count(type));
        if (n == 0) {
            continue;
        }
        const auto off = static_cast<Eigen::Index>(graph.type_offset(type));
        grad->input_proj[t] += d.middleCols(off, n) * features.middleCols(off, n).transpose();
        grad->input_bias[t].col(0) += d.middleCols(off, n).rowwise().sum();
    }
    return loss;
}

double roc_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
    HDGRAG_REQUIRE(
            !pos.empty() && !neg.empty(),
            ErrorCode::kInvalidArgument,
            "AUC needs positive and negative scores");
    // Rank-sum over the merged, sorted scores with averaged tie ranks.
    std::vector<std::pair<double, bool>> all;
    all.reserve(pos.size() + neg.size());
    for (double s : pos) all.emplace_back(s, true);
    for (double s : neg) all.emplace_back(s, false);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum = 0.0;
    for (size_t i = 0; i < all.size();) {
        size_t j = i;
        size_t n_pos = 0;
        while (j < all.size() && all[j].first == all[i].first) {
            n_pos += all[j].second ? 1 : 0;
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        rank_sum += avg_rank * static_cast<double>(n_pos);
        i = j;
    }
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    return (rank_sum - np * (np + 1) / 2) / (np * nn);
}

namespace {

struct HoldoutEval {
    std::array<std::vector<double>, kEdgeTypeCount> pos, neg;
};

HoldoutEval score_holdout(
        const Matrix& h,
        const std::vector<LinkSample>& pos,
        const std::vector<LinkSample>& neg) {
    HoldoutEval out;
    for (const auto& s : pos) {
        out.pos[static_cast<size_t>(s.type)].push_back(h.col(s.src).dot(h.col(s.dst)));
    }
    for (const auto& s : neg) {
        out.neg[static_cast<size_t>(s.type)].push_back(h.col(s.src).dot(h.col(s.dst)));
    }
    return out;
}

void fill_auc(const HoldoutEval& ev, std::array<double, kEdgeTypeCount>& per_type, double& overall) {
    std::vector<double> all_pos, all_neg;
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        per_type[e] = (ev.pos[e].empty() || ev.neg[e].empty())
                ? std::numeric_limits<double>::quiet_NaN()
                : roc_auc(ev.pos[e], ev.neg[e]);
        all_pos.insert(all_pos.end(), ev.pos[e].begin(), ev.pos[e].end());
        all_neg.insert(all_neg.end(), ev.neg[e].begin(), ev.neg[e].end());
    }
    overall = (all_pos.empty() || all_neg.empty()) ? std::numeric_limits<double>::quiet_NaN()
                                                   : roc_auc(all_pos, all_neg);
}

} // namespace

TrainResult train_link_prediction(
        const HeteroGraph& graph,
        const Matrix& features,
        const TrainConfig& cfg) {
    HDGRAG_REQUIRE(graph.edge_count() > 0, ErrorCode::kUntrainable, "untrainable: no edges");
    HDGRAG_REQUIRE(cfg.epochs >= 0, ErrorCode::kInvalidArgument, "epochs must be >= 0");
    HDGRAG_REQUIRE(cfg.learning_rate > 0, ErrorCode::kInvalidArgument, "learning rate must be > 0");
    HDGRAG_REQUIRE(
            cfg.holdout >= 0 && cfg.holdout < 1,
            ErrorCode::kInvalidArgument,
            "holdout fraction must be in [0, 1)");

    // Per-type split of base edges into message-passing/training edges and
    // held-out evaluation edges.
    Rng split_rng(derive_seed(cfg.seed, "holdout"));
    std::array<std::vector<LocalEdge>, kEdgeTypeCount> train_edges, held_edges;
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        auto edges = graph.edges(static_cast<EdgeType>(e));
        split_rng.shuffle(edges);
        const auto n_hold = static_cast<size_t>(std::floor(cfg.holdout * static_cast<double>(edges.size())));
        held_edges[e].assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_hold));
        train_edges[e].assign(edges.begin() + static_cast<std::ptrdiff_t>(n_hold), edges.end());
    }
    const HeteroGraph train_graph = graph.with_edges(train_edges);
    const HeteroGraph held_graph = graph.with_edges(held_edges);
    HDGRAG_REQUIRE(train_graph.edge_count() > 0, ErrorCode::kUntrainable, "untrainable: no training edges");

    const auto train_pos = positive_samples(train_graph);
    const auto held_pos = positive_samples(held_graph);
    Rng eval_rng(derive_seed(cfg.seed, "holdout_negatives"));
    const auto held_batch = sample_link_batch(graph, held_pos, 1, eval_rng);

    TrainResult result;
    result.params = GnnParams::random(cfg.gnn, derive_seed(cfg.seed, "gnn_init"));
    auto& report = result.report;
    report.train_edges = train_pos.size();
    report.holdout_edges = held_pos.size();

    const Topology topo = make_topology(train_graph);
    auto eval = [&](const GnnParams& p) {
        const Matrix h = run_forward(train_graph, topo, p, cfg.gnn, features).layers.back().h_out;
        return score_holdout(h, held_batch.positives, held_batch.negatives);
    };
    fill_auc(eval(result.params), report.pre_auc, report.pre_auc_overall);

    // Adam.
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    Vector theta = result.params.flatten();
    Vector m1(theta.size(), 0.0), m2(theta.size(), 0.0);
    Rng neg_rng(derive_seed(cfg.seed, "negatives"));
    GnnParams grad;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto batch = sample_link_batch(graph, train_pos, cfg.k_neg, neg_rng);
        std::vector<LinkSample> samples = std::move(batch.positives);
        samples.insert(samples.end(), batch.negatives.begin(), batch.negatives.end());
        neg_rng.shuffle(samples);

        const double loss = link_loss(train_graph, result.params, cfg.gnn, features, samples, &grad);
        report.loss_history.push_back(loss);
        const Vector g = grad.flatten();
        const double t = epoch + 1;
        const double c1 = 1.0 - std::pow(kBeta1, t);
        const double c2 = 1.0 - std::pow(kBeta2, t);
        for (size_t i = 0; i < theta.size(); ++i) {
            m1[i] = kBeta1 * m1[i] + (1 - kBeta1) * g[i];
            m2[i] = kBeta2 * m2[i] + (1 - kBeta2) * g[i] * g[i];
            theta[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
        }
        result.params.assign(theta);
    }
    HDGRAG_REQUIRE(result.params.all_finite(), ErrorCode::kUntrainable, "training diverged");

    report.epochs = cfg.epochs;
    report.final_loss = report.loss_history.empty() ? 0.0 : report.loss_history.back();
    fill_auc(eval(result.params), report.auc, report.auc_overall);
    return result;
}

std::string TrainReport::to_kv() const {
    std::ostringstream out;
    out << "epochs=" << epochs << '\n';
    out << "final_loss=" << format_double(final_loss) << '\n';
    out << "train_edges=" << train_edges << '\n';
    out << "holdout_edges=" << holdout_edges << '\n';
    out << "auc_overall=" << format_double(auc_overall) << '\n';
    out << "pre_training_auc_overall=" << format_double(pre_auc_overall) << '\n';
    for (size_t e = 0; e < kEdgeTypeCount; ++e) {
        out << "auc_per_edge_type." << to_string(static_cast<EdgeType>(e)) << '='
            << format_double(auc[e]) << '\n';
    }
    return out.str();
}

std::map<std::string, Vector, std::less<>> StructuralEncoder::document_embeddings(
        const HeteroGraph& graph,
        const Matrix& features) const {
    const Matrix h = gnn_forward(graph, params_, cfg_, features);
    std::map<std::string, Vector, std::less<>> out;
    const auto& papers = graph.keys(NodeType::kPaper);
    for (size_t i = 0; i < papers.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(graph.global_index(NodeType::kPaper, static_cast<uint32_t>(i)));
        out.emplace(papers[i], Vector(h.col(col).data(), h.col(col).data() + h.rows()));
    }
    return out;
}

const Vector& document_embedding(const DocEmbeddings& table, std::string_view doc_id) {
    auto it = table.find(doc_id);
    HDGRAG_REQUIRE(
            it != table.end(),
            ErrorCode::kNotFound,
            "no structural embedding for document '" + std::string(doc_id) + "'");
    return it->second;
}

const Vector& passage_structural_embedding(const Passage& passage, const DocEmbeddings& table) {
    return document_embedding(table, passage.doc_id);
}

} // namespace hdgrag
