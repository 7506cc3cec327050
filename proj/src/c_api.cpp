#include "hdgrag/hdgrag.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "error.hpp"
#include "eval_metrics.hpp"
#include "fusion_index.hpp"
#include "hdg.hpp"
#include "pipeline.hpp"
#include "semb_io.hpp"
#include "text_embed.hpp"
#include "training_signals.hpp"

struct hdg_config {
    hdgrag::PipelineConfig cfg;
};

struct hdg_index {
    hdgrag::FlatIndex index;
};

struct hdg_result {
    hdgrag::RetrievalResult result;
};

namespace {

thread_local std::string g_last_error;

hdg_status to_status(hdgrag::ErrorCode code) {
    using hdgrag::ErrorCode;
    switch (code) {
        case ErrorCode::kInvalidArgument: return HDG_ERR_INVALID_ARGUMENT;
        case ErrorCode::kParse: return HDG_ERR_PARSE;
        case ErrorCode::kConflict: return HDG_ERR_CONFLICT;
        case ErrorCode::kNotFound: return HDG_ERR_NOT_FOUND;
        case ErrorCode::kDimensionMismatch: return HDG_ERR_DIMENSION;
        case ErrorCode::kFormat: return HDG_ERR_FORMAT;
        case ErrorCode::kUntrainable: return HDG_ERR_UNTRAINABLE;
        case ErrorCode::kIo: return HDG_ERR_IO;
    }
    return HDG_ERR_INTERNAL;
}

template <typename F>
hdg_status guarded(F&& fn) {
    g_last_error.clear();
    try {
        fn();
        return HDG_OK;
    } catch (const hdgrag::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return HDG_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
    HDGRAG_REQUIRE(p != nullptr, hdgrag::ErrorCode::kInvalidArgument, std::string("null ") + what);
}

hdg_graph_stats to_c(const hdgrag::GraphStats& s) {
    hdg_graph_stats out{};
    for (size_t i = 0; i < HDG_NODE_TYPES; ++i) out.nodes[i] = s.nodes[i];
    for (size_t i = 0; i < HDG_EDGE_TYPES; ++i) out.edges[i] = s.edges[i];
    out.dropped_citations = s.dropped_citations;
    return out;
}

hdgrag::Vector embed_query_for(const hdg_config* cfg, const char* query_id, const char* text) {
    need(cfg, "config");
    need(text, "query text");
    const auto embedder = hdgrag::make_embedder(
            cfg->cfg.embedder_spec(), cfg->cfg.external_matrix, cfg->cfg.external_ids);
    return embedder->embed(query_id ? query_id : "", text);
}

} // namespace

extern "C" {

const char* hdg_status_string(hdg_status status) {
    switch (status) {
        case HDG_OK: return "ok";
        case HDG_ERR_INVALID_ARGUMENT: return "invalid argument";
        case HDG_ERR_PARSE: return "parse error";
        case HDG_ERR_CONFLICT: return "conflict";
        case HDG_ERR_NOT_FOUND: return "not found";
        case HDG_ERR_DIMENSION: return "dimension mismatch";
        case HDG_ERR_FORMAT: return "format error";
        case HDG_ERR_UNTRAINABLE: return "untrainable";
        case HDG_ERR_IO: return "i/o error";
        case HDG_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* hdg_last_error(void) {
    return g_last_error.c_str();
}

const char* hdg_node_type_name(int type) {
    if (type < 0 || type >= HDG_NODE_TYPES) return nullptr;
    return hdgrag::to_string(static_cast<hdgrag::NodeType>(type)).data();
}

const char* hdg_edge_type_name(int type) {
    if (type < 0 || type >= HDG_EDGE_TYPES) return nullptr;
    return hdgrag::to_string(static_cast<hdgrag::EdgeType>(type)).data();
}

hdg_status hdg_config_new(hdg_config** out) {
    return guarded([&] {
        need(out, "output pointer");
        *out = new hdg_config();
    });
}

void hdg_config_free(hdg_config* cfg) {
    delete cfg;
}

hdg_status hdg_config_set(hdg_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        need(cfg, "config");
        need(key, "key");
        need(value, "value");
        cfg->cfg.set(key, value);
    });
}

hdg_status hdg_config_load_file(hdg_config* cfg, const char* path) {
    return guarded([&] {
        need(cfg, "config");
        need(path, "path");
        cfg->cfg.load_file(path);
    });
}

hdg_status hdg_config_get(const hdg_config* cfg, const char* key, char* buf, size_t buflen) {
    return guarded([&] {
        need(cfg, "config");
        need(key, "key");
        need(buf, "buffer");
        const std::string v = cfg->cfg.get(key);
        HDGRAG_REQUIRE(v.size() < buflen, hdgrag::ErrorCode::kInvalidArgument, "buffer too small");
        std::memcpy(buf, v.c_str(), v.size() + 1);
    });
}

hdg_status hdg_config_validate(const hdg_config* cfg) {
    return guarded([&] {
        need(cfg, "config");
        cfg->cfg.validate();
    });
}

hdg_status hdg_run_ingest(const hdg_config* cfg, size_t* documents, size_t* passages) {
    return guarded([&] {
        need(cfg, "config");
        const auto s = hdgrag::run_ingest(cfg->cfg);
        if (documents) *documents = s.documents;
        if (passages) *passages = s.passages;
    });
}

hdg_status hdg_run_build_graph(const hdg_config* cfg, hdg_graph_stats* stats) {
    return guarded([&] {
        need(cfg, "config");
        const auto s = hdgrag::run_build_graph(cfg->cfg);
        if (stats) *stats = to_c(s);
    });
}

hdg_status hdg_run_train_gnn(const hdg_config* cfg, hdg_train_summary* summary) {
    return guarded([&] {
        need(cfg, "config");
        const auto r = hdgrag::run_train_gnn(cfg->cfg);
        if (summary) {
            *summary = {r.epochs, r.final_loss, r.auc_overall, r.pre_auc_overall,
                        r.train_edges, r.holdout_edges};
        }
    });
}

hdg_status hdg_run_embed(const hdg_config* cfg, size_t* passages) {
    return guarded([&] {
        need(cfg, "config");
        const size_t n = hdgrag::run_embed(cfg->cfg);
        if (passages) *passages = n;
    });
}

hdg_status hdg_run_index(const hdg_config* cfg, size_t* records) {
    return guarded([&] {
        need(cfg, "config");
        const size_t n = hdgrag::run_index(cfg->cfg);
        if (records) *records = n;
    });
}

hdg_status hdg_run_mask(const hdg_config* cfg, size_t* samples) {
    return guarded([&] {
        need(cfg, "config");
        const size_t n = hdgrag::run_mask(cfg->cfg);
        if (samples) *samples = n;
    });
}

hdg_status hdg_run_distill(const hdg_config* cfg, const char* input_path, size_t* rows) {
    return guarded([&] {
        need(cfg, "config");
        need(input_path, "input path");
        const size_t n = hdgrag::run_distill(cfg->cfg, input_path);
        if (rows) *rows = n;
    });
}

hdg_status hdg_run_eval(const hdg_config* cfg, const char* queries_path, hdg_metric_report* report) {
    return guarded([&] {
        need(cfg, "config");
        need(queries_path, "queries path");
        const auto r = hdgrag::run_eval(cfg->cfg, queries_path);
        if (report) {
            *report = {r.queries, r.exact_match, r.f1, r.relevance, r.diversity, r.faithfulness};
        }
    });
}

hdg_status hdg_run_stats(const hdg_config* cfg, hdg_graph_stats* stats) {
    return guarded([&] {
        need(cfg, "config");
        need(stats, "stats");
        *stats = to_c(hdgrag::run_stats(cfg->cfg));
    });
}

hdg_status hdg_index_open(const hdg_config* cfg, hdg_index** out) {
    return guarded([&] {
        need(cfg, "config");
        need(out, "output pointer");
        auto h = std::make_unique<hdg_index>();
        h->index = hdgrag::FlatIndex::load(hdgrag::ArtifactPaths(cfg->cfg.out).index_dir);
        *out = h.release();
    });
}

void hdg_index_free(hdg_index* index) {
    delete index;
}

size_t hdg_index_size(const hdg_index* index) {
    return index ? index->index.size() : 0;
}

size_t hdg_index_text_dim(const hdg_index* index) {
    return index ? index->index.text_dim() : 0;
}

size_t hdg_index_struct_dim(const hdg_index* index) {
    return index ? index->index.struct_dim() : 0;
}

hdg_status hdg_index_query(
        const hdg_index* index, const hdg_config* cfg, const char* query_id,
        const char* query_text, size_t k, hdg_result** out) {
    return guarded([&] {
        need(index, "index");
        need(out, "output pointer");
        const auto q = embed_query_for(cfg, query_id, query_text);
        auto r = std::make_unique<hdg_result>();
        r->result = index->index.topk(q, k);
        *out = r.release();
    });
}

hdg_status hdg_index_rerank(
        const hdg_index* index, const hdg_config* cfg, const char* query_id,
        const char* query_text, size_t k, size_t pool, double beta, hdg_result** out) {
    return guarded([&] {
        need(index, "index");
        need(out, "output pointer");
        HDGRAG_REQUIRE(pool >= k, hdgrag::ErrorCode::kInvalidArgument, "pool must be >= k");
        const auto q = embed_query_for(cfg, query_id, query_text);
        auto r = std::make_unique<hdg_result>();
        r->result = hdgrag::rerank_with_structure(index->index.topk(q, pool), index->index, beta, k);
        *out = r.release();
    });
}

hdg_status hdg_index_write_reader_inputs(
        const hdg_index* index, const hdg_config* cfg, const char* query_id,
        const char* query_text, size_t k, const char* matrix_path, const char* ids_path) {
    return guarded([&] {
        need(index, "index");
        need(matrix_path, "matrix path");
        need(ids_path, "ids path");
        const auto q = embed_query_for(cfg, query_id, query_text);
        const auto res = index->index.topk(q, k);
        std::vector<hdgrag::Vector> rows;
        std::vector<std::string> ids;
        for (const auto& h : res.hits) {
            const auto* rec = index->index.find(h.passage_id);
            rows.push_back(hdgrag::make_reader_input(q, rec->fused()));
            ids.push_back(h.passage_id);
        }
        const auto dim = static_cast<uint32_t>(q.size() + index->index.text_dim() + index->index.struct_dim());
        hdgrag::write_semb(matrix_path, hdgrag::to_matrix(rows, dim));
        hdgrag::write_ids(ids_path, ids);
    });
}

void hdg_result_free(hdg_result* result) {
    delete result;
}

size_t hdg_result_size(const hdg_result* result) {
    return result ? result->result.hits.size() : 0;
}

size_t hdg_result_k_requested(const hdg_result* result) {
    return result ? result->result.k_requested : 0;
}

int hdg_result_is_reranked(const hdg_result* result) {
    return result && result->result.structure_reranked ? 1 : 0;
}

const char* hdg_result_passage_id(const hdg_result* result, size_t i) {
    if (!result || i >= result->result.hits.size()) return nullptr;
    return result->result.hits[i].passage_id.c_str();
}

double hdg_result_text_score(const hdg_result* result, size_t i) {
    if (!result || i >= result->result.hits.size()) return 0.0;
    return result->result.hits[i].text_score;
}

int hdg_result_combined_score(const hdg_result* result, size_t i, double* score) {
    if (!result || i >= result->result.hits.size() || !result->result.hits[i].combined_score) return 0;
    if (score) *score = *result->result.hits[i].combined_score;
    return 1;
}

hdg_status hdg_embed_text(const char* text, int dim, int normalize, double* out) {
    return guarded([&] {
        need(text, "text");
        need(out, "output buffer");
        const auto v = hdgrag::embed_text(text, {hdgrag::EmbedderKind::kHashedTf, dim, normalize != 0});
        std::copy(v.begin(), v.end(), out);
    });
}

hdg_status hdg_passage_posterior(const double* loglik, size_t k, double* out) {
    return guarded([&] {
        need(out, "output buffer");
        HDGRAG_REQUIRE(k == 0 || loglik, hdgrag::ErrorCode::kInvalidArgument, "null input");
        const auto p = hdgrag::passage_posterior({loglik, k});
        std::copy(p.begin(), p.end(), out);
    });
}

hdg_status hdg_retriever_distribution(const double* scores, size_t k, double theta, double* out) {
    return guarded([&] {
        need(out, "output buffer");
        HDGRAG_REQUIRE(k == 0 || scores, hdgrag::ErrorCode::kInvalidArgument, "null input");
        const auto p = hdgrag::retriever_distribution({scores, k}, theta);
        std::copy(p.begin(), p.end(), out);
    });
}

hdg_status hdg_kl_divergence(const double* p, const double* q, size_t k, double* out) {
    return guarded([&] {
        need(out, "output");
        HDGRAG_REQUIRE(k == 0 || (p && q), hdgrag::ErrorCode::kInvalidArgument, "null input");
        *out = hdgrag::kl_divergence({p, k}, {q, k});
    });
}

hdg_status hdg_distill_loss(
        const double* scores, const double* loglik, size_t k, double theta,
        hdg_kl_direction direction, double* loss, double* grad) {
    return guarded([&] {
        need(loss, "loss output");
        HDGRAG_REQUIRE(k == 0 || (scores && loglik), hdgrag::ErrorCode::kInvalidArgument, "null input");
        hdgrag::DistillInputs in{{loglik, loglik + k}, {scores, scores + k}, theta};
        const auto r = hdgrag::distill_loss(
                in, direction == HDG_KL_POSTERIOR_TO_RETRIEVER ? hdgrag::KlDirection::kPosteriorToRetriever
                                                               : hdgrag::KlDirection::kRetrieverToPosterior);
        *loss = r.loss;
        if (grad) std::copy(r.grad.begin(), r.grad.end(), grad);
    });
}

hdg_status hdg_faithfulness(double accuracy, double relevance, double* out) {
    return guarded([&] {
        need(out, "output");
        *out = hdgrag::faithfulness(accuracy, relevance);
    });
}

hdg_status hdg_diversity(const char* const* ids, size_t n, double* out) {
    return guarded([&] {
        need(out, "output");
        HDGRAG_REQUIRE(n == 0 || ids, hdgrag::ErrorCode::kInvalidArgument, "null ids");
        std::vector<std::string> v;
        for (size_t i = 0; i < n; ++i) {
            need(ids[i], "id");
            v.emplace_back(ids[i]);
        }
        *out = hdgrag::diversity(v);
    });
}

} // extern "C"
