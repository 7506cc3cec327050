/*
 * hdgrag: structure-aware passage retrieval over a heterogeneous document
 * graph.
 *
 * C interface. Objects are opaque handles released with their *_free
 * function. Every fallible call returns hdg_status; on failure the message
 * is available from hdg_last_error() on the same thread until the next call.
 */
#ifndef HDGRAG_H
#define HDGRAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define HDG_API __declspec(dllexport)
#else
#  define HDG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdg_status {
    HDG_OK = 0,
    HDG_ERR_INVALID_ARGUMENT = 1,
    HDG_ERR_PARSE = 2,
    HDG_ERR_CONFLICT = 3,
    HDG_ERR_NOT_FOUND = 4,
    HDG_ERR_DIMENSION = 5,
    HDG_ERR_FORMAT = 6,
    HDG_ERR_UNTRAINABLE = 7,
    HDG_ERR_IO = 8,
    HDG_ERR_INTERNAL = 9
} hdg_status;

#define HDG_NODE_TYPES 5
#define HDG_EDGE_TYPES 5

typedef enum hdg_kl_direction {
    HDG_KL_RETRIEVER_TO_POSTERIOR = 0,
    HDG_KL_POSTERIOR_TO_RETRIEVER = 1
} hdg_kl_direction;

typedef struct hdg_config hdg_config;
typedef struct hdg_index hdg_index;
typedef struct hdg_result hdg_result;

typedef struct hdg_graph_stats {
    size_t nodes[HDG_NODE_TYPES]; /* Paper, Author, Venue, Institution, Topic */
    size_t edges[HDG_EDGE_TYPES]; /* cites, writes, published_in, affiliated_with, has_topic */
    size_t dropped_citations;
} hdg_graph_stats;

typedef struct hdg_train_summary {
    int epochs;
    double final_loss;
    double auc_overall;
    double pre_training_auc_overall;
    size_t train_edges;
    size_t holdout_edges;
} hdg_train_summary;

typedef struct hdg_metric_report {
    size_t queries;
    double exact_match;
    double f1;
    double relevance;
    double diversity;
    double faithfulness;
} hdg_metric_report;

HDG_API const char* hdg_status_string(hdg_status status);
HDG_API const char* hdg_last_error(void);
HDG_API const char* hdg_node_type_name(int type);
HDG_API const char* hdg_edge_type_name(int type);

/* ---- configuration ---------------------------------------------------- */

HDG_API hdg_status hdg_config_new(hdg_config** out);
HDG_API void hdg_config_free(hdg_config* cfg);
HDG_API hdg_status hdg_config_set(hdg_config* cfg, const char* key, const char* value);
HDG_API hdg_status hdg_config_load_file(hdg_config* cfg, const char* path);
/* Copies the value (NUL-terminated) into buf; fails when it does not fit. */
HDG_API hdg_status hdg_config_get(const hdg_config* cfg, const char* key, char* buf, size_t buflen);
HDG_API hdg_status hdg_config_validate(const hdg_config* cfg);

/* ---- pipeline stages (artifacts are written under the "out" key) ------ */

HDG_API hdg_status hdg_run_ingest(const hdg_config* cfg, size_t* documents, size_t* passages);
HDG_API hdg_status hdg_run_build_graph(const hdg_config* cfg, hdg_graph_stats* stats);
HDG_API hdg_status hdg_run_train_gnn(const hdg_config* cfg, hdg_train_summary* summary);
HDG_API hdg_status hdg_run_embed(const hdg_config* cfg, size_t* passages);
HDG_API hdg_status hdg_run_index(const hdg_config* cfg, size_t* records);
HDG_API hdg_status hdg_run_mask(const hdg_config* cfg, size_t* samples);
HDG_API hdg_status hdg_run_distill(const hdg_config* cfg, const char* input_path, size_t* rows);
HDG_API hdg_status hdg_run_eval(const hdg_config* cfg, const char* queries_path, hdg_metric_report* report);
HDG_API hdg_status hdg_run_stats(const hdg_config* cfg, hdg_graph_stats* stats);

/* ---- index and retrieval ---------------------------------------------- */

/* Opens the index saved under <out>/index. */
HDG_API hdg_status hdg_index_open(const hdg_config* cfg, hdg_index** out);
HDG_API void hdg_index_free(hdg_index* index);
HDG_API size_t hdg_index_size(const hdg_index* index);
HDG_API size_t hdg_index_text_dim(const hdg_index* index);
HDG_API size_t hdg_index_struct_dim(const hdg_index* index);

/* Embeds query_text with the configured embedder (query_id keys external
 * embeddings) and runs exact top-k dot-product search. */
HDG_API hdg_status hdg_index_query(
        const hdg_index* index, const hdg_config* cfg, const char* query_id,
        const char* query_text, size_t k, hdg_result** out);
/* Retrieves a pool of `pool` passages and re-ranks it by structural
 * coherence; returns the top k. */
HDG_API hdg_status hdg_index_rerank(
        const hdg_index* index, const hdg_config* cfg, const char* query_id,
        const char* query_text, size_t k, size_t pool, double beta, hdg_result** out);
/* Writes E' = Q (+) M_i (+) H_i for the top k as a SEMB matrix plus id
 * sidecar. */
HDG_API hdg_status hdg_index_write_reader_inputs(
        const hdg_index* index, const hdg_config* cfg, const char* query_id,
        const char* query_text, size_t k, const char* matrix_path, const char* ids_path);

HDG_API void hdg_result_free(hdg_result* result);
HDG_API size_t hdg_result_size(const hdg_result* result);
HDG_API size_t hdg_result_k_requested(const hdg_result* result);
HDG_API int hdg_result_is_reranked(const hdg_result* result);
HDG_API const char* hdg_result_passage_id(const hdg_result* result, size_t i);
HDG_API double hdg_result_text_score(const hdg_result* result, size_t i);
/* Returns 1 and stores the combined score when the result was re-ranked. */
HDG_API int hdg_result_combined_score(const hdg_result* result, size_t i, double* score);

/* ---- kernels ------------------------------------------------------------ */

HDG_API hdg_status hdg_embed_text(const char* text, int dim, int normalize, double* out);
HDG_API hdg_status hdg_passage_posterior(const double* loglik, size_t k, double* out);
HDG_API hdg_status hdg_retriever_distribution(const double* scores, size_t k, double theta, double* out);
HDG_API hdg_status hdg_kl_divergence(const double* p, const double* q, size_t k, double* out);
HDG_API hdg_status hdg_distill_loss(
        const double* scores, const double* loglik, size_t k, double theta,
        hdg_kl_direction direction, double* loss, double* grad);
HDG_API hdg_status hdg_faithfulness(double accuracy, double relevance, double* out);
HDG_API hdg_status hdg_diversity(const char* const* ids, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HDGRAG_H */
