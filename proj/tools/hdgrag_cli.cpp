// hdgrag command-line driver. Links only the public C interface.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdgrag/hdgrag.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStage = 1;
constexpr int kExitUsage = 2;

struct ConfigHandle {
    hdg_config* ptr = nullptr;
    ConfigHandle() { hdg_config_new(&ptr); }
    ~ConfigHandle() { hdg_config_free(ptr); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
};

struct StageFailure {
    std::string stage;
    hdg_status status;
    std::string message;
};

void check(const std::string& stage, hdg_status st) {
    if (st != HDG_OK) throw StageFailure{stage, st, hdg_last_error()};
}

void print_stats(const hdg_graph_stats& s) {
    for (int i = 0; i < HDG_NODE_TYPES; ++i) {
        std::printf("nodes.%s=%zu\n", hdg_node_type_name(i), s.nodes[i]);
    }
    for (int i = 0; i < HDG_EDGE_TYPES; ++i) {
        std::printf("edges.%s=%zu\n", hdg_edge_type_name(i), s.edges[i]);
    }
    std::printf("dropped_citations=%zu\n", s.dropped_citations);
}

void print_result(const hdg_result* r) {
    const bool reranked = hdg_result_is_reranked(r) != 0;
    std::printf("# k_requested=%zu k_returned=%zu\n", hdg_result_k_requested(r), hdg_result_size(r));
    if (reranked) {
        std::printf("# extension=structure_rerank\n");
        std::printf("rank\tpassage_id\ttext_score\tcombined_score\n");
    } else {
        std::printf("rank\tpassage_id\ttext_score\n");
    }
    for (size_t i = 0; i < hdg_result_size(r); ++i) {
        std::printf("%zu\t%s\t%.9g", i + 1, hdg_result_passage_id(r, i), hdg_result_text_score(r, i));
        double combined = 0.0;
        if (reranked && hdg_result_combined_score(r, i, &combined)) std::printf("\t%.9g", combined);
        std::printf("\n");
    }
}

struct ResultHandle {
    hdg_result* ptr = nullptr;
    ~ResultHandle() { hdg_result_free(ptr); }
};

struct IndexHandle {
    hdg_index* ptr = nullptr;
    ~IndexHandle() { hdg_index_free(ptr); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hdgrag: graph-augmented passage retrieval pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> corpus, out, domain, seed, k, beta, theta;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "Flat key=value config file");
    app.add_option("--corpus", corpus, "Corpus JSONL file");
    app.add_option("--out", out, "Output directory (default: out)");
    app.add_option("--domain", domain, "Restrict to one domain");
    app.add_option("--seed", seed, "Global seed");
    app.add_option("--k", k, "Passages retrieved per query (default: 20)");
    app.add_option("--beta", beta, "Structure weight for rerank (default: 0.5)");
    app.add_option("--theta", theta, "Retriever softmax temperature (default: 1)");
    app.add_option("--set", overrides, "Extra config override key=value (repeatable)");
    app.fallthrough();

    auto* ingest = app.add_subcommand("ingest", "Parse the corpus and chunk it into passages");
    auto* build_graph = app.add_subcommand("build-graph", "Build the heterogeneous document graph");
    auto* train_gnn = app.add_subcommand("train-gnn", "Train the structural encoder by link prediction");
    auto* embed = app.add_subcommand("embed", "Embed passages (text and structure)");
    auto* index = app.add_subcommand("index", "Build the flat index");
    auto* mask = app.add_subcommand("mask", "Write span-masked training samples");
    auto* stats = app.add_subcommand("stats", "Print graph node and edge counts");

    std::string query_text, query_id = "query";
    std::string reader_prefix;
    auto* query = app.add_subcommand("query", "Exact top-k retrieval");
    query->add_option("--query", query_text, "Query text")->required();
    query->add_option("--query-id", query_id, "Query id (keys external embeddings)");
    query->add_option("--reader-inputs", reader_prefix,
                      "Write reader inputs to <prefix>.semb and <prefix>.ids");

    std::optional<std::string> pool;
    auto* rerank = app.add_subcommand("rerank", "Top-k with structure-aware re-ranking (extension)");
    rerank->add_option("--query", query_text, "Query text")->required();
    rerank->add_option("--query-id", query_id, "Query id (keys external embeddings)");
    rerank->add_option("--pool", pool, "Candidate pool size (default: 40)");

    std::string distill_input;
    auto* distill = app.add_subcommand("distill", "Compute distillation targets and losses");
    distill->add_option("--input", distill_input, "JSONL with scores and loglik per query")->required();

    std::string queries_path;
    auto* eval = app.add_subcommand("eval", "Compute evaluation metrics");
    eval->add_option("--queries", queries_path, "JSONL with query, gold and prediction")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    ConfigHandle cfg;
    if (!cfg.ptr) {
        std::cerr << "error: cannot allocate config\n";
        return kExitStage;
    }
    try {
        if (!config_path.empty()) check("config", hdg_config_load_file(cfg.ptr, config_path.c_str()));
        const std::vector<std::pair<const char*, const std::optional<std::string>*>> flags = {
                {"corpus", &corpus}, {"out", &out},   {"domain", &domain}, {"seed", &seed},
                {"k", &k},           {"beta", &beta}, {"theta", &theta},   {"pool", &pool}};
        for (const auto& [key, val] : flags) {
            if (*val) check("config", hdg_config_set(cfg.ptr, key, (*val)->c_str()));
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
                return kExitUsage;
            }
            check("config", hdg_config_set(cfg.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
        }
        check("config", hdg_config_validate(cfg.ptr));

        auto get = [&](const char* key) {
            char buf[4096];
            check("config", hdg_config_get(cfg.ptr, key, buf, sizeof buf));
            return std::string(buf);
        };

        if (ingest->parsed()) {
            size_t docs = 0, passages = 0;
            check("ingest", hdg_run_ingest(cfg.ptr, &docs, &passages));
            std::printf("documents=%zu\npassages=%zu\n", docs, passages);
        } else if (build_graph->parsed()) {
            hdg_graph_stats s{};
            check("build-graph", hdg_run_build_graph(cfg.ptr, &s));
            print_stats(s);
        } else if (train_gnn->parsed()) {
            hdg_train_summary s{};
            check("train-gnn", hdg_run_train_gnn(cfg.ptr, &s));
            std::printf("epochs=%d\nfinal_loss=%.9g\nauc_overall=%.9g\npre_training_auc_overall=%.9g\n"
                        "train_edges=%zu\nholdout_edges=%zu\n",
                        s.epochs, s.final_loss, s.auc_overall, s.pre_training_auc_overall, s.train_edges,
                        s.holdout_edges);
        } else if (embed->parsed()) {
            size_t n = 0;
            check("embed", hdg_run_embed(cfg.ptr, &n));
            std::printf("passages=%zu\n", n);
        } else if (index->parsed()) {
            size_t n = 0;
            check("index", hdg_run_index(cfg.ptr, &n));
            std::printf("records=%zu\n", n);
        } else if (mask->parsed()) {
            size_t n = 0;
            check("mask", hdg_run_mask(cfg.ptr, &n));
            std::printf("samples=%zu\n", n);
        } else if (stats->parsed()) {
            hdg_graph_stats s{};
            check("stats", hdg_run_stats(cfg.ptr, &s));
            print_stats(s);
        } else if (query->parsed()) {
            IndexHandle idx;
            check("query", hdg_index_open(cfg.ptr, &idx.ptr));
            const size_t kk = std::stoul(get("k"));
            ResultHandle r;
            check("query", hdg_index_query(idx.ptr, cfg.ptr, query_id.c_str(), query_text.c_str(), kk, &r.ptr));
            print_result(r.ptr);
            if (!reader_prefix.empty()) {
                check("query", hdg_index_write_reader_inputs(idx.ptr, cfg.ptr, query_id.c_str(), query_text.c_str(),
                                                             kk, (reader_prefix + ".semb").c_str(),
                                                             (reader_prefix + ".ids").c_str()));
            }
        } else if (rerank->parsed()) {
            IndexHandle idx;
            check("rerank", hdg_index_open(cfg.ptr, &idx.ptr));
            ResultHandle r;
            check("rerank", hdg_index_rerank(idx.ptr, cfg.ptr, query_id.c_str(), query_text.c_str(),
                                             std::stoul(get("k")), std::stoul(get("pool")),
                                             std::stod(get("beta")), &r.ptr));
            print_result(r.ptr);
        } else if (distill->parsed()) {
            size_t n = 0;
            check("distill", hdg_run_distill(cfg.ptr, distill_input.c_str(), &n));
            std::printf("rows=%zu\n", n);
        } else if (eval->parsed()) {
            hdg_metric_report m{};
            check("eval", hdg_run_eval(cfg.ptr, queries_path.c_str(), &m));
            std::printf("queries=%zu\nexact_match=%.9g\nf1=%.9g\nrelevance=%.9g\ndiversity=%.9g\n"
                        "faithfulness=%.9g\n",
                        m.queries, m.exact_match, m.f1, m.relevance, m.diversity, m.faithfulness);
        }
    } catch (const StageFailure& f) {
        std::cerr << "error: stage '" << f.stage << "' failed (" << hdg_status_string(f.status)
                  << "): " << f.message << "\n";
        return kExitStage;
    }
    return kExitOk;
}
