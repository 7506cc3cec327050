#include "pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "hash.hpp"
#include "semb_io.hpp"

namespace hdgrag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    HDGRAG_REQUIRE(
            ec == std::errc() && ptr == end,
            ErrorCode::kInvalidArgument,
            "bad value for '" + key + "': '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(ErrorCode::kInvalidArgument, "bad boolean for '" + key + "': '" + v + "'");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename M>
Field field(M PipelineConfig::*member) {
    Field f;
    f.set = [member](PipelineConfig& c, const std::string& k, const std::string& v) {
        if constexpr (std::is_same_v<M, std::string>) {
            c.*member = v;
        } else if constexpr (std::is_same_v<M, bool>) {
            c.*member = parse_bool(k, v);
        } else {
            c.*member = parse_number<M>(k, v);
        }
    };
    f.get = [member](const PipelineConfig& c) {
        if constexpr (std::is_same_v<M, std::string>) {
            return c.*member;
        } else if constexpr (std::is_same_v<M, bool>) {
            return std::string(c.*member ? "true" : "false");
        } else if constexpr (std::is_floating_point_v<M>) {
            return fmt(c.*member);
        } else {
            return std::to_string(c.*member);
        }
    };
    return f;
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
            {"corpus", field(&PipelineConfig::corpus)},
            {"out", field(&PipelineConfig::out)},
            {"domain", field(&PipelineConfig::domain)},
            {"max_words", field(&PipelineConfig::max_words)},
            {"max_tokens", field(&PipelineConfig::max_tokens)},
            {"d_t", field(&PipelineConfig::d_t)},
            {"normalize", field(&PipelineConfig::normalize)},
            {"embedder", field(&PipelineConfig::embedder)},
            {"external_matrix", field(&PipelineConfig::external_matrix)},
            {"external_ids", field(&PipelineConfig::external_ids)},
            {"d_s", field(&PipelineConfig::d_s)},
            {"gnn_input_dim", field(&PipelineConfig::gnn_input_dim)},
            {"gnn_layers", field(&PipelineConfig::gnn_layers)},
            {"gnn_heads", field(&PipelineConfig::gnn_heads)},
            {"epochs", field(&PipelineConfig::epochs)},
            {"learning_rate", field(&PipelineConfig::learning_rate)},
            {"k_neg", field(&PipelineConfig::k_neg)},
            {"holdout", field(&PipelineConfig::holdout)},
            {"k", field(&PipelineConfig::k)},
            {"pool", field(&PipelineConfig::pool)},
            {"beta", field(&PipelineConfig::beta)},
            {"theta", field(&PipelineConfig::theta)},
            {"kl_direction", field(&PipelineConfig::kl_direction)},
            {"mask_ratio", field(&PipelineConfig::mask_ratio)},
            {"mean_span", field(&PipelineConfig::mean_span)},
            {"diversity_level", field(&PipelineConfig::diversity_level)},
            {"seed", field(&PipelineConfig::seed)},
    };
    return table;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    HDGRAG_REQUIRE(out, ErrorCode::kIo, "cannot write " + path);
    out << content;
    HDGRAG_REQUIRE(out.good(), ErrorCode::kIo, "write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    HDGRAG_REQUIRE(in, ErrorCode::kIo, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    HDGRAG_REQUIRE(in, ErrorCode::kIo, "cannot open " + path);
    std::vector<json> out;
    std::string line;
    size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            fail(ErrorCode::kParse, path + " line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

Vector number_list(const json& rec, const char* key) {
    auto it = rec.find(key);
    HDGRAG_REQUIRE(
            it != rec.end() && it->is_array(),
            ErrorCode::kParse,
            std::string("record lacks numeric list '") + key + "'");
    Vector v;
    for (const auto& x : *it) {
        HDGRAG_REQUIRE(x.is_number(), ErrorCode::kParse, std::string("non-numeric entry in '") + key + "'");
        v.push_back(x.get<double>());
    }
    return v;
}

std::string string_field(const json& rec, const char* key) {
    auto it = rec.find(key);
    HDGRAG_REQUIRE(
            it != rec.end() && it->is_string(),
            ErrorCode::kParse,
            std::string("record lacks string '") + key + "'");
    return it->get<std::string>();
}

std::unique_ptr<TextEmbedder> embedder_for(const PipelineConfig& cfg) {
    return make_embedder(cfg.embedder_spec(), cfg.external_matrix, cfg.external_ids);
}

std::string doc_of_passage(const std::string& passage_id) {
    return passage_id.substr(0, passage_id.rfind('#'));
}

} // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    HDGRAG_REQUIRE(it != fields().end(), ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    it->second.set(*this, key, value);
}

std::string PipelineConfig::get(const std::string& key) const {
    auto it = fields().find(key);
    HDGRAG_REQUIRE(it != fields().end(), ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    return it->second.get(*this);
}

std::vector<std::string> PipelineConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) {
        out.push_back(k);
    }
    return out;
}

void PipelineConfig::load_file(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        line = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        HDGRAG_REQUIRE(
                eq != std::string::npos,
                ErrorCode::kParse,
                path + " line " + std::to_string(n) + ": expected key=value");
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void PipelineConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        HDGRAG_REQUIRE(ok, ErrorCode::kInvalidArgument, msg);
    };
    require(max_words >= 1, "max_words must be >= 1");
    require(max_tokens >= 2, "max_tokens must be >= 2");
    require(d_t >= 1, "d_t must be >= 1");
    require(d_s >= 1 && gnn_heads >= 1 && d_s % gnn_heads == 0, "d_s must be a positive multiple of gnn_heads");
    require(gnn_input_dim >= 1 && gnn_layers >= 1, "gnn_input_dim and gnn_layers must be >= 1");
    require(epochs >= 0 && learning_rate > 0, "epochs must be >= 0 and learning_rate > 0");
    require(k_neg >= 1, "k_neg must be >= 1");
    require(holdout >= 0 && holdout < 1, "holdout must be in [0, 1)");
    require(k >= 1 && pool >= 1, "k and pool must be >= 1");
    require(beta >= 0, "beta must be >= 0");
    require(theta > 0, "theta must be > 0");
    require(mask_ratio > 0 && mask_ratio < 1, "mask_ratio must be in (0, 1)");
    require(mean_span >= 1, "mean_span must be >= 1");
    require(embedder == "hashed_tf" || embedder == "external", "embedder must be hashed_tf or external");
    require(
            kl_direction == "retriever_to_posterior" || kl_direction == "posterior_to_retriever",
            "kl_direction must be retriever_to_posterior or posterior_to_retriever");
    require(diversity_level == "passage" || diversity_level == "document", "diversity_level must be passage or document");
    require(!out.empty(), "output directory must be set");
}

EmbedderSpec PipelineConfig::embedder_spec() const {
    return {embedder == "external" ? EmbedderKind::kExternal : EmbedderKind::kHashedTf, d_t, normalize};
}

GnnConfig PipelineConfig::gnn_config() const {
    GnnConfig g;
    g.input_dim = gnn_input_dim;
    g.dim = d_s;
    g.layers = gnn_layers;
    g.heads = gnn_heads;
    return g;
}

TrainConfig PipelineConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = learning_rate;
    t.k_neg = k_neg;
    t.holdout = holdout;
    t.seed = derive_seed(seed, "train");
    t.gnn = gnn_config();
    return t;
}

FeatureConfig PipelineConfig::feature_config() const {
    return {gnn_input_dim, d_t, derive_seed(seed, "features")};
}

MaskingConfig PipelineConfig::masking_config() const {
    return {mask_ratio, mean_span, derive_seed(seed, "mask")};
}

KlDirection PipelineConfig::direction() const {
    return kl_direction == "posterior_to_retriever" ? KlDirection::kPosteriorToRetriever
                                                    : KlDirection::kRetrieverToPosterior;
}

ArtifactPaths::ArtifactPaths(const std::string& out) {
    const fs::path b(out);
    auto p = [&](const char* name) { return (b / name).string(); };
    corpus = p("corpus.jsonl");
    passages = p("passages.jsonl");
    graph_nodes = p("graph.nodes.tsv");
    graph_edges = p("graph.edges.tsv");
    graph_links = p("graph.links.tsv");
    graph_stats = p("graph.stats.txt");
    doc_struct_matrix = p("doc_struct.semb");
    doc_struct_ids = p("doc_struct.ids");
    train_report = p("train_report.txt");
    text_matrix = p("text.semb");
    text_ids = p("text.ids");
    struct_matrix = p("struct.semb");
    struct_ids = p("struct.ids");
    index_dir = p("index");
    masked = p("masked.jsonl");
    distill = p("distill.jsonl");
    metrics_kv = p("metrics.txt");
    metrics_jsonl = p("metrics.jsonl");
}

Corpus load_stage_corpus(const PipelineConfig& cfg) {
    const std::string path = cfg.corpus.empty() ? ArtifactPaths(cfg.out).corpus : cfg.corpus;
    Corpus c = ingest_corpus(path);
    return cfg.domain.empty() ? c : filter_by_domain(c, cfg.domain);
}

IngestSummary run_ingest(const PipelineConfig& cfg) {
    cfg.validate();
    HDGRAG_REQUIRE(!cfg.corpus.empty(), ErrorCode::kInvalidArgument, "ingest needs --corpus");
    fs::create_directories(cfg.out);
    const ArtifactPaths paths(cfg.out);
    const Corpus corpus = load_stage_corpus(cfg);
    std::string docs, passages;
    IngestSummary s;
    for (const auto& d : corpus.documents()) {
        docs += document_to_json(d) + "\n";
        for (const auto& p : chunk_document(d, cfg.max_words, cfg.max_tokens)) {
            passages += passage_to_json(p) + "\n";
            ++s.passages;
        }
    }
    s.documents = corpus.size();
    write_text(paths.corpus, docs);
    write_text(paths.passages, passages);
    return s;
}

GraphStats run_build_graph(const PipelineConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out);
    const ArtifactPaths paths(cfg.out);
    const HeteroGraph g = build_graph(load_stage_corpus(cfg));
    write_text(paths.graph_nodes, format_node_list(g));
    write_text(paths.graph_edges, format_edge_list(g));
    write_text(paths.graph_links, format_doc_links(project_document_links(g)));
    const GraphStats stats = graph_stats(g);
    write_text(paths.graph_stats, stats.to_kv() + "dropped_citations=" + std::to_string(stats.dropped_citations) + "\n");
    return stats;
}

TrainReport run_train_gnn(const PipelineConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out);
    const ArtifactPaths paths(cfg.out);
    const Corpus corpus = load_stage_corpus(cfg);
    const HeteroGraph g = build_graph(corpus);
    const Matrix x = init_node_features(g, titles_of(corpus), cfg.feature_config());
    TrainResult trained = train_link_prediction(g, x, cfg.train_config());
    const StructuralEncoder encoder(std::move(trained.params), cfg.gnn_config());
    const DocEmbeddings docs = encoder.document_embeddings(g, x);

    std::vector<std::string> ids;
    std::vector<Vector> rows;
    for (const auto& [id, v] : docs) {
        ids.push_back(id);
        rows.push_back(v);
    }
    write_semb(paths.doc_struct_matrix, to_matrix(rows, static_cast<uint32_t>(cfg.d_s)));
    write_ids(paths.doc_struct_ids, ids);
    write_text(paths.train_report, trained.report.to_kv());
    return trained.report;
}

std::vector<Passage> read_passages(const std::string& path) {
    std::vector<Passage> out;
    for (const auto& rec : read_jsonl(path)) {
        Passage p;
        p.passage_id = string_field(rec, "passage_id");
        p.doc_id = string_field(rec, "doc_id");
        p.text = string_field(rec, "text");
        p.seq_no = rec.value("seq_no", 0);
        p.word_count = rec.value("word_count", 0);
        p.token_count = rec.value("token_count", 0);
        out.push_back(std::move(p));
    }
    return out;
}

FlatIndex build_index_in_memory(
        const std::vector<Passage>& passages,
        const TextEmbedder& embedder,
        const DocEmbeddings& doc_embeddings) {
    std::vector<FusedRecord> records;
    records.reserve(passages.size());
    for (const auto& p : passages) {
        records.push_back(
                {p.passage_id, embedder.embed(p.passage_id, p.text),
                 passage_structural_embedding(p, doc_embeddings)});
    }
    return FlatIndex::build(std::move(records));
}

size_t run_embed(const PipelineConfig& cfg) {
    cfg.validate();
    const ArtifactPaths paths(cfg.out);
    const auto passages = read_passages(paths.passages);
    const auto doc_matrix = read_semb(paths.doc_struct_matrix);
    const auto doc_ids = read_ids(paths.doc_struct_ids);
    HDGRAG_REQUIRE(doc_ids.size() == doc_matrix.rows, ErrorCode::kFormat, "document embedding sidecar mismatch");
    DocEmbeddings docs;
    for (size_t i = 0; i < doc_ids.size(); ++i) {
        docs.emplace(doc_ids[i], Vector(doc_matrix.row(i), doc_matrix.row(i) + doc_matrix.dim));
    }
    const auto embedder = embedder_for(cfg);
    std::vector<std::string> ids;
    std::vector<Vector> text, structure;
    for (const auto& p : passages) {
        ids.push_back(p.passage_id);
        text.push_back(embedder->embed(p.passage_id, p.text));
        structure.push_back(passage_structural_embedding(p, docs));
    }
    write_semb(paths.text_matrix, to_matrix(text, static_cast<uint32_t>(embedder->dim())));
    write_ids(paths.text_ids, ids);
    write_semb(paths.struct_matrix, to_matrix(structure, doc_matrix.dim));
    write_ids(paths.struct_ids, ids);
    return passages.size();
}

size_t run_index(const PipelineConfig& cfg) {
    cfg.validate();
    const ArtifactPaths paths(cfg.out);
    const auto text = read_semb(paths.text_matrix);
    const auto structure = read_semb(paths.struct_matrix);
    const auto text_ids = read_ids(paths.text_ids);
    const auto struct_ids = read_ids(paths.struct_ids);
    HDGRAG_REQUIRE(
            text_ids == struct_ids && text_ids.size() == text.rows && structure.rows == text.rows,
            ErrorCode::kFormat,
            "text and structural embedding files disagree");
    std::vector<FusedRecord> records;
    for (size_t i = 0; i < text_ids.size(); ++i) {
        records.push_back(
                {text_ids[i], Vector(text.row(i), text.row(i) + text.dim),
                 Vector(structure.row(i), structure.row(i) + structure.dim)});
    }
    const FlatIndex index = FlatIndex::build(std::move(records));
    index.save(paths.index_dir, cfg.k);
    return index.size();
}

size_t run_mask(const PipelineConfig& cfg) {
    cfg.validate();
    const ArtifactPaths paths(cfg.out);
    const MaskingConfig base = cfg.masking_config();
    std::string out;
    size_t n = 0;
    for (const auto& p : read_passages(paths.passages)) {
        const auto tokens = split_whitespace(p.text);
        if (tokens.size() < 2) {
            continue;
        }
        MaskingConfig mc = base;
        mc.seed = derive_seed(base.seed, p.passage_id);
        const MaskedSample s = mask_spans(tokens, mc);
        json rec = json::parse(masked_sample_to_json(s, mc.seed));
        rec["passage_id"] = p.passage_id;
        out += rec.dump() + "\n";
        ++n;
    }
    write_text(paths.masked, out);
    return n;
}

size_t run_distill(const PipelineConfig& cfg, const std::string& input_path) {
    cfg.validate();
    fs::create_directories(cfg.out);
    const ArtifactPaths paths(cfg.out);
    std::string out;
    size_t n = 0;
    for (const auto& rec : read_jsonl(input_path)) {
        DistillInputs in{number_list(rec, "loglik"), number_list(rec, "scores"), cfg.theta};
        const DistillResult r = distill_loss(in, cfg.direction());
        json row = {
                {"query_id", rec.value("query_id", "row" + std::to_string(n))},
                {"loss", r.loss},
                {"grad", r.grad},
                {"retriever", retriever_distribution(in.scores, in.temperature)},
                {"posterior", passage_posterior(in.loglik)},
        };
        out += row.dump() + "\n";
        ++n;
    }
    write_text(paths.distill, out);
    return n;
}

MetricReport run_eval(const PipelineConfig& cfg, const std::string& queries_path) {
    cfg.validate();
    const ArtifactPaths paths(cfg.out);
    const FlatIndex index = FlatIndex::load(paths.index_dir);
    const auto embedder = embedder_for(cfg);
    std::vector<QueryMetrics> per_query;
    std::string lines;
    for (const auto& rec : read_jsonl(queries_path)) {
        QueryMetrics m;
        m.query_id = string_field(rec, "query_id");
        const std::string query = string_field(rec, "query");
        const Vector q = embedder->embed(m.query_id, query);
        const RetrievalResult res = index.topk(q, cfg.k);
        HDGRAG_REQUIRE(!res.hits.empty(), ErrorCode::kInvalidArgument, "eval needs a non-empty index");
        std::vector<Vector> retrieved;
        std::vector<std::string> evidence;
        for (const auto& h : res.hits) {
            retrieved.push_back(index.find(h.passage_id)->text);
            evidence.push_back(cfg.diversity_level == "document" ? doc_of_passage(h.passage_id) : h.passage_id);
        }
        m.relevance = query_relevance(q, retrieved);
        m.diversity = diversity(evidence);
        const std::string pred = rec.value("prediction", "");
        const std::string gold = rec.value("gold", "");
        m.exact_match = exact_match(pred, gold);
        m.f1 = token_f1(pred, gold);
        lines += m.to_json() + "\n";
        per_query.push_back(std::move(m));
    }
    const MetricReport report = aggregate(per_query);
    write_text(paths.metrics_kv, report.to_kv());
    write_text(paths.metrics_jsonl, lines);
    return report;
}

GraphStats run_stats(const PipelineConfig& cfg) {
    const ArtifactPaths paths(cfg.out);
    return graph_stats(parse_graph(read_text(paths.graph_nodes), read_text(paths.graph_edges)));
}

} // namespace hdgrag
