#include "fusion_index.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"
#include "semb_io.hpp"

namespace hdgrag {

namespace {

bool ranks_before(double sa, const std::string& ia, double sb, const std::string& ib) {
    if (sa != sb) {
        return sa > sb;
    }
    return ia < ib;
}

} // namespace

Vector fuse(std::span<const double> text, std::span<const double> structure) {
    return concat(text, structure);
}

Vector make_reader_input(std::span<const double> query, std::span<const double> fused) {
    return concat(query, fused);
}

FlatIndex FlatIndex::build(std::vector<FusedRecord> records) {
    FlatIndex index;
    if (!records.empty()) {
        index.text_dim_ = records.front().text.size();
        index.struct_dim_ = records.front().structure.size();
    }
    for (const auto& r : records) {
        HDGRAG_REQUIRE(
                r.text.size() == index.text_dim_ && r.structure.size() == index.struct_dim_,
                ErrorCode::kDimensionMismatch,
                "record '" + r.passage_id + "' has mismatched dimensions");
        HDGRAG_REQUIRE(
                all_finite(r.text) && all_finite(r.structure),
                ErrorCode::kInvalidArgument,
                "record '" + r.passage_id + "' has non-finite entries");
    }
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.passage_id < b.passage_id;
    });
    for (size_t i = 1; i < records.size(); ++i) {
        HDGRAG_REQUIRE(
                records[i].passage_id != records[i - 1].passage_id,
                ErrorCode::kConflict,
                "duplicate passage id '" + records[i].passage_id + "'");
    }
    index.records_ = std::move(records);
    return index;
}

const FusedRecord* FlatIndex::find(std::string_view passage_id) const {
    auto it = std::lower_bound(
            records_.begin(), records_.end(), passage_id,
            [](const FusedRecord& r, std::string_view id) { return r.passage_id < id; });
    if (it == records_.end() || it->passage_id != passage_id) {
        return nullptr;
    }
    return &*it;
}

RetrievalResult FlatIndex::topk(std::span<const double> query, size_t k) const {
    HDGRAG_REQUIRE(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
    HDGRAG_REQUIRE(
            records_.empty() || query.size() == text_dim_,
            ErrorCode::kDimensionMismatch,
            "query dimension " + std::to_string(query.size()) + " != index text dimension " +
                    std::to_string(text_dim_));
    std::vector<double> scores(records_.size());
    for (size_t i = 0; i < records_.size(); ++i) {
        scores[i] = dot(query, records_[i].text);
    }
    // Records are id-sorted, so the position breaks ties by ascending id.
    std::vector<size_t> order(records_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    const size_t n = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](size_t a, size_t b) {
                          return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    RetrievalResult out;
    out.k_requested = k;
    out.hits.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        out.hits.push_back({records_[order[i]].passage_id, scores[order[i]], std::nullopt});
    }
    return out;
}

void FlatIndex::save(const std::string& dir, size_t k_default) const {
    std::filesystem::create_directories(dir);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> text, structure;
    for (const auto& r : records_) {
        ids.push_back(r.passage_id);
        text.push_back(r.text);
        structure.push_back(r.structure);
    }
    const auto base = std::filesystem::path(dir);
    write_semb((base / "text.semb").string(), to_matrix(text, static_cast<uint32_t>(text_dim_)));
    write_ids((base / "text.ids").string(), ids);
    write_semb((base / "struct.semb").string(), to_matrix(structure, static_cast<uint32_t>(struct_dim_)));
    write_ids((base / "struct.ids").string(), ids);
    std::ofstream m(base / "manifest.txt", std::ios::binary | std::ios::trunc);
    HDGRAG_REQUIRE(m, ErrorCode::kIo, "cannot write index manifest in " + dir);
    m << "format=hdgrag-flat-index-1\n"
      << "records=" << records_.size() << '\n'
      << "d_t=" << text_dim_ << '\n'
      << "d_s=" << struct_dim_ << '\n'
      << "k_default=" << k_default << '\n'
      << "text_matrix=text.semb\n"
      << "text_ids=text.ids\n"
      << "struct_matrix=struct.semb\n"
      << "struct_ids=struct.ids\n";
}

FlatIndex FlatIndex::load(const std::string& dir, size_t* k_default) {
    const auto base = std::filesystem::path(dir);
    std::ifstream in(base / "manifest.txt");
    HDGRAG_REQUIRE(in, ErrorCode::kIo, "no index manifest in " + dir);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    auto get = [&](const char* key) {
        auto it = kv.find(key);
        HDGRAG_REQUIRE(it != kv.end(), ErrorCode::kFormat, std::string("manifest lacks '") + key + "'");
        return it->second;
    };
    HDGRAG_REQUIRE(get("format") == "hdgrag-flat-index-1", ErrorCode::kFormat, "unknown index format");
    const auto text = read_semb((base / get("text_matrix")).string());
    const auto text_ids = read_ids((base / get("text_ids")).string());
    const auto structure = read_semb((base / get("struct_matrix")).string());
    const auto struct_ids = read_ids((base / get("struct_ids")).string());
    HDGRAG_REQUIRE(
            text_ids == struct_ids && text_ids.size() == text.rows && structure.rows == text.rows,
            ErrorCode::kFormat,
            "index matrices and id sidecars disagree");
    HDGRAG_REQUIRE(
            std::to_string(text.dim) == get("d_t") && std::to_string(structure.dim) == get("d_s"),
            ErrorCode::kDimensionMismatch,
            "manifest dimensions disagree with matrices");
    if (k_default) {
        *k_default = std::stoul(get("k_default"));
    }
    std::vector<FusedRecord> records;
    for (size_t i = 0; i < text_ids.size(); ++i) {
        records.push_back(
                {text_ids[i],
                 Vector(text.row(i), text.row(i) + text.dim),
                 Vector(structure.row(i), structure.row(i) + structure.dim)});
    }
    FlatIndex index = build(std::move(records));
    index.text_dim_ = text.dim;
    index.struct_dim_ = structure.dim;
    return index;
}

RetrievalResult rerank_with_structure(
        const RetrievalResult& pool,
        const FlatIndex& index,
        double beta,
        size_t k) {
    HDGRAG_REQUIRE(beta >= 0, ErrorCode::kInvalidArgument, "beta must be >= 0");
    HDGRAG_REQUIRE(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
    const size_t m = pool.hits.size();
    std::vector<Vector> unit(m);
    for (size_t i = 0; i < m; ++i) {
        const FusedRecord* r = index.find(pool.hits[i].passage_id);
        HDGRAG_REQUIRE(
                r, ErrorCode::kNotFound, "pool passage '" + pool.hits[i].passage_id + "' not in index");
        unit[i] = r->structure;
        const double n = l2_norm(unit[i]);
        for (double& v : unit[i]) {
            v = n > 0 ? v / n : 0.0;
        }
    }
    RetrievalResult out;
    out.k_requested = k;
    out.structure_reranked = true;
    out.hits = pool.hits;
    for (size_t i = 0; i < m; ++i) {
        double coherence = 0.0;
        if (m > 1) {
            for (size_t j = 0; j < m; ++j) {
                if (j != i) coherence += dot(unit[i], unit[j]);
            }
            coherence /= static_cast<double>(m - 1);
        }
        out.hits[i].combined_score = out.hits[i].text_score + beta * coherence;
    }
    std::sort(out.hits.begin(), out.hits.end(), [](const auto& a, const auto& b) {
        return ranks_before(*a.combined_score, a.passage_id, *b.combined_score, b.passage_id);
    });
    out.hits.resize(std::min(k, m));
    return out;
}

} // namespace hdgrag
