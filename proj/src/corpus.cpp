#include "corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace hdgrag {

using nlohmann::json;

void Corpus::add(Document doc) {
    HDGRAG_REQUIRE(
            !by_id_.contains(doc.doc_id),
            ErrorCode::kConflict,
            "duplicate doc_id '" + doc.doc_id + "'");
    by_id_.emplace(doc.doc_id, docs_.size());
    docs_.push_back(std::move(doc));
}

bool Corpus::contains(std::string_view doc_id) const {
    return by_id_.find(doc_id) != by_id_.end();
}

const Document& Corpus::at(std::string_view doc_id) const {
    auto it = by_id_.find(doc_id);
    HDGRAG_REQUIRE(
            it != by_id_.end(),
            ErrorCode::kNotFound,
            "unknown doc_id '" + std::string(doc_id) + "'");
    return docs_[it->second];
}

namespace {

std::string where(size_t line) {
    return "line " + std::to_string(line) + ": ";
}

std::string required_string(const json& rec, const char* key, size_t line) {
    auto it = rec.find(key);
    HDGRAG_REQUIRE(
            it != rec.end() && it->is_string(),
            ErrorCode::kParse,
            where(line) + "missing or non-string field '" + key + "'");
    return it->get<std::string>();
}

std::vector<std::string> optional_list(const json& rec, const char* key, size_t line) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) {
        return {};
    }
    HDGRAG_REQUIRE(
            it->is_array(),
            ErrorCode::kParse,
            where(line) + "field '" + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        HDGRAG_REQUIRE(
                v.is_string(),
                ErrorCode::kParse,
                where(line) + "field '" + key + "' must be a list of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Document parse_record(std::string_view text, size_t line) {
    json rec;
    try {
        rec = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::kParse, where(line) + "malformed JSON (" + e.what() + ")");
    }
    HDGRAG_REQUIRE(rec.is_object(), ErrorCode::kParse, where(line) + "record is not an object");

    Document d;
    d.doc_id = required_string(rec, "doc_id", line);
    HDGRAG_REQUIRE(!d.doc_id.empty(), ErrorCode::kParse, where(line) + "empty doc_id");
    HDGRAG_REQUIRE(
            d.doc_id.find_first_of("\t\n\r") == std::string::npos,
            ErrorCode::kParse,
            where(line) + "doc_id contains control whitespace");
    d.title = required_string(rec, "title", line);
    d.body = required_string(rec, "body", line);
    if (auto it = rec.find("domain"); it != rec.end() && !it->is_null()) {
        HDGRAG_REQUIRE(it->is_string(), ErrorCode::kParse, where(line) + "non-string 'domain'");
        d.domain = it->get<std::string>();
    }
    if (auto it = rec.find("venue"); it != rec.end() && !it->is_null()) {
        HDGRAG_REQUIRE(it->is_string(), ErrorCode::kParse, where(line) + "non-string 'venue'");
        d.venue = it->get<std::string>();
    }
    d.authors = optional_list(rec, "authors", line);
    d.institutions = optional_list(rec, "institutions", line);
    d.topics = optional_list(rec, "topics", line);

    std::set<std::string> seen;
    for (auto& c : optional_list(rec, "cited_ids", line)) {
        HDGRAG_REQUIRE(
                c != d.doc_id,
                ErrorCode::kParse,
                where(line) + "document '" + d.doc_id + "' cites itself");
        if (seen.insert(c).second) {
            d.cited_ids.push_back(std::move(c));
        }
    }
    return d;
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

Corpus parse_corpus(std::string_view content) {
    Corpus corpus;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < content.size()) {
        size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) {
            end = content.size();
        }
        ++line_no;
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        if (blank(line)) {
            continue;
        }
        Document d = parse_record(line, line_no);
        HDGRAG_REQUIRE(
                !corpus.contains(d.doc_id),
                ErrorCode::kConflict,
                where(line_no) + "duplicate doc_id '" + d.doc_id + "'");
        corpus.add(std::move(d));
    }
    return corpus;
}

Corpus ingest_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    HDGRAG_REQUIRE(in, ErrorCode::kIo, "cannot open corpus: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_corpus(ss.str());
}

std::string document_to_json(const Document& d) {
    json rec = {
            {"doc_id", d.doc_id},
            {"title", d.title},
            {"body", d.body},
            {"domain", d.domain},
            {"authors", d.authors},
            {"venue", d.venue ? json(*d.venue) : json(nullptr)},
            {"institutions", d.institutions},
            {"topics", d.topics},
            {"cited_ids", d.cited_ids},
    };
    return rec.dump();
}

Corpus filter_by_domain(const Corpus& corpus, std::string_view domain) {
    Corpus out;
    for (const auto& d : corpus.documents()) {
        if (d.domain == domain) {
            out.add(d);
        }
    }
    return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> words;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) {
        words.push_back(std::move(w));
    }
    return words;
}

std::string passage_id_for(std::string_view doc_id, int seq_no) {
    return std::string(doc_id) + "#" + std::to_string(seq_no);
}

namespace {

std::string join(const std::vector<std::string>& words, size_t begin, size_t end) {
    std::string out;
    for (size_t i = begin; i < end; ++i) {
        if (i > begin) {
            out += ' ';
        }
        out += words[i];
    }
    return out;
}

} // namespace

std::vector<Passage> chunk_document(const Document& doc, int max_words, int max_tokens) {
    HDGRAG_REQUIRE(max_words >= 1, ErrorCode::kInvalidArgument, "max_words must be >= 1");
    const auto title_words = split_whitespace(doc.title);
    const auto body_words = split_whitespace(doc.body);
    const int title_tokens = static_cast<int>(title_words.size());
    HDGRAG_REQUIRE(
            max_tokens - title_tokens >= 1,
            ErrorCode::kInvalidArgument,
            "title of '" + doc.doc_id + "' leaves no room under the token cap");
    const size_t chunk = static_cast<size_t>(std::min(max_words, max_tokens - title_tokens));
    const std::string title = join(title_words, 0, title_words.size());

    std::vector<Passage> out;
    if (body_words.empty()) {
        out.push_back({passage_id_for(doc.doc_id, 0), doc.doc_id, 0, title, 0, title_tokens});
        return out;
    }
    for (size_t begin = 0, seq = 0; begin < body_words.size(); begin += chunk, ++seq) {
        const size_t end = std::min(begin + chunk, body_words.size());
        Passage p;
        p.seq_no = static_cast<int>(seq);
        p.passage_id = passage_id_for(doc.doc_id, p.seq_no);
        p.doc_id = doc.doc_id;
        p.text = title + "\n" + join(body_words, begin, end);
        p.word_count = static_cast<int>(end - begin);
        p.token_count = p.word_count + title_tokens;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Passage> chunk_corpus(const Corpus& corpus, int max_words, int max_tokens) {
    std::vector<Passage> all;
    for (const auto& d : corpus.documents()) {
        auto ps = chunk_document(d, max_words, max_tokens);
        std::move(ps.begin(), ps.end(), std::back_inserter(all));
    }
    return all;
}

std::vector<std::string> passage_body_words(const Passage& p) {
    const auto nl = p.text.find('\n');
    if (nl == std::string::npos) {
        return {};
    }
    return split_whitespace(std::string_view(p.text).substr(nl + 1));
}

std::string passage_to_json(const Passage& p) {
    json rec = {
            {"passage_id", p.passage_id},
            {"doc_id", p.doc_id},
            {"seq_no", p.seq_no},
            {"text", p.text},
            {"word_count", p.word_count},
            {"token_count", p.token_count},
    };
    return rec.dump();
}

} // namespace hdgrag
