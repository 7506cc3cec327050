#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hdgrag {

struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    std::string domain;
    std::vector<std::string> authors;
    std::optional<std::string> venue;
    std::vector<std::string> institutions;
    std::vector<std::string> topics;
    std::vector<std::string> cited_ids;
};

/// A disjoint, title-prefixed chunk of one document's body.
struct Passage {
    std::string passage_id;
    std::string doc_id;
    int seq_no = 0;
    std::string text;
    int word_count = 0;
    int token_count = 0;
};

class Corpus {
  public:
    Corpus() = default;

    /// Throws kConflict on duplicate doc_id.
    void add(Document doc);

    const std::vector<Document>& documents() const { return docs_; }
    size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    bool contains(std::string_view doc_id) const;
    const Document& at(std::string_view doc_id) const;

  private:
    std::vector<Document> docs_;
    std::map<std::string, size_t, std::less<>> by_id_;
};

/// Reads one JSON object per line. Blank lines are skipped. Errors name the
/// 1-based line number.
Corpus ingest_corpus(const std::string& path);
Corpus parse_corpus(std::string_view content);

std::string document_to_json(const Document& doc);

Corpus filter_by_domain(const Corpus& corpus, std::string_view domain);

std::vector<std::string> split_whitespace(std::string_view s);

std::string passage_id_for(std::string_view doc_id, int seq_no);

/// Word limit first, then the token cap shrinks the chunk (title words count
/// against the cap). Body words are never dropped.
std::vector<Passage> chunk_document(const Document& doc, int max_words = 100, int max_tokens = 512);

std::vector<Passage> chunk_corpus(const Corpus& corpus, int max_words = 100, int max_tokens = 512);

/// Body words carried by a passage (text after the title separator).
std::vector<std::string> passage_body_words(const Passage& p);

std::string passage_to_json(const Passage& p);

} // namespace hdgrag
