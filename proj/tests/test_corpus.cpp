#include <gtest/gtest.h>

#include "corpus.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace hdgrag;

namespace {

std::string words(int n, const std::string& stem = "w") {
    std::string s;
    for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += stem + std::to_string(i);
    }
    return s;
}

Document doc(const std::string& id, const std::string& body, const std::string& title = "A Title") {
    Document d;
    d.doc_id = id;
    d.title = title;
    d.body = body;
    return d;
}

} // namespace

TEST(Ingest, ThreeRecords) {
    const auto c = parse_corpus(
            R"({"doc_id":"a","title":"T1","body":"x y"})"
            "\n"
            R"({"doc_id":"b","title":"T2","body":"z","authors":["u1"],"venue":"V"})"
            "\n"
            R"({"doc_id":"c","title":"T3","body":"","topics":["t"],"cited_ids":["a","b","a"]})"
            "\n");
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c.at("b").venue.value(), "V");
    EXPECT_EQ(c.at("b").authors, std::vector<std::string>{"u1"});
    EXPECT_FALSE(c.at("a").venue.has_value());
    EXPECT_EQ(c.at("c").cited_ids, (std::vector<std::string>{"a", "b"}));
}

TEST(Ingest, DuplicateIdNamesLine) {
    try {
        parse_corpus("{\"doc_id\":\"a\",\"title\":\"t\",\"body\":\"b\"}\n{\"doc_id\":\"a\",\"title\":\"t\",\"body\":\"b\"}\n");
        FAIL() << "expected conflict";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kConflict);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Ingest, EmptyFileIsEmptyCorpus) {
    testutil::TempDir dir("corpus");
    testutil::write_file(dir.file("empty.jsonl"), "");
    EXPECT_TRUE(ingest_corpus(dir.file("empty.jsonl")).empty());
}

TEST(Ingest, MalformedRecordNamesLine) {
    const std::string good = "{\"doc_id\":\"a\",\"title\":\"t\",\"body\":\"b\"}\n";
    for (const std::string bad : {"{not json", "{\"doc_id\":\"b\",\"body\":\"x\"}", "[1,2]",
                                  "{\"doc_id\":\"b\",\"title\":\"t\",\"body\":\"x\",\"authors\":\"u\"}"}) {
        try {
            parse_corpus(good + "\n" + bad + "\n");
            FAIL() << "expected parse error for " << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::kParse);
            EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
        }
    }
}

TEST(Ingest, SelfCitationRejected) {
    EXPECT_THROW(parse_corpus(R"({"doc_id":"a","title":"t","body":"b","cited_ids":["a"]})"), Error);
}

TEST(Ingest, MissingFileIsIoError) {
    try {
        ingest_corpus("/nonexistent/corpus.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kIo);
    }
}

TEST(Ingest, JsonRoundTrip) {
    Document d = doc("x", "one two", "Title");
    d.domain = "bio";
    d.authors = {"a1", "a2"};
    d.venue = "v";
    d.institutions = {"i"};
    d.topics = {"t1"};
    d.cited_ids = {"y"};
    const auto c = parse_corpus(document_to_json(d));
    const Document& r = c.at("x");
    EXPECT_EQ(r.title, d.title);
    EXPECT_EQ(r.body, d.body);
    EXPECT_EQ(r.domain, d.domain);
    EXPECT_EQ(r.authors, d.authors);
    EXPECT_EQ(r.venue, d.venue);
    EXPECT_EQ(r.institutions, d.institutions);
    EXPECT_EQ(r.topics, d.topics);
    EXPECT_EQ(r.cited_ids, d.cited_ids);
}

TEST(Ingest, DomainFilter) {
    Corpus c;
    for (int i = 0; i < 6; ++i) {
        Document d = doc("d" + std::to_string(i), "b");
        d.domain = i % 2 ? "odd" : "even";
        c.add(d);
    }
    EXPECT_EQ(filter_by_domain(c, "odd").size(), 3u);
    EXPECT_EQ(filter_by_domain(c, "even").size(), 3u);
    EXPECT_TRUE(filter_by_domain(c, "none").empty());
}

TEST(Chunk, TwoHundredFiftyWords) {
    const auto ps = chunk_document(doc("d", words(250)));
    ASSERT_EQ(ps.size(), 3u);
    EXPECT_EQ(ps[0].word_count, 100);
    EXPECT_EQ(ps[1].word_count, 100);
    EXPECT_EQ(ps[2].word_count, 50);
    EXPECT_EQ(ps[0].token_count, 102);  // two title words
}

TEST(Chunk, ExactlyOneHundredWords) {
    EXPECT_EQ(chunk_document(doc("d", words(100))).size(), 1u);
}

TEST(Chunk, EmptyBodyGivesTitleOnly) {
    const auto ps = chunk_document(doc("d", "   ", "Only Title"));
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].text, "Only Title");
    EXPECT_EQ(ps[0].word_count, 0);
    EXPECT_TRUE(passage_body_words(ps[0]).empty());
}

TEST(Chunk, TextIsTitleNewlineChunk) {
    const auto ps = chunk_document(doc("d", "a b c", "My Title"), 2);
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_EQ(ps[0].text, "My Title\na b");
    EXPECT_EQ(ps[1].text, "My Title\nc");
    EXPECT_EQ(ps[1].passage_id, passage_id_for("d", 1));
    EXPECT_EQ(ps[1].seq_no, 1);
    EXPECT_EQ(ps[1].doc_id, "d");
}

TEST(Chunk, TokenCapShrinksChunk) {
    // 10 title words leave 40 body words under a 50-token cap.
    const auto ps = chunk_document(doc("d", words(100), words(10, "t")), 100, 50);
    ASSERT_EQ(ps.size(), 3u);
    EXPECT_EQ(ps[0].word_count, 40);
    EXPECT_EQ(ps[0].token_count, 50);
    EXPECT_EQ(ps[2].word_count, 20);
}

TEST(Chunk, TitleFillingCapIsError) {
    EXPECT_THROW(chunk_document(doc("d", "x", words(5, "t")), 100, 5), Error);
}

TEST(Chunk, InvalidMaxWords) {
    EXPECT_THROW(chunk_document(doc("d", "x"), 0), Error);
}

TEST(Chunk, PassageIdIsPureFunction) {
    EXPECT_EQ(passage_id_for("doc", 3), passage_id_for("doc", 3));
    EXPECT_NE(passage_id_for("doc", 3), passage_id_for("doc", 4));
    EXPECT_NE(passage_id_for("doc", 1), passage_id_for("doc1", 0));
}

// Round trip and size invariants against a whitespace tokenization oracle.
TEST(ChunkProperty, RoundTripAndSizes) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(rng.below(1001));
        const int max_words = 1 + static_cast<int>(rng.below(150));
        std::string body;
        std::vector<std::string> oracle;
        for (int i = 0; i < n; ++i) {
            const std::string w = "t" + std::to_string(rng.below(50));
            oracle.push_back(w);
            // Mixed whitespace between words.
            body += (rng.below(3) == 0 ? "\t " : " ") + w;
        }
        const auto ps = chunk_document(doc("d", body, "x y"), max_words);
        std::vector<std::string> joined;
        for (size_t i = 0; i < ps.size(); ++i) {
            const auto w = passage_body_words(ps[i]);
            EXPECT_EQ(static_cast<int>(w.size()), ps[i].word_count);
            EXPECT_LE(ps[i].word_count, max_words);
            EXPECT_LE(ps[i].token_count, 512);
            if (i + 1 < ps.size()) EXPECT_EQ(ps[i].word_count, max_words);
            EXPECT_EQ(ps[i].seq_no, static_cast<int>(i));
            joined.insert(joined.end(), w.begin(), w.end());
        }
        EXPECT_EQ(joined, oracle);
    }
}

TEST(ChunkProperty, ThousandWordRoundTrip) {
    const std::string body = words(1000);
    const auto ps = chunk_document(doc("d", body));
    ASSERT_EQ(ps.size(), 10u);
    std::vector<std::string> joined;
    for (const auto& p : ps) {
        const auto w = passage_body_words(p);
        joined.insert(joined.end(), w.begin(), w.end());
    }
    EXPECT_EQ(joined, split_whitespace(body));
}
