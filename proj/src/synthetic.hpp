#pragma once

// Seeded synthetic corpora for tests, experiments and the bundled sample data.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace hdgrag {

struct PlantedBlockConfig {
    int papers = 200;
    int authors = 40;
    int venues = 10;
    int blocks = 2;
    int intra_cites = 10;      // per paper
    double inter_cite_p = 0.1; // chance of one cross-block citation per paper
    int authors_per_paper = 2;
    double coauthor_cite_p = 0.85; // intra-block cites that go to a paper sharing an author
    int body_words = 40;
    uint64_t seed = 0;
};

struct PlantedCorpus {
    Corpus corpus;
    std::map<std::string, int> block_of;  // doc_id -> block
};

/// Papers split into blocks; citations, authors and venues stay mostly
/// within a block. Inside a block, citations prefer papers that share an
/// author. Titles and bodies are drawn from one shared vocabulary so
/// text carries no block signal.
PlantedCorpus planted_block_corpus(const PlantedBlockConfig& cfg);

/// Two structurally separated clusters whose passages all contain the same
/// query terms, so text similarity cannot tell the clusters apart.
struct AmbiguousCorpus {
    Corpus corpus;
    std::map<std::string, int> cluster_of;
    std::string query;
};
AmbiguousCorpus ambiguous_cluster_corpus(uint64_t seed, int docs_per_cluster = 60);

/// Random metadata (topics, venues, institutions, citations including
/// out-of-corpus targets) for projection checks.
Corpus random_metadata_corpus(uint64_t seed, int docs);

/// Sample pipeline corpus with queries. Each query line is a JSON object
/// {query_id, query, gold, prediction}.
struct SampleData {
    Corpus corpus;
    std::vector<std::string> query_lines;
};
SampleData sample_pipeline_data(uint64_t seed, int docs = 50);

} // namespace hdgrag
