#include "synthetic.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "rng.hpp"

namespace hdgrag {

namespace {

std::string word(Rng& rng, int vocab) {
    return "w" + std::to_string(rng.below(static_cast<uint64_t>(vocab)));
}

std::string words(Rng& rng, int n, int vocab) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += word(rng, vocab);
    }
    return out;
}

std::string padded(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04d", prefix, i);
    return buf;
}

} // namespace

PlantedCorpus planted_block_corpus(const PlantedBlockConfig& cfg) {
    Rng rng(cfg.seed);
    PlantedCorpus out;
    // Random doc ids so that id order does not reveal blocks.
    std::vector<int> perm(cfg.papers);
    for (int i = 0; i < cfg.papers; ++i) perm[i] = i;
    rng.shuffle(perm);

    std::vector<std::vector<int>> members(cfg.blocks);
    for (int i = 0; i < cfg.papers; ++i) {
        members[i % cfg.blocks].push_back(i);
    }
    auto doc_id = [&](int i) { return padded("p", perm[i]); };
    auto pick_in = [&](int block, int count) {
        // Entities are partitioned across blocks by index modulo.
        int k;
        do {
            k = static_cast<int>(rng.below(static_cast<uint64_t>(count)));
        } while (k % cfg.blocks != block);
        return k;
    };

    std::vector<std::vector<int>> authors_of(cfg.papers);
    std::map<int, std::vector<int>> papers_of_author;
    const int per_paper = std::min(cfg.authors_per_paper, cfg.authors / cfg.blocks);
    for (int i = 0; i < cfg.papers; ++i) {
        std::set<int> authors;
        while (static_cast<int>(authors.size()) < per_paper) {
            authors.insert(pick_in(i % cfg.blocks, cfg.authors));
        }
        authors_of[i].assign(authors.begin(), authors.end());
        for (int a : authors) papers_of_author[a].push_back(i);
    }

    for (int i = 0; i < cfg.papers; ++i) {
        const int block = i % cfg.blocks;
        Document d;
        d.doc_id = doc_id(i);
        d.title = words(rng, 6, 500);
        d.body = words(rng, cfg.body_words, 500);
        d.domain = "synthetic";
        for (int a : authors_of[i]) d.authors.push_back(padded("a", a));
        d.venue = padded("v", pick_in(block, cfg.venues));

        std::vector<int> coauthored;
        for (int a : authors_of[i]) {
            for (int j : papers_of_author[a]) {
                if (j != i) coauthored.push_back(j);
            }
        }
        std::set<std::string> cites;
        const auto& mine = members[block];
        const int target = std::min<int>(cfg.intra_cites, static_cast<int>(mine.size()) - 1);
        while (static_cast<int>(cites.size()) < target) {
            const bool near = !coauthored.empty() && rng.uniform() < cfg.coauthor_cite_p;
            const int j = near ? coauthored[rng.below(coauthored.size())] : mine[rng.below(mine.size())];
            if (j != i) cites.insert(doc_id(j));
        }
        if (cfg.blocks > 1 && rng.uniform() < cfg.inter_cite_p) {
            const int other = (block + 1 + static_cast<int>(rng.below(cfg.blocks - 1))) % cfg.blocks;
            cites.insert(doc_id(members[other][rng.below(members[other].size())]));
        }
        d.cited_ids.assign(cites.begin(), cites.end());
        out.block_of[d.doc_id] = block;
        out.corpus.add(std::move(d));
    }
    return out;
}

AmbiguousCorpus ambiguous_cluster_corpus(uint64_t seed, int docs_per_cluster) {
    PlantedBlockConfig cfg;
    cfg.papers = 2 * docs_per_cluster;
    cfg.authors = 24;
    cfg.venues = 6;
    cfg.intra_cites = 10;
    cfg.inter_cite_p = 0.02;
    cfg.coauthor_cite_p = 0.0;
    cfg.seed = seed;
    cfg.body_words = 0;
    auto planted = planted_block_corpus(cfg);

    Rng rng(seed ^ 0x5eedULL);
    const std::string shared = "graph retrieval passage structure";
    AmbiguousCorpus out;
    out.query = shared;
    for (const auto& src : planted.corpus.documents()) {
        Document d = src;
        d.body = shared + " " + words(rng, 12, 2000);
        out.cluster_of[d.doc_id] = planted.block_of.at(d.doc_id);
        out.corpus.add(std::move(d));
    }
    return out;
}

Corpus random_metadata_corpus(uint64_t seed, int docs) {
    Rng rng(seed);
    Corpus c;
    for (int i = 0; i < docs; ++i) {
        Document d;
        d.doc_id = padded("d", i);
        d.title = words(rng, 4, 50);
        d.body = words(rng, 10, 50);
        d.domain = rng.uniform() < 0.5 ? "physics" : "biology";
        const int n_topics = static_cast<int>(rng.below(3));
        for (int k = 0; k < n_topics; ++k) {
            d.topics.push_back(padded("t", static_cast<int>(rng.below(5))));
        }
        if (rng.uniform() < 0.7) {
            d.venue = padded("v", static_cast<int>(rng.below(4)));
        }
        const int n_inst = static_cast<int>(rng.below(3));
        for (int k = 0; k < n_inst; ++k) {
            d.institutions.push_back(padded("i", static_cast<int>(rng.below(6))));
        }
        const int n_auth = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < n_auth; ++k) {
            d.authors.push_back(padded("a", static_cast<int>(rng.below(8))));
        }
        std::sort(d.authors.begin(), d.authors.end());
        d.authors.erase(std::unique(d.authors.begin(), d.authors.end()), d.authors.end());
        const int n_cites = static_cast<int>(rng.below(4));
        std::set<std::string> cites;
        for (int k = 0; k < n_cites; ++k) {
            // Some targets fall outside the corpus on purpose.
            const int j = static_cast<int>(rng.below(static_cast<uint64_t>(docs + 5)));
            if (j != i) cites.insert(padded("d", j));
        }
        d.cited_ids.assign(cites.begin(), cites.end());
        c.add(std::move(d));
    }
    return c;
}

SampleData sample_pipeline_data(uint64_t seed, int docs) {
    Rng rng(seed);
    static const std::vector<std::string> fields = {"physics", "biology", "chemistry"};
    static const std::vector<std::vector<std::string>> field_terms = {
            {"quantum", "lattice", "boson", "spin", "entropy", "photon"},
            {"protein", "genome", "cell", "enzyme", "neuron", "species"},
            {"catalyst", "polymer", "molecule", "bond", "reaction", "solvent"},
    };
    SampleData out;
    for (int i = 0; i < docs; ++i) {
        const int f = i % 3;
        const auto& terms = field_terms[f];
        Document d;
        d.doc_id = padded("doc", i);
        d.domain = fields[f];
        d.title = terms[rng.below(terms.size())] + " " + terms[rng.below(terms.size())] + " study " +
                std::to_string(i);
        std::string body;
        const int n_words = 60 + static_cast<int>(rng.below(180));
        for (int k = 0; k < n_words; ++k) {
            if (k) body += ' ';
            body += rng.uniform() < 0.3 ? terms[rng.below(terms.size())] : word(rng, 300);
        }
        d.body = body;
        d.authors = {padded("author", f * 10 + static_cast<int>(rng.below(6)))};
        if (rng.uniform() < 0.5) {
            d.authors.push_back(padded("author", static_cast<int>(rng.below(30))));
        }
        std::sort(d.authors.begin(), d.authors.end());
        d.authors.erase(std::unique(d.authors.begin(), d.authors.end()), d.authors.end());
        d.venue = padded("venue", f * 3 + static_cast<int>(rng.below(3)));
        d.institutions = {padded("inst", static_cast<int>(rng.below(8)))};
        d.topics = {fields[f]};
        std::set<std::string> cites;
        for (int k = 0; k < 3 && i >= 3; ++k) {
            const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i)));
            if (j % 3 == f || rng.uniform() < 0.2) cites.insert(padded("doc", j));
        }
        d.cited_ids.assign(cites.begin(), cites.end());
        out.corpus.add(std::move(d));
    }
    for (int q = 0; q < 12; ++q) {
        const int f = q % 3;
        const auto& terms = field_terms[f];
        const std::string query =
                terms[rng.below(terms.size())] + " " + terms[rng.below(terms.size())] + " findings";
        // Predictions mimic an imperfect reader: right two times in three.
        const std::string gold = fields[f];
        const std::string pred = (q % 3 == 2) ? fields[(f + 1) % 3] : gold;
        nlohmann::json rec = {
                {"query_id", padded("q", q)}, {"query", query}, {"gold", gold}, {"prediction", pred}};
        out.query_lines.push_back(rec.dump());
    }
    return out;
}

} // namespace hdgrag
