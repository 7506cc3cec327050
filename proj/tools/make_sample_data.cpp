// Regenerates the bundled sample data under data/.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "corpus.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data";
    const auto sample = hdgrag::sample_pipeline_data(7, 50);
    std::ofstream corpus(dir + "/synthetic_50.jsonl");
    for (const auto& d : sample.corpus.documents()) corpus << hdgrag::document_to_json(d) << "\n";
    std::ofstream queries(dir + "/queries.jsonl");
    for (const auto& q : sample.query_lines) queries << q << "\n";

    hdgrag::Rng rng(11);
    std::ofstream distill(dir + "/distill_input.jsonl");
    for (int q = 0; q < 12; ++q) {
        nlohmann::json rec;
        char id[16];
        std::snprintf(id, sizeof id, "q%04d", q);
        rec["query_id"] = id;
        for (int i = 0; i < 6; ++i) {
            rec["scores"].push_back(std::round(rng.normal() * 1000.0) / 1000.0);
            rec["loglik"].push_back(std::round((-2.0 + rng.normal()) * 1000.0) / 1000.0);
        }
        distill << rec.dump() << "\n";
    }
    std::printf("wrote %s/{synthetic_50,queries,distill_input}.jsonl\n", dir.c_str());
    return 0;
}
