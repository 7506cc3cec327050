#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hdgrag {

/// Row-major float matrix as stored on disk.
struct EmbeddingMatrix {
    uint32_t rows = 0;
    uint32_t dim = 0;
    std::vector<float> data;

    const float* row(size_t i) const { return data.data() + i * dim; }
};

// Layout: "SEMB", u32 rows, u32 dim, rows*dim float32, all little-endian.
void write_semb(const std::string& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_semb(const std::string& path);

/// Builds a matrix from double rows, narrowing to float32.
EmbeddingMatrix to_matrix(const std::vector<std::vector<double>>& rows, uint32_t dim);

// Sidecar: one id per line, line i names row i.
void write_ids(const std::string& path, const std::vector<std::string>& ids);
std::vector<std::string> read_ids(const std::string& path);

} // namespace hdgrag
