#include "semb_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace hdgrag {

namespace {

static_assert(sizeof(float) == 4);

void put_u32(std::ofstream& out, uint32_t v) {
    const unsigned char b[4] = {
            static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
            static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(const unsigned char* b) {
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
            (uint32_t(b[3]) << 24);
}

} // namespace

void write_semb(const std::string& path, const EmbeddingMatrix& m) {
    HDGRAG_REQUIRE(
            m.data.size() == size_t(m.rows) * m.dim,
            ErrorCode::kDimensionMismatch,
            "matrix payload does not match rows*dim");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    HDGRAG_REQUIRE(out, ErrorCode::kIo, "cannot open for writing: " + path);
    out.write("SEMB", 4);
    put_u32(out, m.rows);
    put_u32(out, m.dim);
    for (float f : m.data) {
        put_u32(out, std::bit_cast<uint32_t>(f));
    }
    HDGRAG_REQUIRE(out.good(), ErrorCode::kIo, "write failed: " + path);
}

EmbeddingMatrix read_semb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    HDGRAG_REQUIRE(in, ErrorCode::kIo, "cannot open: " + path);
    std::vector<unsigned char> bytes(
            (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    HDGRAG_REQUIRE(
            bytes.size() >= 12 && std::memcmp(bytes.data(), "SEMB", 4) == 0,
            ErrorCode::kFormat,
            "bad SEMB header: " + path);
    EmbeddingMatrix m;
    m.rows = get_u32(bytes.data() + 4);
    m.dim = get_u32(bytes.data() + 8);
    const size_t n = size_t(m.rows) * m.dim;
    HDGRAG_REQUIRE(
            bytes.size() == 12 + 4 * n,
            ErrorCode::kFormat,
            "SEMB payload size mismatch: " + path);
    m.data.resize(n);
    for (size_t i = 0; i < n; ++i) {
        m.data[i] = std::bit_cast<float>(get_u32(bytes.data() + 12 + 4 * i));
    }
    return m;
}

EmbeddingMatrix to_matrix(const std::vector<std::vector<double>>& rows, uint32_t dim) {
    EmbeddingMatrix m;
    m.rows = static_cast<uint32_t>(rows.size());
    m.dim = dim;
    m.data.reserve(rows.size() * dim);
    for (const auto& r : rows) {
        HDGRAG_REQUIRE(r.size() == dim, ErrorCode::kDimensionMismatch, "row dimension mismatch");
        for (double v : r) {
            m.data.push_back(static_cast<float>(v));
        }
    }
    return m;
}

void write_ids(const std::string& path, const std::vector<std::string>& ids) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    HDGRAG_REQUIRE(out, ErrorCode::kIo, "cannot open for writing: " + path);
    for (const auto& id : ids) {
        HDGRAG_REQUIRE(
                id.find('\n') == std::string::npos,
                ErrorCode::kInvalidArgument,
                "id contains newline");
        out << id << '\n';
    }
}

std::vector<std::string> read_ids(const std::string& path) {
    std::ifstream in(path);
    HDGRAG_REQUIRE(in, ErrorCode::kIo, "cannot open: " + path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        ids.push_back(line);
    }
    return ids;
}

} // namespace hdgrag
