#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"

namespace hdgrag {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    HDGRAG_REQUIRE(a.size() == b.size(), ErrorCode::kDimensionMismatch, "dot: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double l2_norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline Vector concat(std::span<const double> a, std::span<const double> b) {
    Vector out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace hdgrag
