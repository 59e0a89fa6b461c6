#pragma once

#include <cmath>
#include <span>
#include <string>

#include "nesy/errors.hpp"
#include "nesy/vertex/sample_set.hpp"

namespace nesy::vertex::detail {

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double diff = x[k] - y[k];
        acc += diff * diff;
    }
    return acc;
}

inline void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("kernel bandwidth must be positive and finite");
}

inline void check_dims(std::size_t a, std::size_t b) {
    if (a != b) throw ArgumentError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

inline void check_non_empty(const SampleSet& s, const char* what) {
    if (s.empty()) throw ArgumentError(std::string(what) + " sample set is empty");
}

inline void check_at_least_two(const SampleSet& s, const char* what) {
    if (s.size() < 2) throw ArgumentError(std::string(what) + " needs at least 2 samples, got " + std::to_string(s.size()));
}

inline double median_to_sigma(double median) { return median > 0.0 ? median / std::sqrt(2.0) : 1.0; }

}  // namespace nesy::vertex::detail
