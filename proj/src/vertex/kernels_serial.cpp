#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels_common.hpp"
#include "nesy/vertex/kernels.hpp"

namespace nesy::vertex::serial {

using detail::squared_distance;

double median_heuristic_sigma(const SampleSet& pool) {
    detail::check_at_least_two(pool, "median heuristic");
    std::vector<double> dists;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) dists.push_back(std::sqrt(squared_distance(pool[i], pool[j])));
    }
    std::sort(dists.begin(), dists.end());
    auto mid = dists.size() / 2;
    double median = dists.size() % 2 ? dists[mid] : 0.5 * (dists[mid - 1] + dists[mid]);
    return detail::median_to_sigma(median);
}

double kme_eval(const SampleSet& sample, std::span<const double> point, double sigma) {
    detail::check_non_empty(sample, "kernel mean embedding");
    detail::check_dims(sample.dim(), point.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) acc += gaussian_kernel(sample[i], point, sigma);
    return acc / static_cast<double>(sample.size());
}

double mmd2_within(const SampleSet& x, double sigma) {
    detail::check_at_least_two(x, "within-sample term");
    const auto m = x.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) acc += gaussian_kernel(x[i], x[j], sigma);
        }
    }
    return acc / (static_cast<double>(m) * static_cast<double>(m - 1));
}

double mmd2_cross(const SampleSet& x, const SampleSet& y, double sigma) {
    detail::check_non_empty(x, "first");
    detail::check_non_empty(y, "second");
    detail::check_dims(x.dim(), y.dim());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) acc += gaussian_kernel(x[i], y[j], sigma);
    }
    return 2.0 * acc / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

double mmd2_full(const SampleSet& x, const SampleSet& y, double sigma) {
    detail::check_at_least_two(x, "MMD first sample");
    detail::check_at_least_two(y, "MMD second sample");
    return serial::mmd2_within(x, sigma) + serial::mmd2_within(y, sigma) - serial::mmd2_cross(x, y, sigma);
}

}  // namespace nesy::vertex::serial
