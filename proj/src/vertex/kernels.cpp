#include "nesy/vertex/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels_common.hpp"

namespace nesy::vertex {

using detail::squared_distance;

// The parallel loops write one partial sum per row and reduce those in row
// order afterwards, so results do not depend on the thread count.

double gaussian_kernel(std::span<const double> x, std::span<const double> y, double sigma) {
    detail::check_dims(x.size(), y.size());
    detail::check_sigma(sigma);
    return std::exp(-squared_distance(x, y) / (2.0 * sigma * sigma));
}

double median_heuristic_sigma(const SampleSet& pool) {
    detail::check_at_least_two(pool, "median heuristic");
    const auto n = static_cast<std::ptrdiff_t>(pool.size());
    std::vector<double> dists(static_cast<std::size_t>(n * (n - 1) / 2));
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        // offset of row i in the packed upper triangle
        auto base = static_cast<std::size_t>(i * (2 * n - i - 1) / 2);
        for (std::ptrdiff_t j = i + 1; j < n; ++j) {
            dists[base + static_cast<std::size_t>(j - i - 1)] =
                std::sqrt(squared_distance(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]));
        }
    }
    auto mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    double median = dists[mid];
    if (dists.size() % 2 == 0) {
        double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    return detail::median_to_sigma(median);
}

double kme_eval(const SampleSet& sample, std::span<const double> point, double sigma) {
    detail::check_non_empty(sample, "kernel mean embedding");
    detail::check_dims(sample.dim(), point.size());
    detail::check_sigma(sigma);
    const auto n = static_cast<std::ptrdiff_t>(sample.size());
    const double denom = 2.0 * sigma * sigma;
    std::vector<double> terms(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        terms[static_cast<std::size_t>(i)] = std::exp(-squared_distance(sample[static_cast<std::size_t>(i)], point) / denom);
    }
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc / static_cast<double>(n);
}

double mmd2_within(const SampleSet& x, double sigma) {
    detail::check_at_least_two(x, "within-sample term");
    detail::check_sigma(sigma);
    const auto m = static_cast<std::ptrdiff_t>(x.size());
    const double denom = 2.0 * sigma * sigma;
    std::vector<double> rows(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = i + 1; j < m; ++j) {
            acc += std::exp(-squared_distance(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]) / denom);
        }
        rows[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0.0;
    for (double r : rows) total += r;
    // each unordered pair counted once, the estimator sums ordered pairs
    return 2.0 * total / (static_cast<double>(m) * static_cast<double>(m - 1));
}

double mmd2_cross(const SampleSet& x, const SampleSet& y, double sigma) {
    detail::check_non_empty(x, "first");
    detail::check_non_empty(y, "second");
    detail::check_dims(x.dim(), y.dim());
    detail::check_sigma(sigma);
    const auto m = static_cast<std::ptrdiff_t>(x.size());
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    const double denom = 2.0 * sigma * sigma;
    std::vector<double> rows(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            acc += std::exp(-squared_distance(x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(j)]) / denom);
        }
        rows[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0.0;
    for (double r : rows) total += r;
    return 2.0 * total / (static_cast<double>(m) * static_cast<double>(n));
}

double mmd2_full(const SampleSet& x, const SampleSet& y, double sigma) {
    detail::check_at_least_two(x, "MMD first sample");
    detail::check_at_least_two(y, "MMD second sample");
    detail::check_dims(x.dim(), y.dim());
    return mmd2_within(x, sigma) + mmd2_within(y, sigma) - mmd2_cross(x, y, sigma);
}

}  // namespace nesy::vertex
