#pragma once

#include <span>

#include "nesy/vertex/sample_set.hpp"

namespace nesy::vertex {

/// exp(-||x - y||^2 / (2 sigma^2))
double gaussian_kernel(std::span<const double> x, std::span<const double> y, double sigma);

/// Median pairwise distance of the pool divided by sqrt(2); 1.0 when the
/// median is zero. Needs at least two samples.
double median_heuristic_sigma(const SampleSet& pool);

/// Kernel mean embedding of `sample` evaluated at `point`.
double kme_eval(const SampleSet& sample, std::span<const double> point, double sigma);

/// 1/(m(m-1)) sum_{i != j} k(x_i, x_j). Needs m >= 2.
double mmd2_within(const SampleSet& x, double sigma);

/// 2/(mn) sum_{i,j} k(x_i, y_j): the cross-term similarity.
double mmd2_cross(const SampleSet& x, const SampleSet& y, double sigma);

/// Unbiased MMD^2 estimate; may be negative.
double mmd2_full(const SampleSet& x, const SampleSet& y, double sigma);

/// Single-threaded reference implementations of the kernels above. Same
/// contracts; kept for testing and benchmarking the parallel versions.
namespace serial {
double median_heuristic_sigma(const SampleSet& pool);
double kme_eval(const SampleSet& sample, std::span<const double> point, double sigma);
double mmd2_within(const SampleSet& x, double sigma);
double mmd2_cross(const SampleSet& x, const SampleSet& y, double sigma);
double mmd2_full(const SampleSet& x, const SampleSet& y, double sigma);
}  // namespace serial

}  // namespace nesy::vertex
