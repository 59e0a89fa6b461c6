#pragma once

#include <Eigen/Dense>

#include "nesy/vertex/sample_set.hpp"

namespace nesy::vertex {

/// Mean and covariance of a Gaussian. Used as a closed-form reference for
/// the sample-based estimators; the production score does not depend on it.
struct GaussianMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    /// Throws ArgumentError when the covariance is not square, not symmetric
    /// within 1e-12, or has an eigenvalue below -1e-10.
    void validate() const;

    /// Sample mean and unbiased covariance (needs >= 2 samples).
    static GaussianMoments from_samples(const SampleSet& samples);
};

/// Squared Fréchet distance between two Gaussians:
/// |mu1 - mu2|^2 + Tr(C1 + C2 - 2 (C1 C2)^{1/2}).
double frechet_gaussian(const GaussianMoments& p, const GaussianMoments& q);

}  // namespace nesy::vertex
