#include "nesy/vertex/frechet.hpp"

#include <algorithm>
#include <cmath>

#include "nesy/errors.hpp"

namespace nesy::vertex {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kEigenTolerance = -1e-10;

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void GaussianMoments::validate() const {
    const auto d = mean.size();
    if (covariance.rows() != d || covariance.cols() != d) {
        throw ArgumentError("covariance must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (!mean.allFinite() || !covariance.allFinite()) throw ArgumentError("moments must be finite");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
        throw ArgumentError("covariance is not symmetric");
    }
    if (d == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < kEigenTolerance) {
        throw ArgumentError("covariance is not positive semidefinite");
    }
}

GaussianMoments GaussianMoments::from_samples(const SampleSet& samples) {
    if (samples.size() < 2) throw ArgumentError("moments need at least 2 samples");
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = static_cast<Eigen::Index>(samples.dim());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(samples.data().data(), n, d);
    GaussianMoments out;
    out.mean = x.colwise().mean().transpose();
    Eigen::MatrixXd centered = x.rowwise() - out.mean.transpose();
    out.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    // make exactly symmetric so validate() is not tripped by rounding
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

double frechet_gaussian(const GaussianMoments& p, const GaussianMoments& q) {
    p.validate();
    q.validate();
    if (p.mean.size() != q.mean.size()) throw ArgumentError("moment dimensions differ");
    const double mean_term = (p.mean - q.mean).squaredNorm();
    // Tr((C1 C2)^{1/2}) equals the trace of the PSD square root of
    // sqrt(C1) C2 sqrt(C1), which stays symmetric.
    Eigen::MatrixXd s1 = psd_sqrt(p.covariance);
    Eigen::MatrixXd inner = s1 * q.covariance * s1;
    inner = 0.5 * (inner + inner.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
    const double cross = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double d2 = mean_term + p.covariance.trace() + q.covariance.trace() - 2.0 * cross;
    return std::max(d2, 0.0);
}

}  // namespace nesy::vertex
