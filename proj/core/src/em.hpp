#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "midword/mixture.hpp"

namespace midword::detail {

enum class CovShape { kSpherical, kDiagonal };

// Mixture with per-component spherical (variances K x 1) or diagonal
// (variances K x D) covariances.
struct MixtureParams {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  Eigen::MatrixXd variances;
};

// log(w_k) + log N(x | mu_k, Sigma_k) for every component.
void log_joint(const MixtureParams& p, const Eigen::Ref<const Eigen::VectorXd>& x,
               Eigen::VectorXd& out);

double log_sum_exp(const Eigen::VectorXd& v);

// EM from k-means++ seeded initialization. Rows of `data` are samples.
MixtureParams fit_mixture(const Eigen::MatrixXd& data, int components, CovShape shape,
                          std::uint64_t seed, const EmOptions& options,
                          EmTrace* trace);

}  // namespace midword::detail
