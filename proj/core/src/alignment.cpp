#include "midword/alignment.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "em.hpp"
#include "midword/error.hpp"

namespace midword {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void DescriptorSet::validate() const {
  if (features.rows() < 1 || features.cols() < 1) {
    throw Error(Errc::kInvalidInput, "video '" + video_id + "' has no features");
  }
  if (!features.allFinite()) {
    throw Error(Errc::kInvalidInput, "video '" + video_id + "' has non-finite entries");
  }
}

// ---------------------------------------------------------------------------

PcaProjection::PcaProjection(VectorXd mean, MatrixXd projection)
    : mean_(std::move(mean)), projection_(std::move(projection)) {
  if (projection_.rows() < 1 || projection_.rows() > projection_.cols() ||
      mean_.size() != projection_.cols()) {
    throw Error(Errc::kInvalidInput, "inconsistent PCA shapes");
  }
  const MatrixXd gram = projection_ * projection_.transpose();
  if ((gram - MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(Errc::kInvalidInput, "PCA rows are not orthonormal");
  }
}

VectorXd PcaProjection::apply(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != input_dim()) {
    throw Error(Errc::kDimensionMismatch, "PCA input has dim " + std::to_string(x.size()) +
                                              ", expected " + std::to_string(input_dim()));
  }
  return projection_ * (x - mean_);
}

MatrixXd PcaProjection::apply_rows(const MatrixXd& rows) const {
  if (rows.cols() != input_dim()) {
    throw Error(Errc::kDimensionMismatch, "PCA input has dim " + std::to_string(rows.cols()) +
                                              ", expected " + std::to_string(input_dim()));
  }
  return (rows.rowwise() - mean_.transpose()) * projection_.transpose();
}

PcaProjection fit_pca(const MatrixXd& samples, Eigen::Index output_dim) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (output_dim < 1 || output_dim > d) {
    throw Error(Errc::kInvalidInput, "PCA output dim " + std::to_string(output_dim) +
                                         " not in [1, " + std::to_string(d) + "]");
  }
  if (n < std::max<Eigen::Index>(2, output_dim)) {
    throw Error(Errc::kTooFewSamples, "PCA needs at least max(2, output_dim) samples");
  }
  if (!samples.allFinite()) throw Error(Errc::kInvalidInput, "PCA samples not finite");

  const VectorXd mean = samples.colwise().mean().transpose();
  const MatrixXd centered = samples.rowwise() - mean.transpose();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  MatrixXd proj(output_dim, d);
  for (Eigen::Index i = 0; i < output_dim; ++i) {
    VectorXd v = es.eigenvectors().col(d - 1 - i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    proj.row(i) = v.transpose();
  }
  return PcaProjection(mean, proj);
}

// ---------------------------------------------------------------------------

void SphericalGmm::validate() const {
  const Eigen::Index k = weights.size();
  if (k < 1 || means.rows() != k || variances.size() != k || means.cols() < 1) {
    throw Error(Errc::kInvalidInput, "inconsistent spherical GMM shapes");
  }
  if ((weights.array() <= 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-10) {
    throw Error(Errc::kInvalidInput, "GMM weights must be positive and sum to 1");
  }
  if ((variances.array() <= 0.0).any() || !means.allFinite()) {
    throw Error(Errc::kInvalidInput, "GMM variances must be positive");
  }
}

SphericalGmmFit fit_spherical_gmm(const MatrixXd& samples, int components,
                                  std::uint64_t seed, const EmOptions& options) {
  SphericalGmmFit fit;
  const auto params = detail::fit_mixture(samples, components, detail::CovShape::kSpherical,
                                          seed, options, &fit.trace);
  fit.model.weights = params.weights;
  fit.model.means = params.means;
  fit.model.variances = params.variances.col(0);
  return fit;
}

VectorXd component_log_probabilities(const SphericalGmm& gmm,
                                     const Eigen::Ref<const VectorXd>& f) {
  if (f.size() != gmm.dim()) {
    throw Error(Errc::kDimensionMismatch, "feature dim " + std::to_string(f.size()) +
                                              " vs GMM dim " + std::to_string(gmm.dim()));
  }
  const detail::MixtureParams p{gmm.weights, gmm.means, gmm.variances};
  VectorXd out;
  detail::log_joint(p, f, out);
  return out;
}

VectorXd component_probabilities(const SphericalGmm& gmm, const Eigen::Ref<const VectorXd>& f) {
  return component_log_probabilities(gmm, f).array().exp();
}

std::vector<FeatureGroup> build_feature_groups(const SphericalGmm& gmm,
                                               const DescriptorSet& video, int top_t,
                                               const GroupingOptions& options) {
  video.validate();
  if (video.dim() != gmm.dim()) {
    throw Error(Errc::kDimensionMismatch, "video '" + video.video_id + "' has dim " +
                                              std::to_string(video.dim()) + ", GMM has " +
                                              std::to_string(gmm.dim()));
  }
  if (top_t < 1) throw Error(Errc::kInvalidInput, "T must be positive");
  const auto L = static_cast<std::size_t>(video.size());
  const auto T = static_cast<std::size_t>(top_t);
  if (L < T && !options.pad_short_videos) {
    throw Error(Errc::kInsufficientFeatures, "video '" + video.video_id + "' has " +
                                                 std::to_string(L) + " features, T = " +
                                                 std::to_string(T));
  }

  const Eigen::Index k = gmm.components();
  const detail::MixtureParams params{gmm.weights, gmm.means, gmm.variances};
  MatrixXd logp(static_cast<Eigen::Index>(L), k);
  VectorXd lj;
  for (std::size_t l = 0; l < L; ++l) {
    const auto row = static_cast<Eigen::Index>(l);
    detail::log_joint(params, video.features.row(row).transpose(), lj);
    logp.row(row) = lj.transpose();
  }

  std::vector<FeatureGroup> groups;
  groups.reserve(static_cast<std::size_t>(k));
  std::vector<std::size_t> order(L);
  for (Eigen::Index c = 0; c < k; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto col = logp.col(c);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return col(static_cast<Eigen::Index>(a)) > col(static_cast<Eigen::Index>(b));
    });
    FeatureGroup g;
    g.video_id = video.video_id;
    g.component = static_cast<int>(c);
    g.members.resize(static_cast<Eigen::Index>(T), video.dim());
    g.log_probabilities.resize(static_cast<Eigen::Index>(T));
    g.feature_indices.resize(T);
    // Short videos repeat their best features; re-sorting keeps the
    // probabilities descending.
    std::vector<std::size_t> picked(T);
    for (std::size_t t = 0; t < T; ++t) picked[t] = order[t % L];
    std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
      const double pa = col(static_cast<Eigen::Index>(a));
      const double pb = col(static_cast<Eigen::Index>(b));
      return pa > pb || (pa == pb && a < b);
    });
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t src = picked[t];
      g.feature_indices[t] = src;
      g.members.row(static_cast<Eigen::Index>(t)) = video.features.row(static_cast<Eigen::Index>(src));
      g.log_probabilities(static_cast<Eigen::Index>(t)) = col(static_cast<Eigen::Index>(src));
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace midword
