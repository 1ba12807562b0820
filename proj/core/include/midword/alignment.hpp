#pragma once

// Global alignment: a universal spherical GMM over pooled low-level features,
// and the decomposition of each video into K feature groups, one per
// component, holding the T features that component explains best.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "midword/mixture.hpp"

namespace midword {

/// One video's bag of local descriptors; row l is feature f_l.
struct DescriptorSet {
  std::string video_id;
  Eigen::MatrixXd features;

  Eigen::Index dim() const { return features.cols(); }
  Eigen::Index size() const { return features.rows(); }

  /// Throws kInvalidInput unless L >= 1, d >= 1 and all entries are finite.
  void validate() const;
};

class PcaProjection {
 public:
  PcaProjection() = default;
  PcaProjection(Eigen::VectorXd mean, Eigen::MatrixXd projection);

  Eigen::Index input_dim() const { return projection_.cols(); }
  Eigen::Index output_dim() const { return projection_.rows(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// output_dim x input_dim, orthonormal rows.
  const Eigen::MatrixXd& projection() const { return projection_; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Projects every row.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd projection_;
};

/// Principal directions of the centered rows, largest variance first. Each
/// row's largest-magnitude entry is made positive.
PcaProjection fit_pca(const Eigen::MatrixXd& samples, Eigen::Index output_dim);

/// Mixture of K spherical Gaussians w_k N(mu_k, sigma_k^2 I).
struct SphericalGmm {
  Eigen::VectorXd weights;    // K
  Eigen::MatrixXd means;      // K x d
  Eigen::VectorXd variances;  // K

  Eigen::Index components() const { return weights.size(); }
  Eigen::Index dim() const { return means.cols(); }

  void validate() const;
};

struct SphericalGmmFit {
  SphericalGmm model;
  EmTrace trace;
};

/// EM from seeded k-means++ initialization on pooled samples (rows).
/// Requires at least 10 * components samples.
SphericalGmmFit fit_spherical_gmm(const Eigen::MatrixXd& samples, int components,
                                  std::uint64_t seed, const EmOptions& options = {});

/// log(w_k) + log N(f | mu_k, sigma_k^2 I) for each k.
Eigen::VectorXd component_log_probabilities(const SphericalGmm& gmm,
                                            const Eigen::Ref<const Eigen::VectorXd>& f);

/// p_k(f) = w_k N(f | mu_k, sigma_k^2 I), exponentiated from log space. May
/// underflow to zero in high dimension; ranking uses the log values.
Eigen::VectorXd component_probabilities(const SphericalGmm& gmm,
                                        const Eigen::Ref<const Eigen::VectorXd>& f);

/// The T features of one video with the highest p_k for a component k.
struct FeatureGroup {
  std::string video_id;
  int component = 0;
  Eigen::MatrixXd members;              // T x d, best first
  Eigen::VectorXd log_probabilities;    // T, descending
  std::vector<std::size_t> feature_indices;

  Eigen::Index size() const { return members.rows(); }
};

struct GroupingOptions {
  /// When a video has fewer than T features, repeat its best features
  /// instead of failing with kInsufficientFeatures.
  bool pad_short_videos = false;
};

/// One group per GMM component. Ties in p_k are broken by lower feature
/// index. A feature may belong to several groups.
std::vector<FeatureGroup> build_feature_groups(const SphericalGmm& gmm,
                                               const DescriptorSet& video, int top_t,
                                               const GroupingOptions& options = {});

}  // namespace midword
