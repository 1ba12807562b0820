#pragma once

// Synthetic descriptor sets standing in for dense video descriptors.

#include <cstdint>
#include <span>
#include <vector>

#include "midword/alignment.hpp"

namespace midword {

struct SyntheticSpec {
  int class_count = 4;
  int videos_per_class = 20;
  int features_per_video = 200;
  int dim = 8;
  /// Gaussian clusters per class mixture.
  int clusters_per_class = 3;
  /// Standard deviation of cluster centers around the origin.
  double mean_spread = 4.0;
  /// Ratio of largest to smallest cluster covariance eigenvalue.
  double anisotropy = 20.0;
  /// Largest cluster covariance eigenvalue.
  double cluster_scale = 1.0;
  /// Per-video standard deviation of cluster-center jitter.
  double video_jitter = 0.1;
  /// When set, every class uses the same cluster centers, so classes differ
  /// only in covariance orientation.
  bool shared_means = false;
  std::uint64_t seed = 1;

  void validate() const;
};

struct LabeledVideo {
  DescriptorSet descriptors;
  int label = 0;
};

/// Deterministic for a given spec. Feature values are rounded to float so
/// they survive the 32-bit descriptor file format unchanged.
std::vector<LabeledVideo> generate_synthetic(const SyntheticSpec& spec);

struct LabeledSplit {
  std::vector<LabeledVideo> train;
  std::vector<LabeledVideo> test;
};

/// The first round(fraction * n_c) videos of each class go to train.
LabeledSplit split_per_class(std::span<const LabeledVideo> videos, double train_fraction);

std::vector<DescriptorSet> descriptors_of(std::span<const LabeledVideo> videos);
std::vector<int> labels_of(std::span<const LabeledVideo> videos);

}  // namespace midword
