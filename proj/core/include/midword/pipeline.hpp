#pragma once

// Stage-wise orchestration: descriptor PCA -> universal GMM -> feature
// groups -> words -> codebook -> encodings. Fit stages only accept
// TrainingSet handles so evaluation data cannot leak into a fitted model.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "midword/alignment.hpp"
#include "midword/codebook.hpp"
#include "midword/config.hpp"
#include "midword/encoding.hpp"
#include "midword/words.hpp"

namespace midword {

template <typename T>
class TrainingSet {
 public:
  explicit TrainingSet(std::span<const T> items) : items_(items) {}
  std::span<const T> items() const { return items_; }

 private:
  std::span<const T> items_;
};

struct AlignmentModel {
  PcaProjection pca;
  SphericalGmm gmm;
  EmTrace trace;
};

/// Descriptor PCA and universal GMM over pooled training features.
AlignmentModel fit_alignment(const PipelineConfig& config, TrainingSet<DescriptorSet> train);

/// The K words of one video, in component order.
std::vector<MidLevelWord> build_words(const PipelineConfig& config, const AlignmentModel& model,
                                      const DescriptorSet& video);

/// Words for many videos, parallel over videos.
std::vector<std::vector<MidLevelWord>> build_words(const PipelineConfig& config,
                                                   const AlignmentModel& model,
                                                   std::span<const DescriptorSet> videos);

/// Karcher codebook (plus the word-embedding PCA for VLAD) or Riemannian GMM,
/// depending on the configured encoder.
struct CodebookModel {
  std::optional<KarcherCodebook> karcher;
  std::optional<PcaProjection> vlad_pca;
  std::optional<RiemannianGmm> gmm;
  /// k-means objective or EM log-likelihood per iteration.
  std::vector<double> trace;
};

CodebookModel fit_codebook(const PipelineConfig& config, TrainingSet<MidLevelWord> train_words);

EncodedVideo encode_video(const PipelineConfig& config, const CodebookModel& codebook,
                          std::span<const MidLevelWord> words);

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::uint64_t root_seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> stage_seeds;
  std::vector<std::pair<std::string, double>> stage_seconds;

  std::string to_json() const;
};

struct PipelineResult {
  std::vector<EncodedVideo> train;
  std::vector<EncodedVideo> test;
  RunManifest manifest;
  AlignmentModel alignment;
  CodebookModel codebook;
};

/// Runs every stage; models are fit on `train` only. Stage failures are
/// rethrown as StageError naming the stage.
PipelineResult run_pipeline(const PipelineConfig& config, std::span<const DescriptorSet> train,
                            std::span<const DescriptorSet> test);

inline constexpr std::string_view kAlignmentSeedLabel = "alignment-gmm";
inline constexpr std::string_view kCodebookSeedLabel = "codebook";

/// Accuracy of nearest-class-centroid classification (Euclidean). Ties go to
/// the lower label.
double nearest_centroid_eval(std::span<const Eigen::VectorXd> train, std::span<const int> train_labels,
                             std::span<const Eigen::VectorXd> test, std::span<const int> test_labels,
                             std::vector<int>* predictions = nullptr);

std::vector<Eigen::VectorXd> vectors_of(std::span<const EncodedVideo> encoded);

/// Baseline encoding: the mean descriptor of a video.
Eigen::VectorXd raw_mean_encoding(const DescriptorSet& video);

}  // namespace midword
