#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>

#include "midword/codebook.hpp"
#include "midword/encoding.hpp"
#include "midword/mixture.hpp"
#include "midword/words.hpp"

namespace midword {

inline constexpr int kConfigVersion = 1;

struct PipelineConfig {
  /// Raw descriptor dimension; 0 means "take it from the data".
  int descriptor_dim = 0;
  /// Descriptor PCA keeps round(d * pca_factor) dimensions.
  double pca_factor = 0.5;
  /// Universal GMM components K.
  int gmm_components = 256;
  /// Features per group T.
  int top_t = 64;
  WordKind word_kind = WordKind::kCovariance;
  int subspace_r = kDefaultSubspaceDim;
  /// Codebook size M; 0 selects 64 for BoVW and 32 for VLAD / Fisher vectors.
  int codebook_size = 0;
  /// Reduced word-embedding dimension D for VLAD and Fisher vectors.
  int embedding_dim = 256;
  EncoderMethod encoder = EncoderMethod::kFisher;
  std::uint64_t seed = 0;
  /// Worker threads; 0 uses the hardware concurrency. Never changes results.
  unsigned workers = 0;
  bool strict_paper_fv = false;
  bool pad_short_videos = false;
  EmOptions em;
  KarcherOptions karcher;
  int kmeans_max_iter = 100;
  CenterInit center_init = CenterInit::kPlusPlus;

  /// Full-scale defaults (K=256, T=64, D=256, M=32/64, PCA factor 0.5).
  static PipelineConfig paper();
  /// Small defaults for synthetic data (d=8, K=16, T=16, M=4, D=16).
  static PipelineConfig desk();

  int effective_codebook_size() const;
  Eigen::Index reduced_descriptor_dim(Eigen::Index raw_dim) const;
  /// Length of the word embedding for the configured kind.
  Eigen::Index word_embedding_dim(Eigen::Index raw_dim) const;

  /// Throws kConfig when the settings are inconsistent for raw_dim.
  void validate(Eigen::Index raw_dim) const;
};

std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

/// Stable hash of every setting that can influence results (workers excluded).
std::uint64_t config_hash(const PipelineConfig& config);

}  // namespace midword
