#pragma once

// Fixed-length video representations built from a video's K mid-level words.

#include <span>
#include <string>
#include <string_view>

#include "midword/codebook.hpp"

namespace midword {

enum class EncoderMethod { kBovw = 0, kVlad = 1, kFisher = 2 };

std::string_view encoder_name(EncoderMethod method);  // "bovw", "vlad", "fv"
EncoderMethod parse_encoder(std::string_view name);

struct EncodedVideo {
  std::string video_id;
  EncoderMethod method = EncoderMethod::kBovw;
  WordKind kind = WordKind::kCovariance;
  int codebook_size = 0;
  /// K for BoVW, D for VLAD and Fisher vectors.
  int block_size = 0;
  Eigen::VectorXd vector;
};

/// Row m holds the geodesic distances from codeword m to the K words,
/// divided by their sum; rows that sum to zero stay zero. Flattened row-major.
EncodedVideo encode_bovw(const KarcherCodebook& codebook, std::span<const MidLevelWord> words);

/// Unnormalized VLAD: residuals pca(embed(X)) - pca(embed(center)) summed per
/// nearest center (geodesic), concatenated. `centers_projected` holds the
/// projected centers, one row each.
Eigen::VectorXd vlad_accumulate(const KarcherCodebook& codebook, const PcaProjection& pca,
                                const Eigen::MatrixXd& centers_projected,
                                std::span<const MidLevelWord> words);

/// VLAD followed by global L2 normalization.
EncodedVideo encode_vlad(const KarcherCodebook& codebook, const PcaProjection& pca,
                         std::span<const MidLevelWord> words);

struct FisherOptions {
  /// Reproduce the printed variance block verbatim, without the "-1"
  /// centering term.
  bool strict_paper = false;
};

/// Raw Fisher vector (mean blocks for all components, then variance blocks)
/// from PCA-projected word rows, before normalization. When `posteriors` is
/// non-null it receives the K x M soft assignments.
Eigen::VectorXd fisher_scores(const RiemannianGmm& gmm, const Eigen::MatrixXd& projected,
                              const FisherOptions& options = {},
                              Eigen::MatrixXd* posteriors = nullptr);

/// Fisher vector followed by power and L2 normalization.
EncodedVideo encode_fisher(const RiemannianGmm& gmm, std::span<const MidLevelWord> words,
                           const FisherOptions& options = {});

/// sign(z) sqrt|z| elementwise, then division by the L2 norm. Zero stays zero.
Eigen::VectorXd power_l2_normalize(const Eigen::VectorXd& v);

/// Division by the L2 norm; zero stays zero.
Eigen::VectorXd l2_normalize(const Eigen::VectorXd& v);

}  // namespace midword
