#pragma once

// Intrinsic Riemannian codebooks over mid-level words: Karcher means,
// K-Karcher-means clustering, and a diagonal GMM fit on the vector-space
// embedding of the words followed by PCA.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "midword/alignment.hpp"
#include "midword/mixture.hpp"
#include "midword/words.hpp"

namespace midword {

struct KarcherOptions {
  int max_iter = 50;
  /// Stop once the squared norm of the mean tangent vector drops below tol.
  double tol = 1e-10;
};

struct KarcherStats {
  int iterations = 0;
  /// Norm of the mean tangent vector at the returned point.
  double residual = 0.0;
  bool converged = false;
  /// True when the Grassmann cut locus forced a restart from the
  /// embedding-space mean.
  bool restarted = false;
};

/// Fixed-point iteration X <- exp_X(mean_i log_X(X_i)) with unit step,
/// starting from `init` or the first point.
SymPosDef karcher_mean(std::span<const SymPosDef> points, const KarcherOptions& options = {},
                       const SymPosDef* init = nullptr, KarcherStats* stats = nullptr);
GrassmannPoint karcher_mean(std::span<const GrassmannPoint> points,
                            const KarcherOptions& options = {},
                            const GrassmannPoint* init = nullptr,
                            KarcherStats* stats = nullptr);
/// Word-level dispatch; every word must share kind and shape.
MidLevelWord karcher_mean(std::span<const MidLevelWord> words,
                          const KarcherOptions& options = {},
                          const MidLevelWord* init = nullptr, KarcherStats* stats = nullptr);

/// Principal subspace of the averaged projection matrices.
GrassmannPoint projection_mean(std::span<const GrassmannPoint> points);

struct KarcherCodebook {
  WordKind kind = WordKind::kCovariance;
  std::vector<MidLevelWord> centers;

  std::size_t size() const { return centers.size(); }
};

enum class CenterInit { kPlusPlus, kRandom };

struct KMeansOptions {
  int max_iter = 100;
  CenterInit init = CenterInit::kPlusPlus;
  KarcherOptions karcher;
  unsigned workers = 0;
};

struct KarcherClustering {
  KarcherCodebook codebook;
  std::vector<int> assignment;
  /// Sum of squared geodesic distances after each assignment step.
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

KarcherClustering k_karcher_means(std::span<const MidLevelWord> words, int centers,
                                  std::uint64_t seed, const KMeansOptions& options = {});

/// Nearest center by geodesic distance; ties go to the lower index.
int nearest_center(const KarcherCodebook& codebook, const MidLevelWord& word,
                   double* distance = nullptr);

/// Vector-space image of a word: projection embedding for subspaces, log at
/// the identity for SPD kinds.
Eigen::VectorXd embed_word(const MidLevelWord& word);
/// One row per word; throws kKindMismatch on mixed kinds.
Eigen::MatrixXd embed_words(std::span<const MidLevelWord> words);

/// Diagonal-covariance GMM over PCA-reduced word embeddings.
struct RiemannianGmm {
  WordKind kind = WordKind::kCovariance;
  Eigen::Index word_rows = 0;
  Eigen::Index word_cols = 0;
  PcaProjection pca;
  Eigen::VectorXd weights;    // M
  Eigen::MatrixXd means;      // M x D
  Eigen::MatrixXd variances;  // M x D

  Eigen::Index components() const { return weights.size(); }
  Eigen::Index dim() const { return means.cols(); }

  void validate() const;
  /// PCA-projected embeddings of the words, one row each.
  Eigen::MatrixXd project(std::span<const MidLevelWord> words) const;
};

struct RiemannianGmmFit {
  RiemannianGmm model;
  EmTrace trace;
};

RiemannianGmmFit fit_riemannian_gmm(std::span<const MidLevelWord> words, int components,
                                    Eigen::Index reduced_dim, std::uint64_t seed,
                                    const EmOptions& options = {});

/// Soft assignments gamma_k(m) for projected rows; each row sums to 1.
Eigen::MatrixXd gmm_posteriors(const RiemannianGmm& gmm, const Eigen::MatrixXd& projected);

/// Total log-likelihood of projected rows under the mixture.
double gmm_log_likelihood(const RiemannianGmm& gmm, const Eigen::MatrixXd& projected);

}  // namespace midword
