#pragma once

// Mid-level words: statistical models of a feature group that live on a
// Riemannian manifold.

#include <string>
#include <string_view>
#include <variant>

#include "midword/alignment.hpp"
#include "midword/manifold.hpp"

namespace midword {

enum class WordKind { kSubspace = 0, kCovariance = 1, kGaussianSpd = 2 };

std::string_view word_kind_name(WordKind kind);  // "sub", "cov", "gau"
WordKind parse_word_kind(std::string_view name);

using ManifoldPoint = std::variant<GrassmannPoint, SymPosDef>;

struct WordProvenance {
  std::string video_id;
  int component = 0;
};

class MidLevelWord {
 public:
  MidLevelWord(WordKind kind, ManifoldPoint payload, WordProvenance provenance = {});

  WordKind kind() const { return kind_; }
  const ManifoldPoint& payload() const { return payload_; }
  const WordProvenance& provenance() const { return provenance_; }

  bool is_subspace() const { return kind_ == WordKind::kSubspace; }
  const GrassmannPoint& subspace() const { return std::get<GrassmannPoint>(payload_); }
  const SymPosDef& spd() const { return std::get<SymPosDef>(payload_); }

  /// Rows and columns of the payload matrix.
  Eigen::Index rows() const;
  Eigen::Index cols() const;

 private:
  WordKind kind_;
  ManifoldPoint payload_;
  WordProvenance provenance_;
};

inline constexpr int kDefaultSubspaceDim = 5;
inline constexpr double kCovarianceRegularization = 1e-4;
inline constexpr double kConstantGroupFloor = 1e-8;

/// Sample covariance (1/(T-1) scatter) plus 1e-4 * tr(C)/d * I, or 1e-8 * I
/// when the group is constant.
Eigen::MatrixXd regularized_covariance(const Eigen::MatrixXd& members);

/// Embeds N(mu, sigma) as |sigma|^{-1/(d+1)} [[sigma + mu mu^T, mu], [mu^T, 1]].
SymPosDef gaussian_embedding(const Eigen::VectorXd& mu, const SymPosDef& sigma);

/// Span of the r leading eigenvectors of the group's scatter matrix.
MidLevelWord model_subspace(const FeatureGroup& group, int r = kDefaultSubspaceDim);
MidLevelWord model_covariance(const FeatureGroup& group);
MidLevelWord model_gaussian_spd(const FeatureGroup& group);

MidLevelWord model_word(const FeatureGroup& group, WordKind kind,
                        int r = kDefaultSubspaceDim);

/// Geodesic distance between two words of the same kind and shape.
double word_distance(const MidLevelWord& a, const MidLevelWord& b);

/// Throws kKindMismatch / kDimensionMismatch unless a and b are compatible.
void require_compatible(const MidLevelWord& a, const MidLevelWord& b);

}  // namespace midword
