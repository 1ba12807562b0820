#include "midword/words.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "midword/error.hpp"

namespace midword {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double spd_log_det(const MatrixXd& a) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::kNotPositiveDefinite, "Cholesky factorization failed");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

void require_group(const FeatureGroup& group, Eigen::Index min_size) {
  if (group.members.rows() < min_size) {
    throw Error(Errc::kInvalidInput, "feature group needs at least " +
                                         std::to_string(min_size) + " members");
  }
  if (!group.members.allFinite()) {
    throw Error(Errc::kInvalidInput, "feature group has non-finite entries");
  }
}

WordProvenance provenance_of(const FeatureGroup& group) {
  return {group.video_id, group.component};
}

}  // namespace

std::string_view word_kind_name(WordKind kind) {
  switch (kind) {
    case WordKind::kSubspace: return "sub";
    case WordKind::kCovariance: return "cov";
    case WordKind::kGaussianSpd: return "gau";
  }
  return "?";
}

WordKind parse_word_kind(std::string_view name) {
  if (name == "sub") return WordKind::kSubspace;
  if (name == "cov") return WordKind::kCovariance;
  if (name == "gau") return WordKind::kGaussianSpd;
  throw Error(Errc::kConfig, "unknown word kind '" + std::string(name) + "'");
}

MidLevelWord::MidLevelWord(WordKind kind, ManifoldPoint payload, WordProvenance provenance)
    : kind_(kind), payload_(std::move(payload)), provenance_(std::move(provenance)) {
  const bool subspace_payload = std::holds_alternative<GrassmannPoint>(payload_);
  if (subspace_payload != (kind_ == WordKind::kSubspace)) {
    throw Error(Errc::kKindMismatch, "payload does not match word kind");
  }
  if (kind_ == WordKind::kGaussianSpd) {
    const double log_det = spd_log_det(spd().matrix());
    if (std::abs(std::expm1(log_det)) > 1e-6) {
      throw Error(Errc::kInvalidInput, "Gaussian word determinant is not 1");
    }
  }
}

Eigen::Index MidLevelWord::rows() const {
  return is_subspace() ? subspace().ambient_dim() : spd().dim();
}

Eigen::Index MidLevelWord::cols() const {
  return is_subspace() ? subspace().subspace_dim() : spd().dim();
}

MatrixXd regularized_covariance(const MatrixXd& members) {
  const Eigen::Index t = members.rows();
  const Eigen::Index d = members.cols();
  if (t < 2) throw Error(Errc::kInvalidInput, "covariance needs T >= 2");
  const VectorXd mean = members.colwise().mean().transpose();
  const MatrixXd centered = members.rowwise() - mean.transpose();
  MatrixXd c = centered.transpose() * centered / static_cast<double>(t - 1);
  c = (0.5 * (c + c.transpose())).eval();
  const double trace = c.trace();
  if (trace > 0.0) {
    c.diagonal().array() += kCovarianceRegularization * trace / static_cast<double>(d);
  } else {
    c.diagonal().array() += kConstantGroupFloor;
  }
  return c;
}

SymPosDef gaussian_embedding(const VectorXd& mu, const SymPosDef& sigma) {
  const Eigen::Index d = sigma.dim();
  if (mu.size() != d) {
    throw Error(Errc::kDimensionMismatch, "mean and covariance dims differ");
  }
  const double scale = std::exp(-spd_log_det(sigma.matrix()) / static_cast<double>(d + 1));
  MatrixXd g(d + 1, d + 1);
  g.topLeftCorner(d, d) = sigma.matrix() + mu * mu.transpose();
  g.topRightCorner(d, 1) = mu;
  g.bottomLeftCorner(1, d) = mu.transpose();
  g(d, d) = 1.0;
  return SymPosDef(scale * g);
}

MidLevelWord model_subspace(const FeatureGroup& group, int r) {
  require_group(group, 2);
  const Eigen::Index t = group.members.rows();
  const Eigen::Index d = group.members.cols();
  if (r < 1 || r >= d || r >= t) {
    throw Error(Errc::kInvalidInput, "subspace dim r = " + std::to_string(r) +
                                         " must satisfy 0 < r < min(d, T)");
  }
  const VectorXd mean = group.members.colwise().mean().transpose();
  const MatrixXd centered = group.members.rowwise() - mean.transpose();
  Eigen::JacobiSVD<MatrixXd> svd(centered, Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  if (!(s(0) > 0.0) || !(s(r - 1) > 1e-10 * s(0))) {
    throw Error(Errc::kRankDeficient, "group has rank below r = " + std::to_string(r));
  }
  MatrixXd basis = svd.matrixV().leftCols(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) *= -1.0;
  }
  return MidLevelWord(WordKind::kSubspace, GrassmannPoint(basis), provenance_of(group));
}

MidLevelWord model_covariance(const FeatureGroup& group) {
  require_group(group, 2);
  return MidLevelWord(WordKind::kCovariance, SymPosDef(regularized_covariance(group.members)),
                      provenance_of(group));
}

MidLevelWord model_gaussian_spd(const FeatureGroup& group) {
  require_group(group, 2);
  const VectorXd mu = group.members.colwise().mean().transpose();
  const SymPosDef sigma(regularized_covariance(group.members));
  return MidLevelWord(WordKind::kGaussianSpd, gaussian_embedding(mu, sigma),
                      provenance_of(group));
}

MidLevelWord model_word(const FeatureGroup& group, WordKind kind, int r) {
  switch (kind) {
    case WordKind::kSubspace: return model_subspace(group, r);
    case WordKind::kCovariance: return model_covariance(group);
    case WordKind::kGaussianSpd: return model_gaussian_spd(group);
  }
  throw Error(Errc::kInvalidInput, "unknown word kind");
}

void require_compatible(const MidLevelWord& a, const MidLevelWord& b) {
  if (a.kind() != b.kind()) {
    throw Error(Errc::kKindMismatch, std::string("word kinds ") +
                                         std::string(word_kind_name(a.kind())) + " and " +
                                         std::string(word_kind_name(b.kind())));
  }
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::kDimensionMismatch, "word shapes differ");
  }
}

double word_distance(const MidLevelWord& a, const MidLevelWord& b) {
  require_compatible(a, b);
  if (a.is_subspace()) return grassmann_geodesic_dist(a.subspace(), b.subspace());
  return spd_geodesic_dist(a.spd(), b.spd());
}

}  // namespace midword
