#include "midword/manifold.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "midword/error.hpp"

namespace midword {
namespace {

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(Errc::kInvalidInput, std::string(what) + " has non-finite entries");
  }
}

void require_same_dim(const SymPosDef& a, const SymPosDef& b) {
  if (a.dim() != b.dim()) {
    throw Error(Errc::kDimensionMismatch,
                "SPD dims " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
}

void require_same_shape(const GrassmannPoint& a, const GrassmannPoint& b) {
  if (a.ambient_dim() != b.ambient_dim() ||
      a.subspace_dim() != b.subspace_dim()) {
    throw Error(Errc::kDimensionMismatch, "Grassmann shapes differ");
  }
}

// Eigendecomposition of a symmetric positive definite matrix with the
// eigenvalue floor applied.
Eigen::SelfAdjointEigenSolver<Matrix> spd_eigen(const Matrix& x) {
  require_finite(x, "SPD input");
  const Matrix sym = 0.5 * (x + x.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::kNotPositiveDefinite, "eigendecomposition failed");
  }
  const Vector& lambda = es.eigenvalues();
  const double max_eig = lambda.maxCoeff();
  if (!(max_eig > 0.0) || lambda.minCoeff() <= kEigenFloorRatio * max_eig) {
    throw Error(Errc::kNotPositiveDefinite,
                "eigenvalue " + std::to_string(lambda.minCoeff()) +
                    " at or below floor");
  }
  return es;
}

template <typename F>
Matrix spectral_apply(const Eigen::SelfAdjointEigenSolver<Matrix>& es, F f) {
  const Matrix& q = es.eigenvectors();
  const Vector mapped = es.eigenvalues().unaryExpr(f);
  Matrix out = q * mapped.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SymPosDef::SymPosDef(const Matrix& entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw Error(Errc::kInvalidInput, "SPD matrix must be square and non-empty");
  }
  require_finite(entries, "SPD matrix");
  if (!is_symmetric(entries)) {
    throw Error(Errc::kInvalidInput, "matrix is not symmetric");
  }
  entries_ = 0.5 * (entries + entries.transpose());
  Eigen::LLT<Matrix> llt(entries_);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::kNotPositiveDefinite, "Cholesky factorization failed");
  }
}

GrassmannPoint::GrassmannPoint(const Matrix& basis) : basis_(basis) {
  if (basis.rows() == 0 || basis.cols() == 0 || basis.cols() > basis.rows()) {
    throw Error(Errc::kInvalidInput, "Grassmann basis must be d x r with 0 < r <= d");
  }
  require_finite(basis, "Grassmann basis");
  const Matrix gram = basis.transpose() * basis;
  const double err =
      (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (err > kOrthonormalTolerance) {
    throw Error(Errc::kInvalidInput,
                "basis columns not orthonormal (err " + std::to_string(err) + ")");
  }
}

GrassmannPoint GrassmannPoint::from_span(const Matrix& columns) {
  if (columns.cols() == 0 || columns.cols() > columns.rows()) {
    throw Error(Errc::kInvalidInput, "span needs 0 < r <= d columns");
  }
  require_finite(columns, "span columns");
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-12 * s(0))) {
    throw Error(Errc::kRankDeficient, "columns do not span an r-dim subspace");
  }
  // Polar factor: closest orthonormal basis with the same span.
  return GrassmannPoint(svd.matrixU() * svd.matrixV().transpose());
}

// ---------------------------------------------------------------------------

Matrix spd_matrix_log(const SymPosDef& x) { return spd_matrix_log(x.matrix()); }

Matrix spd_matrix_log(const Matrix& x) {
  if (x.rows() != x.cols()) {
    throw Error(Errc::kDimensionMismatch, "matrix log needs a square matrix");
  }
  return spectral_apply(spd_eigen(x), [](double l) { return std::log(l); });
}

SymPosDef spd_matrix_exp(const Matrix& symmetric) {
  require_finite(symmetric, "matrix exp input");
  if (!is_symmetric(symmetric)) {
    throw Error(Errc::kInvalidInput, "matrix exp input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (symmetric + symmetric.transpose()));
  return SymPosDef(spectral_apply(es, [](double l) { return std::exp(l); }));
}

SpdRoots spd_roots(const SymPosDef& x) {
  const auto es = spd_eigen(x.matrix());
  return {spectral_apply(es, [](double l) { return std::sqrt(l); }),
          spectral_apply(es, [](double l) { return 1.0 / std::sqrt(l); })};
}

SpdTangent spd_log_map(const SymPosDef& base, const SymPosDef& target) {
  require_same_dim(base, target);
  const SpdRoots roots = spd_roots(base);
  const Matrix inner = roots.inv_sqrt * target.matrix() * roots.inv_sqrt;
  Matrix v = roots.sqrt * spd_matrix_log(inner) * roots.sqrt;
  v = (0.5 * (v + v.transpose())).eval();
  return {base, std::move(v)};
}

SymPosDef spd_exp_map(const SymPosDef& base, const SpdTangent& v) {
  if (v.coords.rows() != base.dim() || v.coords.cols() != base.dim() ||
      v.base.dim() != base.dim()) {
    throw Error(Errc::kDimensionMismatch, "tangent does not match base point");
  }
  const SpdRoots roots = spd_roots(base);
  const Matrix inner = roots.inv_sqrt * v.coords * roots.inv_sqrt;
  const Matrix expo = spd_matrix_exp(0.5 * (inner + inner.transpose())).matrix();
  const Matrix out = roots.sqrt * expo * roots.sqrt;
  return SymPosDef(0.5 * (out + out.transpose()));
}

double spd_tangent_norm(const SpdTangent& v) {
  const SpdRoots roots = spd_roots(v.base);
  return (roots.inv_sqrt * v.coords * roots.inv_sqrt).norm();
}

double spd_geodesic_dist(const SymPosDef& x, const SymPosDef& y) {
  require_same_dim(x, y);
  if (x.matrix() == y.matrix()) return 0.0;  // exact, not rounding noise
  const SpdRoots roots = spd_roots(x);
  const auto es = spd_eigen(roots.inv_sqrt * y.matrix() * roots.inv_sqrt);
  return es.eigenvalues().unaryExpr([](double l) { return std::log(l); }).norm();
}

// ---------------------------------------------------------------------------

Vector principal_angles(const GrassmannPoint& u1, const GrassmannPoint& u2) {
  require_same_shape(u1, u2);
  const Matrix cross = u1.basis().transpose() * u2.basis();
  const Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues();
  const Matrix residual = u2.basis() - u1.basis() * cross;
  const Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();
  const Eigen::Index r = cosines.size();
  Vector theta(r);
  // Cosines descend while sines ascend in reverse; take whichever of the two
  // is well conditioned for each angle (arcsine for small angles).
  for (Eigen::Index i = 0; i < r; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(r - 1 - i), 0.0, 1.0);
    theta(i) = (c * c >= 0.5) ? std::asin(s) : std::acos(c);
  }
  return theta;
}

double grassmann_geodesic_dist(const GrassmannPoint& u1,
                               const GrassmannPoint& u2) {
  require_same_shape(u1, u2);
  if (u1.basis() == u2.basis()) return 0.0;
  return principal_angles(u1, u2).norm();
}

GrassmannTangent grassmann_log_map(const GrassmannPoint& base,
                                   const GrassmannPoint& target) {
  require_same_shape(base, target);
  const Matrix& u = base.basis();
  const Matrix cross = u.transpose() * target.basis();
  Eigen::JacobiSVD<Matrix> cross_svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = cross_svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12)) {
    throw Error(Errc::kCutLocus, "principal angle reaches pi/2");
  }
  const Matrix cross_inv = cross_svd.matrixV() * sv.cwiseInverse().asDiagonal() *
                           cross_svd.matrixU().transpose();
  const Matrix a = (target.basis() - u * cross) * cross_inv;
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector angles = svd.singularValues().unaryExpr([](double t) { return std::atan(t); });
  Matrix coords = svd.matrixU() * angles.asDiagonal() * svd.matrixV().transpose();
  coords -= u * (u.transpose() * coords);
  return {base, std::move(coords)};
}

GrassmannPoint grassmann_exp_map(const GrassmannPoint& base,
                                 const GrassmannTangent& v) {
  const Matrix& u = base.basis();
  if (v.coords.rows() != u.rows() || v.coords.cols() != u.cols()) {
    throw Error(Errc::kDimensionMismatch, "tangent does not match base point");
  }
  require_finite(v.coords, "Grassmann tangent");
  const double scale = std::max(1.0, v.coords.cwiseAbs().maxCoeff());
  if ((u.transpose() * v.coords).cwiseAbs().maxCoeff() > kHorizontalTolerance * scale) {
    throw Error(Errc::kInvalidInput, "tangent is not horizontal at base");
  }
  Eigen::JacobiSVD<Matrix> svd(v.coords, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const Matrix& r = svd.matrixV();
  const Vector cos_s = s.unaryExpr([](double t) { return std::cos(t); });
  const Vector sin_s = s.unaryExpr([](double t) { return std::sin(t); });
  const Matrix moved = u * r * cos_s.asDiagonal() * r.transpose() +
                       svd.matrixU() * sin_s.asDiagonal() * r.transpose();
  return GrassmannPoint::from_span(moved);
}

// ---------------------------------------------------------------------------

Vector sym_vec(const Matrix& symmetric) {
  if (symmetric.rows() != symmetric.cols()) {
    throw Error(Errc::kDimensionMismatch, "sym_vec needs a square matrix");
  }
  const Eigen::Index n = symmetric.rows();
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out(k++) = symmetric(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out(k++) = std::numbers::sqrt2 * symmetric(i, j);
    }
  }
  return out;
}

Eigen::Index sym_dim_from_length(Eigen::Index length) {
  const auto n = static_cast<Eigen::Index>(
      std::llround((std::sqrt(8.0 * static_cast<double>(length) + 1.0) - 1.0) / 2.0));
  if (length <= 0 || n * (n + 1) / 2 != length) {
    throw Error(Errc::kInvalidInput,
                "length " + std::to_string(length) + " is not a triangular number");
  }
  return n;
}

Matrix sym_unvec(const Vector& v, Eigen::Index dim) {
  if (dim <= 0 || dim * (dim + 1) / 2 != v.size()) {
    throw Error(Errc::kInvalidInput, "vector length does not match dim(dim+1)/2");
  }
  Matrix out(dim, dim);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    out(i, i) = v(k++);
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      out(i, j) = out(j, i) = v(k++) / std::numbers::sqrt2;
    }
  }
  return out;
}

Vector embed_grassmann(const GrassmannPoint& u) { return sym_vec(u.projector()); }

Vector embed_spd(const SymPosDef& c) { return sym_vec(spd_matrix_log(c)); }

}  // namespace midword
