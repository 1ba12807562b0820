#pragma once

// Geometry of the two manifolds that mid-level words live on: symmetric
// positive definite matrices under the affine-invariant metric, and the
// Grassmann manifold of r-dimensional subspaces of R^d represented by
// orthonormal bases.

#include <Eigen/Core>

#include <cstddef>

namespace midword {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric positive definite matrix. Construction validates finiteness,
/// symmetry (max|A - A^T| <= 1e-10 max|A|) and a successful Cholesky
/// factorization; the stored entries are exactly symmetric.
class SymPosDef {
 public:
  explicit SymPosDef(const Matrix& entries);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }

  friend bool operator==(const SymPosDef& a, const SymPosDef& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Matrix entries_;
};

/// A point on Gr(r, d): a d x r basis with orthonormal columns.
class GrassmannPoint {
 public:
  /// Validates max|B^T B - I| <= 1e-10.
  explicit GrassmannPoint(const Matrix& basis);

  /// Orthonormalizes the columns of an arbitrary full-column-rank matrix.
  static GrassmannPoint from_span(const Matrix& columns);

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index subspace_dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

  /// The projection matrix U U^T, which identifies the subspace.
  Matrix projector() const { return basis_ * basis_.transpose(); }

  friend bool operator==(const GrassmannPoint& a, const GrassmannPoint& b) {
    return a.basis_ == b.basis_;
  }

 private:
  Matrix basis_;
};

template <typename Point>
struct TangentVector {
  Point base;
  Matrix coords;
};

using SpdTangent = TangentVector<SymPosDef>;
using GrassmannTangent = TangentVector<GrassmannPoint>;

// Tolerances shared by validators and tests.
inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kOrthonormalTolerance = 1e-10;
inline constexpr double kHorizontalTolerance = 1e-8;
inline constexpr double kEigenFloorRatio = 1e-12;

bool is_symmetric(const Matrix& a, double rel_tol = kSymmetryTolerance);

// ---------------------------------------------------------------------------
// SPD manifold.

/// Matrix logarithm via the eigendecomposition of (A + A^T) / 2.
Matrix spd_matrix_log(const SymPosDef& x);
/// Same as above for a raw matrix; throws kInvalidInput on non-finite
/// entries and kNotPositiveDefinite when an eigenvalue is at or below
/// 1e-12 times the largest one.
Matrix spd_matrix_log(const Matrix& x);

/// Matrix exponential of a symmetric matrix.
SymPosDef spd_matrix_exp(const Matrix& symmetric);

/// Principal square root and its inverse, computed from one decomposition.
struct SpdRoots {
  Matrix sqrt;
  Matrix inv_sqrt;
};
SpdRoots spd_roots(const SymPosDef& x);

SpdTangent spd_log_map(const SymPosDef& base, const SymPosDef& target);
SymPosDef spd_exp_map(const SymPosDef& base, const SpdTangent& v);

/// Norm of a tangent vector under the affine-invariant metric,
/// ||base^{-1/2} v base^{-1/2}||_F.
double spd_tangent_norm(const SpdTangent& v);

/// Affine-invariant geodesic distance ||log(X^{-1/2} Y X^{-1/2})||_F.
double spd_geodesic_dist(const SymPosDef& x, const SymPosDef& y);

// ---------------------------------------------------------------------------
// Grassmann manifold.

/// Principal angles between two subspaces, ascending.
Vector principal_angles(const GrassmannPoint& u1, const GrassmannPoint& u2);

/// Arc-length distance sqrt(sum theta_i^2).
double grassmann_geodesic_dist(const GrassmannPoint& u1,
                               const GrassmannPoint& u2);

/// Throws kCutLocus when base^T target is numerically singular.
GrassmannTangent grassmann_log_map(const GrassmannPoint& base,
                                   const GrassmannPoint& target);
GrassmannPoint grassmann_exp_map(const GrassmannPoint& base,
                                 const GrassmannTangent& v);

// ---------------------------------------------------------------------------
// Euclidean embeddings.

/// Row-wise upper-triangular scan with off-diagonals scaled by sqrt(2), so
/// that <sym_vec(A), sym_vec(B)> equals the Frobenius inner product.
Vector sym_vec(const Matrix& symmetric);
Matrix sym_unvec(const Vector& v, Eigen::Index dim);
/// Dimension n with n(n+1)/2 == length; throws if length is not triangular.
Eigen::Index sym_dim_from_length(Eigen::Index length);

/// sym_vec of the projection matrix U U^T.
Vector embed_grassmann(const GrassmannPoint& u);
/// sym_vec of the matrix logarithm (tangent space at the identity).
Vector embed_spd(const SymPosDef& c);

}  // namespace midword
