#include "midword/codebook.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "em.hpp"
#include "midword/error.hpp"
#include "parallel.hpp"
#include "seeding.hpp"

namespace midword {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

template <typename Point>
void require_nonempty(std::span<const Point> points) {
  if (points.empty()) throw Error(Errc::kInvalidInput, "Karcher mean of an empty set");
}

void require_uniform(std::span<const MidLevelWord> words) {
  if (words.empty()) throw Error(Errc::kInvalidInput, "empty word list");
  for (const MidLevelWord& w : words) require_compatible(words.front(), w);
}

// Mean of the whitened log maps X^{-1/2} X_i X^{-1/2} at the current point.
MatrixXd spd_mean_whitened_log(std::span<const SymPosDef> points, const SpdRoots& roots) {
  MatrixXd acc = MatrixXd::Zero(roots.sqrt.rows(), roots.sqrt.cols());
  for (const SymPosDef& p : points) {
    acc += spd_matrix_log(MatrixXd(roots.inv_sqrt * p.matrix() * roots.inv_sqrt));
  }
  acc /= static_cast<double>(points.size());
  return 0.5 * (acc + acc.transpose());
}

MatrixXd grassmann_mean_log(std::span<const GrassmannPoint> points, const GrassmannPoint& at) {
  MatrixXd acc = MatrixXd::Zero(at.ambient_dim(), at.subspace_dim());
  for (const GrassmannPoint& p : points) acc += grassmann_log_map(at, p).coords;
  return acc / static_cast<double>(points.size());
}

GrassmannPoint grassmann_iterate(std::span<const GrassmannPoint> points, GrassmannPoint x,
                                 const KarcherOptions& options, KarcherStats& stats) {
  stats.converged = false;
  for (stats.iterations = 0; stats.iterations < options.max_iter;) {
    const MatrixXd mean = grassmann_mean_log(points, x);
    ++stats.iterations;
    stats.residual = mean.norm();
    if (mean.squaredNorm() < options.tol) {
      stats.converged = true;
      return x;
    }
    x = grassmann_exp_map(x, {x, mean});
  }
  stats.residual = grassmann_mean_log(points, x).norm();
  return x;
}

}  // namespace

SymPosDef karcher_mean(std::span<const SymPosDef> points, const KarcherOptions& options,
                       const SymPosDef* init, KarcherStats* stats) {
  require_nonempty(points);
  for (const SymPosDef& p : points) {
    if (p.dim() != points.front().dim()) {
      throw Error(Errc::kDimensionMismatch, "SPD points differ in dimension");
    }
  }
  KarcherStats local;
  KarcherStats& st = stats ? *stats : local;
  st = KarcherStats{};
  SymPosDef x = init ? *init : points.front();
  if (x.dim() != points.front().dim()) {
    throw Error(Errc::kDimensionMismatch, "initial estimate has the wrong dimension");
  }
  for (st.iterations = 0; st.iterations < options.max_iter;) {
    const SpdRoots roots = spd_roots(x);
    const MatrixXd mean = spd_mean_whitened_log(points, roots);
    ++st.iterations;
    st.residual = mean.norm();
    if (mean.squaredNorm() < options.tol) {
      st.converged = true;
      return x;
    }
    const MatrixXd moved = roots.sqrt * spd_matrix_exp(mean).matrix() * roots.sqrt;
    x = SymPosDef(0.5 * (moved + moved.transpose()));
  }
  st.residual = spd_mean_whitened_log(points, spd_roots(x)).norm();
  return x;
}

GrassmannPoint projection_mean(std::span<const GrassmannPoint> points) {
  require_nonempty(points);
  MatrixXd acc = MatrixXd::Zero(points.front().ambient_dim(), points.front().ambient_dim());
  for (const GrassmannPoint& p : points) acc += p.projector();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(acc / static_cast<double>(points.size()));
  const Eigen::Index r = points.front().subspace_dim();
  return GrassmannPoint::from_span(es.eigenvectors().rightCols(r));
}

GrassmannPoint karcher_mean(std::span<const GrassmannPoint> points,
                            const KarcherOptions& options, const GrassmannPoint* init,
                            KarcherStats* stats) {
  require_nonempty(points);
  for (const GrassmannPoint& p : points) {
    if (p.ambient_dim() != points.front().ambient_dim() ||
        p.subspace_dim() != points.front().subspace_dim()) {
      throw Error(Errc::kDimensionMismatch, "Grassmann points differ in shape");
    }
  }
  KarcherStats local;
  KarcherStats& st = stats ? *stats : local;
  st = KarcherStats{};
  const GrassmannPoint start = init ? *init : points.front();
  try {
    return grassmann_iterate(points, start, options, st);
  } catch (const Error& e) {
    if (e.code() != Errc::kCutLocus) throw;
  }
  // Restart from the embedding-space mean; a second cut-locus hit propagates.
  st = KarcherStats{};
  st.restarted = true;
  return grassmann_iterate(points, projection_mean(points), options, st);
}

MidLevelWord karcher_mean(std::span<const MidLevelWord> words, const KarcherOptions& options,
                          const MidLevelWord* init, KarcherStats* stats) {
  require_uniform(words);
  if (init) require_compatible(words.front(), *init);
  const WordKind kind = words.front().kind();
  WordProvenance prov{"karcher-mean", 0};
  if (kind == WordKind::kSubspace) {
    std::vector<GrassmannPoint> pts;
    pts.reserve(words.size());
    for (const MidLevelWord& w : words) pts.push_back(w.subspace());
    return MidLevelWord(kind,
                        karcher_mean(std::span<const GrassmannPoint>(pts), options,
                                     init ? &init->subspace() : nullptr, stats),
                        prov);
  }
  std::vector<SymPosDef> pts;
  pts.reserve(words.size());
  for (const MidLevelWord& w : words) pts.push_back(w.spd());
  SymPosDef mean = karcher_mean(std::span<const SymPosDef>(pts), options,
                                init ? &init->spd() : nullptr, stats);
  if (kind == WordKind::kGaussianSpd) {
    // Affine-invariant means of unit-determinant matrices have unit
    // determinant; rescale away the rounding drift.
    const double log_det = std::log(mean.matrix().determinant());
    mean = SymPosDef(mean.matrix() * std::exp(-log_det / static_cast<double>(mean.dim())));
  }
  return MidLevelWord(kind, std::move(mean), prov);
}

// ---------------------------------------------------------------------------

int nearest_center(const KarcherCodebook& codebook, const MidLevelWord& word, double* distance) {
  if (codebook.centers.empty()) throw Error(Errc::kInvalidInput, "empty codebook");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < codebook.centers.size(); ++m) {
    const double d = word_distance(codebook.centers[m], word);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(m);
    }
  }
  if (distance) *distance = best_d;
  return best;
}

KarcherClustering k_karcher_means(std::span<const MidLevelWord> words, int centers,
                                  std::uint64_t seed, const KMeansOptions& options) {
  require_uniform(words);
  if (centers < 1) throw Error(Errc::kInvalidInput, "codebook size must be positive");
  const std::size_t n = words.size();
  const auto m_count = static_cast<std::size_t>(centers);
  if (n < m_count) {
    throw Error(Errc::kTooFewSamples, std::to_string(n) + " words for " +
                                          std::to_string(centers) + " centers");
  }

  const std::vector<std::size_t> seeds =
      options.init == CenterInit::kPlusPlus
          ? detail::kmeanspp_select(n, m_count, seed,
                                    [&](std::size_t i, std::size_t j) {
                                      const double d = word_distance(words[i], words[j]);
                                      return d * d;
                                    })
          : detail::random_select(n, m_count, seed);

  KarcherClustering out;
  out.codebook.kind = words.front().kind();
  for (std::size_t m = 0; m < m_count; ++m) {
    const MidLevelWord& w = words[seeds[m]];
    out.codebook.centers.emplace_back(w.kind(), w.payload(),
                                      WordProvenance{"codeword", static_cast<int>(m)});
  }

  std::vector<int> assignment(n, -1);
  std::vector<double> dist2(n, 0.0);

  auto assign = [&]() -> bool {
    std::vector<int> next(n);
    detail::parallel_for(n, options.workers, [&](std::size_t i) {
      double d = 0.0;
      next[i] = nearest_center(out.codebook, words[i], &d);
      dist2[i] = d * d;
    });
    // Empty-cluster repair: the word farthest from its center seeds the
    // empty cluster as a singleton.
    std::vector<std::size_t> sizes(m_count, 0);
    for (int a : next) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t m = 0; m < m_count; ++m) {
      if (sizes[m] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(next[i])] < 2) continue;
        if (far == n || dist2[i] > dist2[far]) far = i;
      }
      if (far == n) break;
      --sizes[static_cast<std::size_t>(next[far])];
      ++sizes[m];
      next[far] = static_cast<int>(m);
      dist2[far] = 0.0;
      out.codebook.centers[m] = MidLevelWord(words[far].kind(), words[far].payload(),
                                             WordProvenance{"codeword", static_cast<int>(m)});
    }
    const bool changed = next != assignment;
    assignment = std::move(next);
    double total = 0.0;
    for (double d : dist2) total += d;
    out.objective.push_back(total);
    return changed;
  };

  auto update = [&]() {
    std::vector<std::vector<std::size_t>> members(m_count);
    for (std::size_t i = 0; i < n; ++i) {
      members[static_cast<std::size_t>(assignment[i])].push_back(i);
    }
    detail::parallel_for(m_count, options.workers, [&](std::size_t m) {
      if (members[m].empty()) return;
      std::vector<MidLevelWord> subset;
      subset.reserve(members[m].size());
      for (std::size_t i : members[m]) subset.push_back(words[i]);
      // Warm start from the current center.
      const MidLevelWord mean = karcher_mean(std::span<const MidLevelWord>(subset),
                                             options.karcher, &out.codebook.centers[m]);
      out.codebook.centers[m] = MidLevelWord(mean.kind(), mean.payload(),
                                             WordProvenance{"codeword", static_cast<int>(m)});
    });
  };

  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    const bool changed = assign();
    if (!changed) {
      out.converged = true;
      break;
    }
    update();
  }
  if (!out.converged) {
    out.converged = !assign();
  }
  out.assignment = assignment;
  return out;
}

// ---------------------------------------------------------------------------

VectorXd embed_word(const MidLevelWord& word) {
  return word.is_subspace() ? embed_grassmann(word.subspace()) : embed_spd(word.spd());
}

MatrixXd embed_words(std::span<const MidLevelWord> words) {
  require_uniform(words);
  const VectorXd first = embed_word(words.front());
  MatrixXd out(static_cast<Eigen::Index>(words.size()), first.size());
  out.row(0) = first.transpose();
  for (std::size_t i = 1; i < words.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed_word(words[i]).transpose();
  }
  return out;
}

void RiemannianGmm::validate() const {
  const Eigen::Index m = weights.size();
  if (m < 1 || means.rows() != m || variances.rows() != m || variances.cols() != means.cols() ||
      pca.output_dim() != means.cols()) {
    throw Error(Errc::kInvalidInput, "inconsistent Riemannian GMM shapes");
  }
  if ((weights.array() <= 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-10 ||
      (variances.array() <= 0.0).any()) {
    throw Error(Errc::kInvalidInput, "invalid Riemannian GMM weights or variances");
  }
}

MatrixXd RiemannianGmm::project(std::span<const MidLevelWord> words) const {
  require_uniform(words);
  if (words.front().kind() != kind) {
    throw Error(Errc::kKindMismatch, "words do not match the GMM's word kind");
  }
  if (words.front().rows() != word_rows || words.front().cols() != word_cols) {
    throw Error(Errc::kDimensionMismatch, "word shape does not match the GMM");
  }
  return pca.apply_rows(embed_words(words));
}

RiemannianGmmFit fit_riemannian_gmm(std::span<const MidLevelWord> words, int components,
                                    Eigen::Index reduced_dim, std::uint64_t seed,
                                    const EmOptions& options) {
  require_uniform(words);
  if (components < 1) throw Error(Errc::kInvalidInput, "component count must be positive");
  if (words.size() < 10 * static_cast<std::size_t>(components)) {
    throw Error(Errc::kTooFewSamples, std::to_string(words.size()) + " words for " +
                                          std::to_string(components) + " components");
  }
  const MatrixXd embedded = embed_words(words);
  if (reduced_dim < 1 || reduced_dim > embedded.cols()) {
    throw Error(Errc::kInvalidInput, "D = " + std::to_string(reduced_dim) +
                                         " exceeds embedding dimension " +
                                         std::to_string(embedded.cols()));
  }
  RiemannianGmmFit fit;
  RiemannianGmm& g = fit.model;
  g.kind = words.front().kind();
  g.word_rows = words.front().rows();
  g.word_cols = words.front().cols();
  g.pca = fit_pca(embedded, reduced_dim);
  const MatrixXd projected = g.pca.apply_rows(embedded);
  const auto params = detail::fit_mixture(projected, components, detail::CovShape::kDiagonal,
                                          seed, options, &fit.trace);
  g.weights = params.weights;
  g.means = params.means;
  g.variances = params.variances;
  return fit;
}

MatrixXd gmm_posteriors(const RiemannianGmm& gmm, const MatrixXd& projected) {
  if (projected.cols() != gmm.dim()) {
    throw Error(Errc::kDimensionMismatch, "projected words do not match GMM dim");
  }
  const detail::MixtureParams p{gmm.weights, gmm.means, gmm.variances};
  MatrixXd out(projected.rows(), gmm.components());
  VectorXd lj;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    detail::log_joint(p, projected.row(i).transpose(), lj);
    out.row(i) = (lj.array() - detail::log_sum_exp(lj)).exp().matrix().transpose();
  }
  return out;
}

double gmm_log_likelihood(const RiemannianGmm& gmm, const MatrixXd& projected) {
  if (projected.cols() != gmm.dim()) {
    throw Error(Errc::kDimensionMismatch, "projected words do not match GMM dim");
  }
  const detail::MixtureParams p{gmm.weights, gmm.means, gmm.variances};
  double total = 0.0;
  VectorXd lj;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    detail::log_joint(p, projected.row(i).transpose(), lj);
    total += detail::log_sum_exp(lj);
  }
  return total;
}

}  // namespace midword
