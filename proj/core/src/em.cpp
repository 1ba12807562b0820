#include "em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "midword/error.hpp"
#include "parallel.hpp"
#include "seeding.hpp"

namespace midword::detail {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kChunk = 256;
constexpr double kMinCount = 1e-10;

struct Stats {
  VectorXd count;
  MatrixXd first;
  MatrixXd second;
  double log_likelihood = 0.0;

  Stats(Eigen::Index k, Eigen::Index dim, Eigen::Index var_cols)
      : count(VectorXd::Zero(k)), first(MatrixXd::Zero(k, dim)),
        second(MatrixXd::Zero(k, var_cols)) {}

  void add(const Stats& o) {
    count += o.count;
    first += o.first;
    second += o.second;
    log_likelihood += o.log_likelihood;
  }
};

void maximize(const Stats& s, double n, CovShape shape, const VectorXd& floor,
              MixtureParams& p) {
  const Eigen::Index k = p.means.rows();
  const Eigen::Index dim = p.means.cols();
  for (Eigen::Index c = 0; c < k; ++c) {
    const double nk = s.count(c);
    p.weights(c) = std::max(nk, kMinCount) / n;
    if (nk < kMinCount) continue;  // starved component keeps its parameters
    const VectorXd mu = s.first.row(c).transpose() / nk;
    p.means.row(c) = mu.transpose();
    if (shape == CovShape::kSpherical) {
      const double var = (s.second(c, 0) / nk - mu.squaredNorm()) / static_cast<double>(dim);
      p.variances(c, 0) = std::max(var, floor(0));
    } else {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double var = s.second(c, j) / nk - mu(j) * mu(j);
        p.variances(c, j) = std::max(var, floor(j));
      }
    }
  }
  p.weights /= p.weights.sum();
}

}  // namespace

double log_sum_exp(const VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

void log_joint(const MixtureParams& p, const Eigen::Ref<const VectorXd>& x,
               VectorXd& out) {
  const Eigen::Index k = p.means.rows();
  const auto dim = static_cast<double>(p.means.cols());
  out.resize(k);
  constexpr double kLog2Pi = 1.8378770664093454836;
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto diff = x.transpose() - p.means.row(c);
    double lp;
    if (p.variances.cols() == 1) {
      const double var = p.variances(c, 0);
      lp = -0.5 * dim * (kLog2Pi + std::log(var)) - 0.5 * diff.squaredNorm() / var;
    } else {
      const auto var = p.variances.row(c).array();
      lp = -0.5 * (dim * kLog2Pi + var.log().sum()) -
           0.5 * (diff.array().square() / var).sum();
    }
    out(c) = std::log(p.weights(c)) + lp;
  }
}

MixtureParams fit_mixture(const MatrixXd& data, int components, CovShape shape,
                          std::uint64_t seed, const EmOptions& options,
                          EmTrace* trace) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  if (components < 1) throw Error(Errc::kInvalidInput, "component count must be >= 1");
  if (n < 10 * static_cast<Eigen::Index>(components)) {
    throw Error(Errc::kTooFewSamples, std::to_string(n) + " samples for " +
                                          std::to_string(components) + " components");
  }
  if (dim == 0 || !data.allFinite()) {
    throw Error(Errc::kInvalidInput, "training data must be finite and non-empty");
  }

  const VectorXd center = data.colwise().mean().transpose();
  const MatrixXd x = data.rowwise() - center.transpose();
  const VectorXd dim_var = x.colwise().squaredNorm().transpose() / static_cast<double>(n);
  const double mean_var = dim_var.mean();
  if (!(mean_var > 0.0)) {
    throw Error(Errc::kDegenerateInput, "training data has zero variance");
  }
  VectorXd floor;
  if (shape == CovShape::kSpherical) {
    floor = VectorXd::Constant(1, options.variance_floor_ratio * mean_var);
  } else {
    floor = dim_var.unaryExpr([&](double v) {
      return options.variance_floor_ratio * (v > 0.0 ? v : mean_var);
    });
  }
  const Eigen::Index var_cols = shape == CovShape::kSpherical ? 1 : dim;
  const auto k = static_cast<Eigen::Index>(components);
  const auto nd = static_cast<double>(n);

  MixtureParams p{VectorXd::Zero(k), MatrixXd::Zero(k, dim), MatrixXd::Zero(k, var_cols)};

  // Seeded k-means++ centers, then one hard-assignment M-step.
  const auto seeds = kmeanspp_select(
      static_cast<std::size_t>(n), static_cast<std::size_t>(k), seed,
      [&](std::size_t i, std::size_t j) {
        return (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j)))
            .squaredNorm();
      });
  MatrixXd seed_means(k, dim);
  for (Eigen::Index c = 0; c < k; ++c) {
    seed_means.row(c) = x.row(static_cast<Eigen::Index>(seeds[static_cast<std::size_t>(c)]));
  }
  {
    Stats s(k, dim, var_cols);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (seed_means.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      s.count(best) += 1.0;
      s.first.row(best) += x.row(i);
      if (shape == CovShape::kSpherical) {
        s.second(best, 0) += x.row(i).squaredNorm();
      } else {
        s.second.row(best) += x.row(i).array().square().matrix();
      }
    }
    p.means = seed_means;
    for (Eigen::Index c = 0; c < k; ++c) p.variances.row(c).setConstant(mean_var);
    maximize(s, nd, shape, floor, p);
  }

  const std::size_t chunks = (static_cast<std::size_t>(n) + kChunk - 1) / kChunk;
  double previous = -std::numeric_limits<double>::infinity();
  if (trace) *trace = EmTrace{};
  for (int iter = 0; iter < options.max_iter; ++iter) {
    std::vector<Stats> partial(chunks, Stats(k, dim, var_cols));
    for_each_chunk(static_cast<std::size_t>(n), kChunk, options.workers,
                   [&](std::size_t c, std::size_t begin, std::size_t end) {
                     Stats& s = partial[c];
                     VectorXd lj;
                     for (std::size_t i = begin; i < end; ++i) {
                       const auto row = x.row(static_cast<Eigen::Index>(i)).transpose();
                       log_joint(p, row, lj);
                       const double lse = log_sum_exp(lj);
                       s.log_likelihood += lse;
                       const VectorXd r = (lj.array() - lse).exp().matrix();
                       s.count += r;
                       s.first.noalias() += r * row.transpose();
                       if (shape == CovShape::kSpherical) {
                         s.second.col(0) += r * row.squaredNorm();
                       } else {
                         s.second.noalias() += r * row.array().square().matrix().transpose();
                       }
                     }
                   });
    Stats total(k, dim, var_cols);
    for (const Stats& s : partial) total.add(s);
    const double ll = total.log_likelihood;
    if (!std::isfinite(ll)) {
      throw Error(Errc::kDegenerateInput, "log-likelihood became non-finite");
    }
    if (trace) trace->log_likelihood.push_back(ll);
    if (iter > 0 && ll - previous < options.rel_tol * std::abs(previous)) {
      if (trace) trace->converged = true;
      break;
    }
    previous = ll;
    if (iter + 1 == options.max_iter) break;
    maximize(total, nd, shape, floor, p);
  }

  p.means.rowwise() += center.transpose();
  return p;
}

}  // namespace midword::detail
