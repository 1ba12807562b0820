#include "midword/synthetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>

#include "midword/error.hpp"
#include "midword/random.hpp"

namespace midword {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

MatrixXd random_rotation(std::mt19937_64& rng, Eigen::Index n) {
  MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = gaussian_vector(rng, n);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  // Fix column signs so Q is Haar-distributed.
  const VectorXd diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (diag(j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

struct Cluster {
  VectorXd mean;
  MatrixXd chol;  // lower Cholesky factor of the covariance
};

}  // namespace

void SyntheticSpec::validate() const {
  if (class_count < 1 || videos_per_class < 1 || features_per_video < 1 || dim < 1 ||
      clusters_per_class < 1) {
    throw Error(Errc::kConfig, "synthetic spec counts must be positive");
  }
  if (!(anisotropy >= 1.0) || !(cluster_scale > 0.0) || !(mean_spread >= 0.0) ||
      !(video_jitter >= 0.0)) {
    throw Error(Errc::kConfig, "synthetic spec scales out of range");
  }
}

std::vector<LabeledVideo> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const Eigen::Index d = spec.dim;
  std::mt19937_64 rng(derive_seed(spec.seed, "synthetic-classes"));

  // Covariance eigenvalues spaced geometrically from cluster_scale down to
  // cluster_scale / anisotropy.
  VectorXd eig(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
    eig(i) = spec.cluster_scale * std::pow(spec.anisotropy, -t);
  }

  std::vector<VectorXd> shared;
  if (spec.shared_means) {
    for (int j = 0; j < spec.clusters_per_class; ++j) {
      shared.push_back(spec.mean_spread * gaussian_vector(rng, d));
    }
  }
  std::vector<std::vector<Cluster>> classes(static_cast<std::size_t>(spec.class_count));
  for (auto& clusters : classes) {
    for (int j = 0; j < spec.clusters_per_class; ++j) {
      Cluster c;
      c.mean = spec.shared_means ? shared[static_cast<std::size_t>(j)]
                                 : VectorXd(spec.mean_spread * gaussian_vector(rng, d));
      const MatrixXd q = random_rotation(rng, d);
      const MatrixXd cov = q * eig.asDiagonal() * q.transpose();
      c.chol = Eigen::LLT<MatrixXd>(0.5 * (cov + cov.transpose())).matrixL();
      clusters.push_back(std::move(c));
    }
  }

  std::vector<LabeledVideo> videos;
  std::uniform_int_distribution<int> pick_cluster(0, spec.clusters_per_class - 1);
  for (int label = 0; label < spec.class_count; ++label) {
    const auto& clusters = classes[static_cast<std::size_t>(label)];
    for (int v = 0; v < spec.videos_per_class; ++v) {
      char id[64];
      std::snprintf(id, sizeof id, "c%02d_v%03d", label, v);
      std::mt19937_64 vrng(derive_seed(spec.seed, id));
      std::vector<VectorXd> centers;
      for (const Cluster& c : clusters) {
        centers.push_back(c.mean + spec.video_jitter * gaussian_vector(vrng, d));
      }
      LabeledVideo lv;
      lv.label = label;
      lv.descriptors.video_id = id;
      lv.descriptors.features.resize(spec.features_per_video, d);
      for (int l = 0; l < spec.features_per_video; ++l) {
        const auto j = static_cast<std::size_t>(pick_cluster(vrng));
        const VectorXd f = centers[j] + clusters[j].chol * gaussian_vector(vrng, d);
        lv.descriptors.features.row(l) =
            f.unaryExpr([](double x) { return static_cast<double>(static_cast<float>(x)); })
                .transpose();
      }
      videos.push_back(std::move(lv));
    }
  }
  return videos;
}

LabeledSplit split_per_class(std::span<const LabeledVideo> videos, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::kConfig, "train fraction must be in (0, 1)");
  }
  std::map<int, std::size_t> totals;
  for (const LabeledVideo& v : videos) ++totals[v.label];
  std::map<int, std::size_t> seen;
  LabeledSplit split;
  for (const LabeledVideo& v : videos) {
    const auto quota = static_cast<std::size_t>(
        std::lround(train_fraction * static_cast<double>(totals[v.label])));
    (seen[v.label]++ < quota ? split.train : split.test).push_back(v);
  }
  return split;
}

std::vector<DescriptorSet> descriptors_of(std::span<const LabeledVideo> videos) {
  std::vector<DescriptorSet> out;
  out.reserve(videos.size());
  for (const LabeledVideo& v : videos) out.push_back(v.descriptors);
  return out;
}

std::vector<int> labels_of(std::span<const LabeledVideo> videos) {
  std::vector<int> out;
  out.reserve(videos.size());
  for (const LabeledVideo& v : videos) out.push_back(v.label);
  return out;
}

}  // namespace midword
