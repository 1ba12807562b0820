#include "midword/encoding.hpp"

#include <cmath>
#include <string>

#include "midword/error.hpp"

namespace midword {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require_words(std::span<const MidLevelWord> words, WordKind kind) {
  if (words.empty()) throw Error(Errc::kInvalidInput, "video has no words (K = 0)");
  for (const MidLevelWord& w : words) {
    if (w.kind() != kind) {
      throw Error(Errc::kKindMismatch, "word kind " + std::string(word_kind_name(w.kind())) +
                                           " does not match codebook kind " +
                                           std::string(word_kind_name(kind)));
    }
  }
}

std::string video_of(std::span<const MidLevelWord> words) {
  return words.front().provenance().video_id;
}

}  // namespace

std::string_view encoder_name(EncoderMethod method) {
  switch (method) {
    case EncoderMethod::kBovw: return "bovw";
    case EncoderMethod::kVlad: return "vlad";
    case EncoderMethod::kFisher: return "fv";
  }
  return "?";
}

EncoderMethod parse_encoder(std::string_view name) {
  if (name == "bovw") return EncoderMethod::kBovw;
  if (name == "vlad") return EncoderMethod::kVlad;
  if (name == "fv") return EncoderMethod::kFisher;
  throw Error(Errc::kConfig, "unknown encoder '" + std::string(name) + "'");
}

VectorXd l2_normalize(const VectorXd& v) {
  const double norm = v.norm();
  if (norm == 0.0) return VectorXd::Zero(v.size());
  return v / norm;
}

VectorXd power_l2_normalize(const VectorXd& v) {
  const VectorXd powered = v.unaryExpr([](double z) {
    return std::copysign(std::sqrt(std::abs(z)), z);
  });
  return l2_normalize(powered);
}

EncodedVideo encode_bovw(const KarcherCodebook& codebook, std::span<const MidLevelWord> words) {
  require_words(words, codebook.kind);
  const auto m_count = static_cast<Eigen::Index>(codebook.size());
  const auto k_count = static_cast<Eigen::Index>(words.size());
  MatrixXd dist(m_count, k_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      dist(m, k) = word_distance(codebook.centers[static_cast<std::size_t>(m)],
                                 words[static_cast<std::size_t>(k)]);
    }
    const double row_sum = dist.row(m).sum();
    if (row_sum > 0.0) dist.row(m) /= row_sum;
  }
  EncodedVideo out;
  out.video_id = video_of(words);
  out.method = EncoderMethod::kBovw;
  out.kind = codebook.kind;
  out.codebook_size = static_cast<int>(m_count);
  out.block_size = static_cast<int>(k_count);
  out.vector.resize(m_count * k_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    out.vector.segment(m * k_count, k_count) = dist.row(m).transpose();
  }
  return out;
}

VectorXd vlad_accumulate(const KarcherCodebook& codebook, const PcaProjection& pca,
                         const MatrixXd& centers_projected, std::span<const MidLevelWord> words) {
  require_words(words, codebook.kind);
  const Eigen::Index dim = pca.output_dim();
  const auto m_count = static_cast<Eigen::Index>(codebook.size());
  if (centers_projected.rows() != m_count || centers_projected.cols() != dim) {
    throw Error(Errc::kDimensionMismatch, "projected centers do not match codebook/PCA");
  }
  VectorXd acc = VectorXd::Zero(m_count * dim);
  for (const MidLevelWord& w : words) {
    const int m = nearest_center(codebook, w);
    acc.segment(m * dim, dim) += pca.apply(embed_word(w)) - centers_projected.row(m).transpose();
  }
  return acc;
}

EncodedVideo encode_vlad(const KarcherCodebook& codebook, const PcaProjection& pca,
                         std::span<const MidLevelWord> words) {
  require_words(words, codebook.kind);
  MatrixXd centers(static_cast<Eigen::Index>(codebook.size()), pca.output_dim());
  for (std::size_t m = 0; m < codebook.size(); ++m) {
    centers.row(static_cast<Eigen::Index>(m)) =
        pca.apply(embed_word(codebook.centers[m])).transpose();
  }
  EncodedVideo out;
  out.video_id = video_of(words);
  out.method = EncoderMethod::kVlad;
  out.kind = codebook.kind;
  out.codebook_size = static_cast<int>(codebook.size());
  out.block_size = static_cast<int>(pca.output_dim());
  out.vector = l2_normalize(vlad_accumulate(codebook, pca, centers, words));
  return out;
}

VectorXd fisher_scores(const RiemannianGmm& gmm, const MatrixXd& projected,
                       const FisherOptions& options, MatrixXd* posteriors) {
  if (projected.rows() == 0) throw Error(Errc::kInvalidInput, "video has no words (K = 0)");
  const Eigen::Index m_count = gmm.components();
  const Eigen::Index dim = gmm.dim();
  const MatrixXd gamma = gmm_posteriors(gmm, projected);
  const auto k_count = static_cast<double>(projected.rows());
  const double centering = options.strict_paper ? 0.0 : 1.0;

  VectorXd out = VectorXd::Zero(2 * m_count * dim);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    const VectorXd mu = gmm.means.row(m).transpose();
    const VectorXd sigma = gmm.variances.row(m).transpose().cwiseSqrt();
    VectorXd mean_block = VectorXd::Zero(dim);
    VectorXd var_block = VectorXd::Zero(dim);
    for (Eigen::Index k = 0; k < projected.rows(); ++k) {
      const VectorXd z = (projected.row(k).transpose() - mu).cwiseQuotient(sigma);
      mean_block += gamma(k, m) * z;
      var_block += gamma(k, m) * (z.array().square() - centering).matrix();
    }
    out.segment(m * dim, dim) = mean_block / (k_count * std::sqrt(gmm.weights(m)));
    out.segment((m_count + m) * dim, dim) =
        var_block / (k_count * std::sqrt(2.0 * gmm.weights(m)));
  }
  if (posteriors) *posteriors = gamma;
  return out;
}

EncodedVideo encode_fisher(const RiemannianGmm& gmm, std::span<const MidLevelWord> words,
                           const FisherOptions& options) {
  require_words(words, gmm.kind);
  EncodedVideo out;
  out.video_id = video_of(words);
  out.method = EncoderMethod::kFisher;
  out.kind = gmm.kind;
  out.codebook_size = static_cast<int>(gmm.components());
  out.block_size = static_cast<int>(gmm.dim());
  out.vector = power_l2_normalize(fisher_scores(gmm, gmm.project(words), options));
  return out;
}

}  // namespace midword
