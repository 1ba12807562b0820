#include <cmath>
#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "midword/encoding.hpp"
#include "midword/error.hpp"
#include "oracles.hpp"

using namespace midword;
using namespace midword::testing;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kIo;
}

MidLevelWord cov_word(const MatrixXd& m) {
  return MidLevelWord(WordKind::kCovariance, SymPosDef(m), WordProvenance{"vid", 0});
}

std::vector<MidLevelWord> random_cov_words(std::mt19937_64& rng, int n, int d) {
  std::vector<MidLevelWord> out;
  for (int i = 0; i < n; ++i) out.push_back(cov_word(random_spd_matrix(rng, d, 1.0)));
  return out;
}

}  // namespace

TEST_SUITE("normalization") {
  TEST_CASE("power plus L2 hand values") {
    VectorXd v(3);
    v << 4, 0, -4;
    VectorXd want(3);
    want << 2, 0, -2;
    want /= std::sqrt(8.0);
    CHECK((power_l2_normalize(v) - want).norm() < 1e-15);
    const VectorXd e = VectorXd::Unit(5, 2);
    CHECK(power_l2_normalize(e) == e);
    CHECK(power_l2_normalize(VectorXd::Zero(4)) == VectorXd::Zero(4));
    CHECK(l2_normalize(VectorXd::Zero(4)) == VectorXd::Zero(4));
  }

  TEST_CASE("unit norm for any nonzero input") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
      const VectorXd v = gaussian_matrix(rng, 20, 1) * std::pow(10.0, trial % 7 - 3);
      CHECK(std::abs(power_l2_normalize(v).norm() - 1.0) < 1e-12);
      CHECK(std::abs(l2_normalize(v).norm() - 1.0) < 1e-12);
    }
  }

  TEST_CASE("encoder names") {
    for (auto m : {EncoderMethod::kBovw, EncoderMethod::kVlad, EncoderMethod::kFisher}) {
      CHECK(parse_encoder(encoder_name(m)) == m);
    }
    CHECK(code_of([] { parse_encoder("svm"); }) == Errc::kConfig);
  }
}

TEST_SUITE("bovw") {
  TEST_CASE("rows sum to one and the layout is row-major") {
    std::mt19937_64 rng(2);
    const auto centers = random_cov_words(rng, 3, 3);
    const auto words = random_cov_words(rng, 5, 3);
    const KarcherCodebook cb{WordKind::kCovariance, centers};
    const EncodedVideo e = encode_bovw(cb, words);
    REQUIRE(e.vector.size() == 15);
    CHECK(e.codebook_size == 3);
    CHECK(e.block_size == 5);
    CHECK(e.video_id == "vid");
    for (int m = 0; m < 3; ++m) {
      CHECK(std::abs(e.vector.segment(m * 5, 5).sum() - 1.0) < 1e-14);
      double total = 0.0;
      for (int k = 0; k < 5; ++k) total += word_distance(centers[m], words[k]);
      for (int k = 0; k < 5; ++k) {
        CHECK(e.vector(m * 5 + k) ==
              doctest::Approx(word_distance(centers[m], words[k]) / total).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("words equal to a center leave its row zero") {
    std::mt19937_64 rng(3);
    const auto centers = random_cov_words(rng, 2, 3);
    const std::vector<MidLevelWord> words(4, centers[1]);
    const EncodedVideo e = encode_bovw(KarcherCodebook{WordKind::kCovariance, centers}, words);
    CHECK(e.vector.segment(4, 4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(e.vector.head(4).sum() - 1.0) < 1e-14);
  }

  TEST_CASE("congruence leaves the encoding unchanged") {
    std::mt19937_64 rng(4);
    const auto centers = random_cov_words(rng, 2, 3);
    const auto words = random_cov_words(rng, 6, 3);
    const MatrixXd a = random_invertible(rng, 3);
    std::vector<MidLevelWord> c2, w2;
    for (const auto& c : centers) c2.push_back(cov_word(a * c.spd().matrix() * a.transpose()));
    for (const auto& w : words) w2.push_back(cov_word(a * w.spd().matrix() * a.transpose()));
    const VectorXd x = encode_bovw({WordKind::kCovariance, centers}, words).vector;
    const VectorXd y = encode_bovw({WordKind::kCovariance, c2}, w2).vector;
    CHECK((x - y).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("errors") {
    std::mt19937_64 rng(5);
    const KarcherCodebook cb{WordKind::kCovariance, random_cov_words(rng, 2, 3)};
    CHECK(code_of([&] { encode_bovw(cb, {}); }) == Errc::kInvalidInput);
    const std::vector<MidLevelWord> sub{MidLevelWord(WordKind::kSubspace, random_grassmann(rng, 3, 1))};
    CHECK(code_of([&] { encode_bovw(cb, sub); }) == Errc::kKindMismatch);
  }
}

TEST_SUITE("vlad") {
  TEST_CASE("matches the brute-force double loop") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      // K = 8 words, M = 2 centers, D = 6 (full embedding of 3x3 words)
      const auto words = random_cov_words(rng, 8, 3);
      const KarcherCodebook cb{WordKind::kCovariance, random_cov_words(rng, 2, 3)};
      std::vector<MidLevelWord> pool = words;
      for (int i = 0; i < 10; ++i) pool.push_back(cov_word(random_spd_matrix(rng, 3)));
      const PcaProjection pca = fit_pca(embed_words(pool), 6);
      const VectorXd want = brute_force_vlad(cb, pca, words);
      MatrixXd centers(2, 6);
      for (int m = 0; m < 2; ++m) centers.row(m) = pca.apply(embed_word(cb.centers[m])).transpose();
      const VectorXd got = vlad_accumulate(cb, pca, centers, words);
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
      const EncodedVideo e = encode_vlad(cb, pca, words);
      CHECK(std::abs(e.vector.norm() - 1.0) < 1e-10);
      CHECK(rel_vec_err(e.vector, want / want.norm()) < 1e-12);
    }
  }

  TEST_CASE("words equal to centers give the zero vector") {
    std::mt19937_64 rng(7);
    const auto centers = random_cov_words(rng, 2, 2);
    const std::vector<MidLevelWord> words{centers[0], centers[1], centers[1]};
    const PcaProjection pca(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
    const EncodedVideo e = encode_vlad({WordKind::kCovariance, centers}, pca, words);
    CHECK(e.vector.size() == 6);
    CHECK(e.vector.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("single word and center give the residual direction") {
    std::mt19937_64 rng(8);
    const auto c = random_cov_words(rng, 1, 2);
    const auto w = random_cov_words(rng, 1, 2);
    const PcaProjection pca(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
    const VectorXd r = embed_word(w[0]) - embed_word(c[0]);
    CHECK(rel_vec_err(encode_vlad({WordKind::kCovariance, c}, pca, w).vector, r / r.norm()) < 1e-13);
  }

  TEST_CASE("translation in embedding space cancels") {
    std::mt19937_64 rng(9);
    const auto words = random_cov_words(rng, 6, 2);
    const KarcherCodebook cb{WordKind::kCovariance, random_cov_words(rng, 2, 2)};
    const PcaProjection a(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
    const PcaProjection b(gaussian_matrix(rng, 3, 1), MatrixXd::Identity(3, 3));
    MatrixXd ca(2, 3), cbm(2, 3);
    for (int m = 0; m < 2; ++m) {
      ca.row(m) = a.apply(embed_word(cb.centers[m])).transpose();
      cbm.row(m) = b.apply(embed_word(cb.centers[m])).transpose();
    }
    CHECK((vlad_accumulate(cb, a, ca, words) - vlad_accumulate(cb, b, cbm, words)).norm() < 1e-13);
  }
}

TEST_SUITE("fisher") {
  TEST_CASE("normalized scores match a finite-difference gradient") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
      const FisherInstance inst = tiny_fisher_instance(rng, 4, 2);
      const MatrixXd y = inst.gmm.project(inst.words);
      for (bool strict : {false, true}) {
        const VectorXd got = fisher_scores(inst.gmm, y, FisherOptions{strict});
        CHECK(rel_vec_err(got, fisher_by_differences(inst.gmm, y, strict)) < 1e-4);
      }
    }
  }

  TEST_CASE("posteriors match the direct densities and sum to one") {
    std::mt19937_64 rng(11);
    const FisherInstance inst = tiny_fisher_instance(rng, 6, 3);
    const MatrixXd y = inst.gmm.project(inst.words);
    MatrixXd post;
    fisher_scores(inst.gmm, y, {}, &post);
    const MatrixXd want =
        direct_posteriors(y, inst.gmm.weights, inst.gmm.means, inst.gmm.variances.cwiseSqrt());
    CHECK((post - want).cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(post.row(k).sum() - 1.0) < 1e-10);
  }

  TEST_CASE("single component closed form") {
    std::mt19937_64 rng(12);
    FisherInstance inst = tiny_fisher_instance(rng, 5, 1);
    const MatrixXd y = inst.gmm.project(inst.words);
    const VectorXd mu = inst.gmm.means.row(0).transpose();
    const VectorXd s = inst.gmm.variances.row(0).transpose().cwiseSqrt();
    VectorXd mean_block = VectorXd::Zero(3), var_block = VectorXd::Zero(3);
    for (int k = 0; k < 5; ++k) {
      const VectorXd z = (y.row(k).transpose() - mu).cwiseQuotient(s);
      mean_block += z / 5.0;
      var_block += (z.array().square() - 1.0).matrix() / (5.0 * std::sqrt(2.0));
    }
    const VectorXd got = fisher_scores(inst.gmm, y);
    CHECK((got.head(3) - mean_block).norm() < 1e-13);
    CHECK((got.tail(3) - var_block).norm() < 1e-13);
  }

  TEST_CASE("words at a component mean zero that mean block") {
    std::mt19937_64 rng(13);
    FisherInstance inst = tiny_fisher_instance(rng, 3, 2);
    // put every word exactly on component 0's mean, far from component 1
    const SymPosDef at = spd_matrix_exp(sym_unvec(VectorXd::Constant(3, 0.2), 2));
    inst.gmm.means.row(0) = embed_spd(at).transpose();
    inst.gmm.means.row(1) = inst.gmm.means.row(0).array() + 40.0;
    const std::vector<MidLevelWord> words(3, cov_word(at.matrix()));
    const VectorXd raw = fisher_scores(inst.gmm, inst.gmm.project(words));
    CHECK(raw.head(3).norm() < 1e-12);
    CHECK(raw.segment(3, 3).norm() < 1e-12);
    const double c = -1.0 / std::sqrt(2.0 * inst.gmm.weights(0));
    for (int j = 0; j < 3; ++j) CHECK(raw(6 + j) == doctest::Approx(c).epsilon(1e-10));
    CHECK(raw.tail(3).norm() < 1e-12);
  }

  TEST_CASE("encode_fisher is power-L2 of the raw scores") {
    std::mt19937_64 rng(14);
    const FisherInstance inst = tiny_fisher_instance(rng, 4, 2);
    const EncodedVideo e = encode_fisher(inst.gmm, inst.words);
    CHECK(e.vector.size() == 12);
    CHECK(e.block_size == 3);
    CHECK(e.codebook_size == 2);
    CHECK(std::abs(e.vector.norm() - 1.0) < 1e-10);
    CHECK(e.vector == power_l2_normalize(fisher_scores(inst.gmm, inst.gmm.project(inst.words))));
    const EncodedVideo again = encode_fisher(inst.gmm, inst.words);
    CHECK(e.vector == again.vector);
    CHECK(code_of([&] { encode_fisher(inst.gmm, {}); }) == Errc::kInvalidInput);
  }
}
