#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "midword/error.hpp"
#include "midword/pipeline.hpp"
#include "midword/random.hpp"
#include "midword/synthetic.hpp"

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

PipelineConfig tiny_config(WordKind kind, EncoderMethod enc) {
  PipelineConfig c = PipelineConfig::desk();
  c.descriptor_dim = 6;
  c.gmm_components = 4;
  c.top_t = 10;
  c.subspace_r = 2;
  c.codebook_size = 2;
  c.embedding_dim = 6;
  c.word_kind = kind;
  c.encoder = enc;
  c.seed = 42;
  return c;
}

SyntheticSpec tiny_spec() {
  SyntheticSpec s;
  s.class_count = 2;
  s.videos_per_class = 6;
  s.features_per_video = 60;
  s.dim = 6;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_SUITE("seeds") {
  TEST_CASE("derived seeds are stable and label dependent") {
    static_assert(fnv1a("") == 0xcbf29ce484222325ULL);
    static_assert(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(derive_seed(1, "alignment-gmm") != derive_seed(1, "codebook"));
    CHECK(derive_seed(1, "codebook") != derive_seed(2, "codebook"));
    CHECK(derive_seed(7, "x") == splitmix64(7 ^ fnv1a("x")));
  }
}

TEST_SUITE("config") {
  TEST_CASE("paper defaults give the published encoding lengths") {
    PipelineConfig c = PipelineConfig::paper();
    CHECK(c.gmm_components == 256);
    CHECK(c.top_t == 64);
    CHECK(c.embedding_dim == 256);
    CHECK(c.pca_factor == 0.5);
    CHECK(c.reduced_descriptor_dim(96) == 48);
    CHECK(2 * c.effective_codebook_size() * c.embedding_dim == 16384);
    c.encoder = EncoderMethod::kBovw;
    CHECK(c.effective_codebook_size() * c.gmm_components == 16384);
    CHECK_NOTHROW(c.validate(96));
  }

  TEST_CASE("validation") {
    PipelineConfig c = PipelineConfig::desk();
    CHECK_NOTHROW(c.validate(8));
    CHECK(code_of([&] { c.validate(9); }) == Errc::kConfig);
    c.embedding_dim = 37;  // covariance embedding of d=8 has 36 entries
    CHECK(code_of([&] { c.validate(8); }) == Errc::kConfig);
    c.word_kind = WordKind::kGaussianSpd;
    CHECK_NOTHROW(c.validate(8));
    c = PipelineConfig::desk();
    c.word_kind = WordKind::kSubspace;
    c.subspace_r = 16;
    CHECK(code_of([&] { c.validate(8); }) == Errc::kConfig);
    c = PipelineConfig::desk();
    c.pca_factor = 0.0;
    CHECK(code_of([&] { c.validate(8); }) == Errc::kConfig);
  }

  TEST_CASE("json round trip, strictness, hash") {
    PipelineConfig c = PipelineConfig::desk();
    c.word_kind = WordKind::kSubspace;
    c.encoder = EncoderMethod::kVlad;
    c.seed = 99;
    c.strict_paper_fv = true;
    c.center_init = CenterInit::kRandom;
    c.em.rel_tol = 3e-6;
    const PipelineConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(config_hash(back) == config_hash(c));

    PipelineConfig w = c;
    w.workers = 7;
    CHECK(config_hash(w) == config_hash(c));
    w.seed = 100;
    CHECK(config_hash(w) != config_hash(c));

    CHECK(code_of([] { config_from_json(R"({"version": 1, "bogus": 3})"); }) == Errc::kConfig);
    CHECK(code_of([] { config_from_json(R"({"version": 2})"); }) == Errc::kConfig);
    CHECK(code_of([] { config_from_json("{not json"); }) == Errc::kConfig);
    CHECK(code_of([] { config_from_json(R"({"version": 1, "encoder": "svm"})"); }) == Errc::kConfig);
    // omitted keys keep defaults
    CHECK(config_from_json(R"({"version": 1, "top_t": 12})").top_t == 12);

    const auto path = std::filesystem::temp_directory_path() / "midword_cfg_test.json";
    save_config(path, c);
    CHECK(config_to_json(load_config(path)) == config_to_json(c));
    std::filesystem::remove(path);
    CHECK(code_of([&] { load_config(path); }) == Errc::kConfig);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("deterministic, labeled, float-exact") {
    const SyntheticSpec s = tiny_spec();
    const auto a = generate_synthetic(s);
    const auto b = generate_synthetic(s);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].descriptors.features == b[i].descriptors.features);
      CHECK(a[i].descriptors.features ==
            a[i].descriptors.features.cast<float>().cast<double>());
      CHECK(a[i].descriptors.size() == 60);
      CHECK(a[i].label == static_cast<int>(i / 6));
    }
    CHECK(a[0].descriptors.video_id == "c00_v000");
    SyntheticSpec other = s;
    other.seed = 4;
    CHECK(generate_synthetic(other)[0].descriptors.features != a[0].descriptors.features);
    other.dim = 0;
    CHECK(code_of([&] { generate_synthetic(other); }) == Errc::kConfig);
  }

  TEST_CASE("split keeps class order") {
    const auto v = generate_synthetic(tiny_spec());
    const LabeledSplit sp = split_per_class(v, 0.5);
    CHECK(sp.train.size() == 6);
    CHECK(sp.test.size() == 6);
    CHECK(sp.train[0].descriptors.video_id == "c00_v000");
    CHECK(sp.test[0].descriptors.video_id == "c00_v003");
    CHECK(labels_of(sp.train) == std::vector<int>{0, 0, 0, 1, 1, 1});
  }
}

TEST_SUITE("nearest centroid") {
  TEST_CASE("matches an exhaustive oracle") {
    std::mt19937_64 rng(5);
    std::vector<VectorXd> train, test;
    std::vector<int> tl, sl;
    for (int i = 0; i < 12; ++i) {
      train.push_back(gaussian_matrix(rng, 4, 1));
      tl.push_back(i % 3);
    }
    for (int i = 0; i < 9; ++i) {
      test.push_back(gaussian_matrix(rng, 4, 1));
      sl.push_back(i % 3);
    }
    std::vector<int> pred;
    const double acc = nearest_centroid_eval(train, tl, test, sl, &pred);
    int correct = 0;
    for (int i = 0; i < 9; ++i) {
      VectorXd c[3] = {VectorXd::Zero(4), VectorXd::Zero(4), VectorXd::Zero(4)};
      for (int j = 0; j < 12; ++j) c[tl[j]] += train[j] / 4.0;
      int best = 0;
      for (int k = 1; k < 3; ++k) {
        if ((test[i] - c[k]).norm() < (test[i] - c[best]).norm()) best = k;
      }
      CHECK(pred[i] == best);
      correct += best == sl[i];
    }
    CHECK(acc == doctest::Approx(correct / 9.0));
  }

  TEST_CASE("trivial cases and errors") {
    std::vector<VectorXd> v{VectorXd::Zero(2), VectorXd::Ones(2) * 10};
    std::vector<int> l{0, 1};
    CHECK(nearest_centroid_eval(v, l, v, l) == 1.0);
    std::vector<int> one{5, 5};
    CHECK(nearest_centroid_eval(v, one, v, one) == 1.0);
    std::vector<int> unseen{0, 2};
    CHECK(code_of([&] { nearest_centroid_eval(v, l, v, unseen); }) == Errc::kInvalidInput);
  }
}

TEST_SUITE("run pipeline") {
  TEST_CASE("every kind and encoder produces well-formed encodings") {
    const auto videos = generate_synthetic(tiny_spec());
    const LabeledSplit sp = split_per_class(videos, 0.5);
    const auto train = descriptors_of(sp.train);
    const auto test = descriptors_of(sp.test);
    for (auto kind : {WordKind::kSubspace, WordKind::kCovariance, WordKind::kGaussianSpd}) {
      for (auto enc : {EncoderMethod::kBovw, EncoderMethod::kVlad, EncoderMethod::kFisher}) {
        CAPTURE(word_kind_name(kind));
        CAPTURE(encoder_name(enc));
        const PipelineConfig c = tiny_config(kind, enc);
        const PipelineResult r = run_pipeline(c, train, test);
        REQUIRE(r.train.size() == 6);
        REQUIRE(r.test.size() == 6);
        const Eigen::Index len = enc == EncoderMethod::kBovw   ? 2 * 4
                                 : enc == EncoderMethod::kVlad ? 2 * 6
                                                               : 2 * 2 * 6;
        for (const auto& e : r.test) {
          CHECK(e.vector.size() == len);
          CHECK(e.vector.allFinite());
          CHECK(e.kind == kind);
          if (enc != EncoderMethod::kBovw && e.vector.norm() > 0) {
            CHECK(std::abs(e.vector.norm() - 1.0) < 1e-10);
          }
        }
        CHECK(r.test[0].video_id == "c00_v003");
        CHECK(r.manifest.stage_seconds.size() == 5);
      }
    }
  }

  TEST_CASE("results do not depend on the worker count or test data") {
    const auto videos = generate_synthetic(tiny_spec());
    const LabeledSplit sp = split_per_class(videos, 0.5);
    const auto train = descriptors_of(sp.train);
    const auto test = descriptors_of(sp.test);
    PipelineConfig c = tiny_config(WordKind::kCovariance, EncoderMethod::kFisher);
    c.workers = 1;
    const PipelineResult a = run_pipeline(c, train, test);
    c.workers = 4;
    const PipelineResult b = run_pipeline(c, train, test);
    for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].vector == b.test[i].vector);
    CHECK(a.manifest.config_hash == b.manifest.config_hash);

    // swapping in different evaluation videos leaves the fitted models alone
    const std::vector<DescriptorSet> other_test(test.begin(), test.begin() + 2);
    const PipelineResult d = run_pipeline(c, train, other_test);
    CHECK(d.alignment.gmm.means == a.alignment.gmm.means);
    CHECK(d.codebook.gmm->means == a.codebook.gmm->means);
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].vector == d.train[i].vector);

    const std::string manifest = a.manifest.to_json();
    CHECK(manifest.find("\"alignment-gmm\"") != std::string::npos);
    CHECK(manifest.find("\"config_hash\"") != std::string::npos);
  }

  TEST_CASE("stage failures name the stage") {
    const auto videos = generate_synthetic(tiny_spec());
    const auto train = descriptors_of(videos);
    std::vector<DescriptorSet> test{{"short", MatrixXd::Ones(3, 6)}};
    const PipelineConfig c = tiny_config(WordKind::kCovariance, EncoderMethod::kBovw);
    try {
      run_pipeline(c, train, test);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "words-test");
      CHECK(e.code() == Errc::kInsufficientFeatures);
      CHECK(std::string(e.what()).rfind("[words-test] ", 0) == 0);
    }
    PipelineConfig bad = c;
    bad.descriptor_dim = 5;
    try {
      run_pipeline(bad, train, train);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "alignment");
      CHECK(classify(e.code()) == ErrorClass::kConfig);
    }
  }
}
