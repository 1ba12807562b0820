#include "midword/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <limits>
#include <map>

#include "json.hpp"
#include "midword/error.hpp"
#include "midword/random.hpp"
#include "parallel.hpp"

namespace midword {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

template <typename F>
auto run_stage(const char* name, RunManifest* manifest, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      if (manifest) {
        manifest->stage_seconds.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } else {
      auto result = body();
      if (manifest) {
        manifest->stage_seconds.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

EmOptions em_options(const PipelineConfig& config) {
  EmOptions em = config.em;
  em.workers = config.workers;
  return em;
}

}  // namespace

AlignmentModel fit_alignment(const PipelineConfig& config, TrainingSet<DescriptorSet> train) {
  const auto videos = train.items();
  if (videos.empty()) throw Error(Errc::kTooFewSamples, "no training videos");
  const Eigen::Index d = videos.front().dim();
  config.validate(d);
  Eigen::Index total = 0;
  for (const DescriptorSet& v : videos) {
    v.validate();
    if (v.dim() != d) {
      throw Error(Errc::kDimensionMismatch, "video '" + v.video_id + "' has dim " +
                                                std::to_string(v.dim()));
    }
    total += v.size();
  }
  MatrixXd pooled(total, d);
  Eigen::Index row = 0;
  for (const DescriptorSet& v : videos) {
    pooled.middleRows(row, v.size()) = v.features;
    row += v.size();
  }
  AlignmentModel model;
  model.pca = fit_pca(pooled, config.reduced_descriptor_dim(d));
  auto fit = fit_spherical_gmm(model.pca.apply_rows(pooled), config.gmm_components,
                               derive_seed(config.seed, kAlignmentSeedLabel), em_options(config));
  model.gmm = std::move(fit.model);
  model.trace = std::move(fit.trace);
  return model;
}

std::vector<MidLevelWord> build_words(const PipelineConfig& config, const AlignmentModel& model,
                                      const DescriptorSet& video) {
  video.validate();
  DescriptorSet projected{video.video_id, model.pca.apply_rows(video.features)};
  const auto groups = build_feature_groups(model.gmm, projected, config.top_t,
                                           GroupingOptions{config.pad_short_videos});
  std::vector<MidLevelWord> words;
  words.reserve(groups.size());
  for (const FeatureGroup& g : groups) {
    words.push_back(model_word(g, config.word_kind, config.subspace_r));
  }
  return words;
}

std::vector<std::vector<MidLevelWord>> build_words(const PipelineConfig& config,
                                                   const AlignmentModel& model,
                                                   std::span<const DescriptorSet> videos) {
  std::vector<std::optional<std::vector<MidLevelWord>>> slots(videos.size());
  detail::parallel_for(videos.size(), config.workers, [&](std::size_t i) {
    slots[i] = build_words(config, model, videos[i]);
  });
  std::vector<std::vector<MidLevelWord>> out;
  out.reserve(videos.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

CodebookModel fit_codebook(const PipelineConfig& config, TrainingSet<MidLevelWord> train_words) {
  const auto words = train_words.items();
  const int m = config.effective_codebook_size();
  const std::uint64_t seed = derive_seed(config.seed, kCodebookSeedLabel);
  CodebookModel model;
  if (config.encoder == EncoderMethod::kFisher) {
    auto fit = fit_riemannian_gmm(words, m, config.embedding_dim, seed, em_options(config));
    model.gmm = std::move(fit.model);
    model.trace = std::move(fit.trace.log_likelihood);
    return model;
  }
  KMeansOptions km;
  km.max_iter = config.kmeans_max_iter;
  km.init = config.center_init;
  km.karcher = config.karcher;
  km.workers = config.workers;
  auto clustering = k_karcher_means(words, m, seed, km);
  model.karcher = std::move(clustering.codebook);
  model.trace = std::move(clustering.objective);
  if (config.encoder == EncoderMethod::kVlad) {
    model.vlad_pca = fit_pca(embed_words(words), config.embedding_dim);
  }
  return model;
}

EncodedVideo encode_video(const PipelineConfig& config, const CodebookModel& codebook,
                          std::span<const MidLevelWord> words) {
  switch (config.encoder) {
    case EncoderMethod::kBovw:
      if (!codebook.karcher) throw Error(Errc::kInvalidInput, "BoVW needs a Karcher codebook");
      return encode_bovw(*codebook.karcher, words);
    case EncoderMethod::kVlad:
      if (!codebook.karcher || !codebook.vlad_pca) {
        throw Error(Errc::kInvalidInput, "VLAD needs a Karcher codebook and a PCA");
      }
      return encode_vlad(*codebook.karcher, *codebook.vlad_pca, words);
    case EncoderMethod::kFisher:
      if (!codebook.gmm) throw Error(Errc::kInvalidInput, "Fisher vectors need a Riemannian GMM");
      return encode_fisher(*codebook.gmm, words, FisherOptions{config.strict_paper_fv});
  }
  throw Error(Errc::kInvalidInput, "unknown encoder");
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hash;
  j["root_seed"] = root_seed;
  for (const auto& [stage, seed] : stage_seeds) j["stage_seeds"][stage] = seed;
  for (const auto& [stage, secs] : stage_seconds) {
    j["stage_seconds"].push_back({{"stage", stage}, {"seconds", secs}});
  }
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const PipelineConfig& config, std::span<const DescriptorSet> train,
                            std::span<const DescriptorSet> test) {
  PipelineResult result;
  RunManifest& manifest = result.manifest;
  manifest.config_hash = config_hash(config);
  manifest.root_seed = config.seed;
  manifest.stage_seeds = {{std::string(kAlignmentSeedLabel), derive_seed(config.seed, kAlignmentSeedLabel)},
                          {std::string(kCodebookSeedLabel), derive_seed(config.seed, kCodebookSeedLabel)}};

  result.alignment = run_stage("alignment", &manifest, [&] {
    return fit_alignment(config, TrainingSet<DescriptorSet>(train));
  });
  const auto train_words = run_stage("words", &manifest, [&] {
    return build_words(config, result.alignment, train);
  });
  const auto test_words = run_stage("words-test", &manifest, [&] {
    return build_words(config, result.alignment, test);
  });

  std::vector<MidLevelWord> pooled;
  for (const auto& ws : train_words) pooled.insert(pooled.end(), ws.begin(), ws.end());
  result.codebook = run_stage("codebook", &manifest, [&] {
    return fit_codebook(config, TrainingSet<MidLevelWord>(pooled));
  });

  auto encode_all = [&](const std::vector<std::vector<MidLevelWord>>& per_video) {
    std::vector<std::optional<EncodedVideo>> slots(per_video.size());
    detail::parallel_for(per_video.size(), config.workers, [&](std::size_t i) {
      slots[i] = encode_video(config, result.codebook, per_video[i]);
    });
    std::vector<EncodedVideo> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
  };
  run_stage("encode", &manifest, [&] {
    result.train = encode_all(train_words);
    result.test = encode_all(test_words);
  });
  return result;
}

double nearest_centroid_eval(std::span<const VectorXd> train, std::span<const int> train_labels,
                             std::span<const VectorXd> test, std::span<const int> test_labels,
                             std::vector<int>* predictions) {
  if (train.size() != train_labels.size() || test.size() != test_labels.size()) {
    throw Error(Errc::kInvalidInput, "vectors and labels differ in count");
  }
  if (train.empty() || test.empty()) throw Error(Errc::kInvalidInput, "empty split");
  std::map<int, std::pair<VectorXd, int>> sums;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto [it, inserted] = sums.try_emplace(train_labels[i], VectorXd::Zero(train[i].size()), 0);
    if (train[i].size() != it->second.first.size()) {
      throw Error(Errc::kDimensionMismatch, "encodings differ in length");
    }
    it->second.first += train[i];
    ++it->second.second;
  }
  for (int label : test_labels) {
    if (!sums.contains(label)) {
      throw Error(Errc::kInvalidInput, "class " + std::to_string(label) + " has no training vectors");
    }
  }
  std::size_t correct = 0;
  if (predictions) predictions->clear();
  for (std::size_t i = 0; i < test.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [label, sum] : sums) {
      const double d = (test[i] - sum.first / sum.second).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = label;
      }
    }
    if (predictions) predictions->push_back(best);
    if (best == test_labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<VectorXd> vectors_of(std::span<const EncodedVideo> encoded) {
  std::vector<VectorXd> out;
  out.reserve(encoded.size());
  for (const EncodedVideo& e : encoded) out.push_back(e.vector);
  return out;
}

VectorXd raw_mean_encoding(const DescriptorSet& video) {
  video.validate();
  return video.features.colwise().mean().transpose();
}

}  // namespace midword
