#include "midword/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "midword/error.hpp"
#include "midword/random.hpp"

namespace midword {

using nlohmann::json;

PipelineConfig PipelineConfig::paper() { return PipelineConfig{}; }

PipelineConfig PipelineConfig::desk() {
  PipelineConfig c;
  c.descriptor_dim = 8;
  c.pca_factor = 1.0;
  c.gmm_components = 16;
  c.top_t = 16;
  c.codebook_size = 4;
  c.embedding_dim = 16;
  return c;
}

int PipelineConfig::effective_codebook_size() const {
  if (codebook_size > 0) return codebook_size;
  return encoder == EncoderMethod::kBovw ? 64 : 32;
}

Eigen::Index PipelineConfig::reduced_descriptor_dim(Eigen::Index raw_dim) const {
  const auto p = static_cast<Eigen::Index>(std::lround(static_cast<double>(raw_dim) * pca_factor));
  return std::clamp<Eigen::Index>(p, 1, raw_dim);
}

Eigen::Index PipelineConfig::word_embedding_dim(Eigen::Index raw_dim) const {
  const Eigen::Index p = reduced_descriptor_dim(raw_dim);
  const Eigen::Index n = word_kind == WordKind::kGaussianSpd ? p + 1 : p;
  return n * (n + 1) / 2;
}

void PipelineConfig::validate(Eigen::Index raw_dim) const {
  auto fail = [](const std::string& what) { throw Error(Errc::kConfig, what); };
  if (descriptor_dim < 0) fail("descriptor_dim must be >= 0");
  if (descriptor_dim > 0 && raw_dim != descriptor_dim) {
    fail("data dimension " + std::to_string(raw_dim) + " does not match descriptor_dim " +
         std::to_string(descriptor_dim));
  }
  if (raw_dim < 1) fail("descriptor dimension must be positive");
  if (!(pca_factor > 0.0 && pca_factor <= 1.0)) fail("pca_factor must be in (0, 1]");
  if (gmm_components < 1 || top_t < 1 || subspace_r < 1 || codebook_size < 0 ||
      embedding_dim < 1 || kmeans_max_iter < 1 || em.max_iter < 1 || karcher.max_iter < 1) {
    fail("counts must be positive");
  }
  if (top_t <= subspace_r) fail("T must exceed the subspace dimension r");
  if (top_t < 2) fail("T must be at least 2");
  const Eigen::Index p = reduced_descriptor_dim(raw_dim);
  if (word_kind == WordKind::kSubspace && subspace_r >= p) {
    fail("subspace dimension r must be below the reduced descriptor dimension " +
         std::to_string(p));
  }
  if (encoder != EncoderMethod::kBovw && embedding_dim > word_embedding_dim(raw_dim)) {
    fail("D = " + std::to_string(embedding_dim) + " exceeds the word embedding dimension " +
         std::to_string(word_embedding_dim(raw_dim)));
  }
}

namespace {

json to_json(const PipelineConfig& c, bool include_workers) {
  json j = {
      {"version", kConfigVersion},
      {"descriptor_dim", c.descriptor_dim},
      {"pca_factor", c.pca_factor},
      {"gmm_components", c.gmm_components},
      {"top_t", c.top_t},
      {"word_kind", std::string(word_kind_name(c.word_kind))},
      {"subspace_r", c.subspace_r},
      {"codebook_size", c.codebook_size},
      {"embedding_dim", c.embedding_dim},
      {"encoder", std::string(encoder_name(c.encoder))},
      {"seed", c.seed},
      {"strict_paper_fv", c.strict_paper_fv},
      {"pad_short_videos", c.pad_short_videos},
      {"em", {{"max_iter", c.em.max_iter},
              {"rel_tol", c.em.rel_tol},
              {"variance_floor_ratio", c.em.variance_floor_ratio}}},
      {"karcher", {{"max_iter", c.karcher.max_iter}, {"tol", c.karcher.tol}}},
      {"kmeans_max_iter", c.kmeans_max_iter},
      {"center_init", c.center_init == CenterInit::kPlusPlus ? "kmeans++" : "random"},
  };
  if (include_workers) j["workers"] = c.workers;
  return j;
}

}  // namespace

std::string config_to_json(const PipelineConfig& config) {
  return to_json(config, true).dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::kConfig, "config must be a JSON object");
  const int version = j.value("version", 0);
  if (version != kConfigVersion) {
    throw Error(Errc::kConfig, "unsupported config version " + std::to_string(version));
  }
  PipelineConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "version") continue;
      else if (key == "descriptor_dim") c.descriptor_dim = value.get<int>();
      else if (key == "pca_factor") c.pca_factor = value.get<double>();
      else if (key == "gmm_components") c.gmm_components = value.get<int>();
      else if (key == "top_t") c.top_t = value.get<int>();
      else if (key == "word_kind") c.word_kind = parse_word_kind(value.get<std::string>());
      else if (key == "subspace_r") c.subspace_r = value.get<int>();
      else if (key == "codebook_size") c.codebook_size = value.get<int>();
      else if (key == "embedding_dim") c.embedding_dim = value.get<int>();
      else if (key == "encoder") c.encoder = parse_encoder(value.get<std::string>());
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<unsigned>();
      else if (key == "strict_paper_fv") c.strict_paper_fv = value.get<bool>();
      else if (key == "pad_short_videos") c.pad_short_videos = value.get<bool>();
      else if (key == "kmeans_max_iter") c.kmeans_max_iter = value.get<int>();
      else if (key == "center_init") {
        const auto s = value.get<std::string>();
        if (s == "kmeans++") c.center_init = CenterInit::kPlusPlus;
        else if (s == "random") c.center_init = CenterInit::kRandom;
        else throw Error(Errc::kConfig, "unknown center_init '" + s + "'");
      } else if (key == "em") {
        c.em.max_iter = value.value("max_iter", c.em.max_iter);
        c.em.rel_tol = value.value("rel_tol", c.em.rel_tol);
        c.em.variance_floor_ratio = value.value("variance_floor_ratio", c.em.variance_floor_ratio);
      } else if (key == "karcher") {
        c.karcher.max_iter = value.value("max_iter", c.karcher.max_iter);
        c.karcher.tol = value.value("tol", c.karcher.tol);
      } else {
        throw Error(Errc::kConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kConfig, std::string("bad config value: ") + e.what());
  }
  c.em.workers = c.workers;
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kConfig, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIo, "cannot write config '" + path.string() + "'");
  out << config_to_json(config);
}

std::uint64_t config_hash(const PipelineConfig& config) {
  return fnv1a(to_json(config, false).dump());
}

}  // namespace midword
