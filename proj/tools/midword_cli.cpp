// midword: stage-wise command line driver.
//
//   midword synth        --output DIR
//   midword fit-gmm      --input TRAIN_DIR --output GMM --pca PCA
//   midword build-words  --input DESC_DIR --gmm GMM --pca PCA --output WORDS_DIR
//   midword fit-codebook --input WORDS_DIR --output CODEBOOK
//   midword encode       --input WORDS_DIR --codebook CODEBOOK --output ENC [--text TSV]
//   midword evaluate     --train ENC --test ENC --labels TSV
//   midword run-all      --input SYNTH_DIR --output WORK_DIR
//
// Exit codes: 0 ok, 2 configuration, 3 data, 4 numerical failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "midword/config.hpp"
#include "midword/error.hpp"
#include "midword/io.hpp"
#include "midword/pipeline.hpp"
#include "midword/synthetic.hpp"

namespace fs = std::filesystem;
using namespace midword;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

// Settings shared by every subcommand; flags override the config file.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string word_kind;
  std::string encoder;
  bool strict_paper_fv = false;
  bool allow_pad = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "versioned JSON config file");
    app->add_option("--seed", seed, "root seed");
    app->add_option("--workers", workers, "worker threads (0 = all cores)");
    app->add_option("--word-kind", word_kind, "sub | cov | gau")
        ->check(CLI::IsMember({"sub", "cov", "gau"}));
    app->add_option("--encoder", encoder, "bovw | vlad | fv")
        ->check(CLI::IsMember({"bovw", "vlad", "fv"}));
    app->add_flag("--strict-paper-fv", strict_paper_fv,
                  "Fisher variance block without the -1 correction");
    app->add_flag("--allow-pad", allow_pad, "pad videos with fewer than T features");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig::paper() : load_config(config_path);
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    if (!word_kind.empty()) c.word_kind = parse_word_kind(word_kind);
    if (!encoder.empty()) c.encoder = parse_encoder(encoder);
    if (strict_paper_fv) c.strict_paper_fv = true;
    if (allow_pad) c.pad_short_videos = true;
    return c;
  }
};

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void log(const std::string& msg) { std::cerr << "midword: " << msg << '\n'; }

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw Error(Errc::kIo, "'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(Errc::kInvalidInput, "no " + ext + " files in '" + dir.string() + "'");
  return out;
}

std::vector<DescriptorSet> read_descriptor_dir(const fs::path& dir) {
  std::vector<DescriptorSet> out;
  for (const auto& p : files_with_extension(dir, ".mwds")) {
    out.push_back(io::read_file(p, [](std::istream& in) { return io::read_descriptor_set(in); }));
  }
  return out;
}

std::vector<std::vector<MidLevelWord>> read_words_dir(const fs::path& dir) {
  std::vector<std::vector<MidLevelWord>> out;
  for (const auto& p : files_with_extension(dir, ".mwwd")) {
    out.push_back(io::read_file(p, [](std::istream& in) { return io::read_words(in); }));
  }
  return out;
}

AlignmentModel read_alignment(const fs::path& gmm, const fs::path& pca) {
  AlignmentModel m;
  m.gmm = io::read_file(gmm, [](std::istream& in) { return io::read_gmm(in); });
  m.pca = io::read_file(pca, [](std::istream& in) { return io::read_pca(in); });
  return m;
}

void write_alignment(const AlignmentModel& m, const fs::path& gmm, const fs::path& pca) {
  ensure_parent(gmm);
  ensure_parent(pca);
  io::write_file(gmm, [&](std::ostream& o) { io::write_gmm(o, m.gmm); });
  io::write_file(pca, [&](std::ostream& o) { io::write_pca(o, m.pca); });
}

void write_words_dir(const fs::path& dir, const std::vector<DescriptorSet>& videos,
                     const std::vector<std::vector<MidLevelWord>>& words) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < videos.size(); ++i) {
    io::write_file(dir / (videos[i].video_id + ".mwwd"),
                   [&](std::ostream& o) { io::write_words(o, words[i]); });
  }
}

void write_codebook(const fs::path& path, const CodebookModel& cb) {
  ensure_parent(path);
  io::write_file(path, [&](std::ostream& o) {
    if (cb.gmm) {
      io::write_riemannian_gmm(o, *cb.gmm);
    } else {
      io::write_karcher_codebook(o, *cb.karcher, cb.vlad_pca ? &*cb.vlad_pca : nullptr);
    }
  });
}

CodebookModel read_codebook(const fs::path& path, EncoderMethod encoder) {
  const std::string magic = io::peek_magic(path);
  CodebookModel cb;
  if (magic == "MWRG") {
    cb.gmm = io::read_file(path, [](std::istream& in) { return io::read_riemannian_gmm(in); });
  } else if (magic == "MWCB") {
    auto stored = io::read_file(path, [](std::istream& in) { return io::read_karcher_codebook(in); });
    cb.karcher = std::move(stored.codebook);
    cb.vlad_pca = std::move(stored.pca);
  } else {
    throw Error(Errc::kFormat, "'" + path.string() + "' is not a codebook file");
  }
  const bool want_gmm = encoder == EncoderMethod::kFisher;
  if (want_gmm != cb.gmm.has_value() || (encoder == EncoderMethod::kVlad && !cb.vlad_pca)) {
    throw Error(Errc::kConfig, "codebook '" + path.string() + "' does not fit encoder " +
                                   std::string(encoder_name(encoder)));
  }
  return cb;
}

std::vector<EncodedVideo> encode_all(const PipelineConfig& c, const CodebookModel& cb,
                                     const std::vector<std::vector<MidLevelWord>>& words) {
  std::vector<EncodedVideo> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(encode_video(c, cb, w));
  return out;
}

void write_encodings(const fs::path& path, const std::vector<EncodedVideo>& enc,
                     const std::string& text_path) {
  ensure_parent(path);
  io::write_file(path, [&](std::ostream& o) { io::write_encodings(o, enc); });
  if (!text_path.empty()) {
    io::write_file(text_path, [&](std::ostream& o) { io::write_encodings_text(o, enc); });
  }
}

std::map<std::string, int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  std::map<std::string, int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string id;
    int label = 0;
    if (!std::getline(fields, id, '\t') || !(fields >> label)) {
      throw Error(Errc::kFormat, path.string() + ":" + std::to_string(lineno) + ": bad label line");
    }
    labels[id] = label;
  }
  return labels;
}

double evaluate(const std::vector<EncodedVideo>& train, const std::vector<EncodedVideo>& test,
                const std::map<std::string, int>& labels, std::vector<int>* predictions) {
  auto labels_for = [&](const std::vector<EncodedVideo>& enc) {
    std::vector<int> out;
    for (const auto& e : enc) {
      const auto it = labels.find(e.video_id);
      if (it == labels.end()) throw Error(Errc::kInvalidInput, "no label for '" + e.video_id + "'");
      out.push_back(it->second);
    }
    return out;
  };
  const auto tl = labels_for(train);
  const auto sl = labels_for(test);
  return nearest_centroid_eval(vectors_of(train), tl, vectors_of(test), sl, predictions);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string output;
  SyntheticSpec spec;
  double train_fraction = 0.5;
};

void cmd_synth(const SynthArgs& a, std::optional<std::uint64_t> seed) {
  SyntheticSpec spec = a.spec;
  if (seed) spec.seed = *seed;
  const auto videos = generate_synthetic(spec);
  const LabeledSplit split = split_per_class(videos, a.train_fraction);
  const fs::path root(a.output);
  std::ofstream labels;
  fs::create_directories(root);
  labels.open(root / "labels.tsv");
  if (!labels) throw Error(Errc::kIo, "cannot write labels.tsv");
  labels << "# video_id\tlabel\tsplit\n";
  for (const auto& [name, part] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
    fs::create_directories(root / name);
    for (const LabeledVideo& v : *part) {
      io::write_file(root / name / (v.descriptors.video_id + ".mwds"),
                     [&](std::ostream& o) { io::write_descriptor_set(o, v.descriptors); });
      labels << v.descriptors.video_id << '\t' << v.label << '\t' << name << '\n';
    }
  }
  PipelineConfig desk = PipelineConfig::desk();
  desk.descriptor_dim = spec.dim;
  desk.seed = spec.seed;
  save_config(root / "config.json", desk);
  log("wrote " + std::to_string(videos.size()) + " videos to " + root.string());
}

int run(int argc, char** argv) {
  CLI::App app{"Mid-level words on Riemannian manifolds: alignment, words, codebooks, encodings"};
  app.require_subcommand(1);
  Common common;

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic descriptor corpus");
  common.attach(synth_cmd);
  synth_cmd->add_option("--output", synth.output, "output directory")->required();
  synth_cmd->add_option("--classes", synth.spec.class_count);
  synth_cmd->add_option("--videos-per-class", synth.spec.videos_per_class);
  synth_cmd->add_option("--features", synth.spec.features_per_video, "features per video L");
  synth_cmd->add_option("--dim", synth.spec.dim, "descriptor dimension d");
  synth_cmd->add_flag("--shared-means", synth.spec.shared_means,
                      "classes differ only in covariance orientation");
  synth_cmd->add_option("--train-fraction", synth.train_fraction);

  std::string input, output, gmm_path, pca_path, codebook_path, text_path;
  auto* fit_gmm = app.add_subcommand("fit-gmm", "fit descriptor PCA and the universal GMM");
  common.attach(fit_gmm);
  fit_gmm->add_option("--input", input, "directory of training .mwds files")->required();
  fit_gmm->add_option("--output", output, "GMM output (.mwgm)")->required();
  fit_gmm->add_option("--pca", pca_path, "PCA output (.mwpc)")->required();

  auto* words_cmd = app.add_subcommand("build-words", "turn descriptor sets into mid-level words");
  common.attach(words_cmd);
  words_cmd->add_option("--input", input, "directory of .mwds files")->required();
  words_cmd->add_option("--gmm", gmm_path, "universal GMM (.mwgm)")->required();
  words_cmd->add_option("--pca", pca_path, "descriptor PCA (.mwpc)")->required();
  words_cmd->add_option("--output", output, "directory for .mwwd files")->required();

  auto* cb_cmd = app.add_subcommand("fit-codebook", "learn a Karcher codebook or Riemannian GMM");
  common.attach(cb_cmd);
  cb_cmd->add_option("--input", input, "directory of training .mwwd files")->required();
  cb_cmd->add_option("--output", output, "codebook output (.mwcb / .mwrg)")->required();

  auto* enc_cmd = app.add_subcommand("encode", "encode word sets into fixed-length vectors");
  common.attach(enc_cmd);
  enc_cmd->add_option("--input", input, "directory of .mwwd files")->required();
  enc_cmd->add_option("--codebook", codebook_path, "codebook from fit-codebook")->required();
  enc_cmd->add_option("--output", output, "encodings output (.mwev)")->required();
  enc_cmd->add_option("--text", text_path, "also write a tab-separated export");

  std::string train_enc, test_enc, labels_path, predictions_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "nearest-centroid accuracy");
  common.attach(eval_cmd);
  eval_cmd->add_option("--train", train_enc, "training encodings (.mwev)")->required();
  eval_cmd->add_option("--test", test_enc, "test encodings (.mwev)")->required();
  eval_cmd->add_option("--labels", labels_path, "labels.tsv")->required();
  eval_cmd->add_option("--predictions", predictions_path, "write id<TAB>predicted label");

  auto* all_cmd = app.add_subcommand("run-all", "every stage on a synth directory");
  common.attach(all_cmd);
  all_cmd->add_option("--input", input, "directory written by synth")->required();
  all_cmd->add_option("--output", output, "work directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*synth_cmd) {
    cmd_synth(synth, common.seed);
    return 0;
  }
  const PipelineConfig config = common.resolve();

  if (*fit_gmm) {
    const auto train = read_descriptor_dir(input);
    const AlignmentModel m = fit_alignment(config, TrainingSet<DescriptorSet>(train));
    write_alignment(m, output, pca_path);
    log("universal GMM: K=" + std::to_string(m.gmm.components()) + ", " +
        std::to_string(m.trace.log_likelihood.size()) + " EM iterations");
  } else if (*words_cmd) {
    const auto videos = read_descriptor_dir(input);
    const AlignmentModel m = read_alignment(gmm_path, pca_path);
    write_words_dir(output, videos, build_words(config, m, videos));
    log("words for " + std::to_string(videos.size()) + " videos");
  } else if (*cb_cmd) {
    std::vector<MidLevelWord> pooled;
    for (auto& w : read_words_dir(input)) pooled.insert(pooled.end(), w.begin(), w.end());
    const CodebookModel cb = fit_codebook(config, TrainingSet<MidLevelWord>(pooled));
    write_codebook(output, cb);
    log("codebook from " + std::to_string(pooled.size()) + " words");
  } else if (*enc_cmd) {
    const CodebookModel cb = read_codebook(codebook_path, config.encoder);
    write_encodings(output, encode_all(config, cb, read_words_dir(input)), text_path);
  } else if (*eval_cmd) {
    const auto tr = io::read_file(train_enc, [](std::istream& in) { return io::read_encodings(in); });
    const auto te = io::read_file(test_enc, [](std::istream& in) { return io::read_encodings(in); });
    std::vector<int> pred;
    const double acc = evaluate(tr, te, read_labels(labels_path), &pred);
    std::printf("accuracy\t%.6f\t%zu\n", acc, te.size());
    if (!predictions_path.empty()) {
      io::write_file(predictions_path, [&](std::ostream& o) {
        for (std::size_t i = 0; i < te.size(); ++i) o << te[i].video_id << '\t' << pred[i] << '\n';
      });
    }
  } else if (*all_cmd) {
    const fs::path in(input), work(output);
    fs::create_directories(work);
    const auto train = read_descriptor_dir(in / "train");
    const auto test = read_descriptor_dir(in / "test");
    const PipelineResult r = run_pipeline(config, train, test);
    write_alignment(r.alignment, work / "alignment.mwgm", work / "alignment.mwpc");
    write_codebook(work / (r.codebook.gmm ? "codebook.mwrg" : "codebook.mwcb"), r.codebook);
    write_encodings(work / "train.mwev", r.train, "");
    write_encodings(work / "test.mwev", r.test, (work / "test.tsv").string());
    save_config(work / "config.json", config);
    io::write_file(work / "manifest.json", [&](std::ostream& o) { o << r.manifest.to_json(); });
    const fs::path labels = in / "labels.tsv";
    if (fs::exists(labels)) {
      const double acc = evaluate(r.train, r.test, read_labels(labels), nullptr);
      std::printf("accuracy\t%.6f\t%zu\n", acc, r.test.size());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "midword: error: " << e.what() << '\n';
    switch (classify(e.code())) {
      case ErrorClass::kConfig: return kExitConfig;
      case ErrorClass::kNumerical: return kExitNumerical;
      case ErrorClass::kData: return kExitData;
    }
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "midword: error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "midword: internal error: " << e.what() << '\n';
    return 1;
  }
}
