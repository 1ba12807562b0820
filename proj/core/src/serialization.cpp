#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "midword/error.hpp"
#include "midword/io.hpp"

namespace midword::io {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename U>
void put_uint(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_uint(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(Errc::kFormat, "unexpected end of file");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_u32(std::ostream& out, std::uint64_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::kFormat, "value does not fit in u32");
  }
  put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(v));
}
std::uint32_t get_u32(std::istream& in) { return get_uint<std::uint32_t>(in); }
void put_u64(std::ostream& out, std::uint64_t v) { put_uint<std::uint64_t>(out, v); }
std::uint64_t get_u64(std::istream& in) { return get_uint<std::uint64_t>(in); }

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void put_f32(std::ostream& out, float v) {
  put_uint<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
}
float get_f32(std::istream& in) { return std::bit_cast<float>(get_uint<std::uint32_t>(in)); }

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const std::uint32_t len = get_u32(in);
  if (len > (1u << 20)) throw Error(Errc::kFormat, "implausible string length");
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw Error(Errc::kFormat, "truncated string");
  return s;
}

void put_header(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
  put_u32(out, kFormatVersion);
}

void expect_header(std::istream& in, const char (&magic)[5]) {
  char got[4];
  if (!in.read(got, 4)) throw Error(Errc::kFormat, "missing magic");
  if (std::string(got, 4) != std::string(magic, 4)) {
    throw Error(Errc::kFormat, "bad magic '" + std::string(got, 4) + "', expected '" +
                                   std::string(magic, 4) + "'");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kFormatVersion) {
    throw Error(Errc::kFormat, "unsupported version " + std::to_string(version));
  }
}

void check_count(std::uint64_t n) {
  if (n > kMaxElements) throw Error(Errc::kFormat, "implausible element count");
}

// Row-major matrix payload.
void put_matrix(std::ostream& out, const MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
  }
}

MatrixXd get_matrix(std::istream& in, std::uint64_t rows, std::uint64_t cols) {
  check_count(rows * cols);
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get_f64(in);
  }
  return m;
}

void put_vector(std::ostream& out, const VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}

VectorXd get_vector(std::istream& in, std::uint64_t n) {
  check_count(n);
  VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(in);
  return v;
}

void put_pca_body(std::ostream& out, const PcaProjection& pca) {
  put_u32(out, static_cast<std::uint64_t>(pca.input_dim()));
  put_u32(out, static_cast<std::uint64_t>(pca.output_dim()));
  put_vector(out, pca.mean());
  put_matrix(out, pca.projection());
}

PcaProjection get_pca_body(std::istream& in) {
  const std::uint32_t input = get_u32(in);
  const std::uint32_t output = get_u32(in);
  VectorXd mean = get_vector(in, input);
  MatrixXd proj = get_matrix(in, output, input);
  return PcaProjection(std::move(mean), std::move(proj));
}

WordKind get_kind(std::istream& in) {
  const std::uint32_t tag = get_u32(in);
  if (tag > 2) throw Error(Errc::kFormat, "unknown word kind tag " + std::to_string(tag));
  return static_cast<WordKind>(tag);
}

MidLevelWord make_word(WordKind kind, const MatrixXd& payload, WordProvenance prov) {
  if (kind == WordKind::kSubspace) {
    return MidLevelWord(kind, GrassmannPoint(payload), std::move(prov));
  }
  return MidLevelWord(kind, SymPosDef(payload), std::move(prov));
}

MatrixXd payload_matrix(const MidLevelWord& w) {
  return w.is_subspace() ? w.subspace().basis() : w.spd().matrix();
}

}  // namespace

void write_descriptor_set(std::ostream& out, const DescriptorSet& set) {
  set.validate();
  put_header(out, "MWDS");
  put_string(out, set.video_id);
  put_u32(out, static_cast<std::uint64_t>(set.dim()));
  put_u64(out, static_cast<std::uint64_t>(set.size()));
  for (Eigen::Index l = 0; l < set.size(); ++l) {
    for (Eigen::Index j = 0; j < set.dim(); ++j) {
      put_f32(out, static_cast<float>(set.features(l, j)));
    }
  }
}

DescriptorSet read_descriptor_set(std::istream& in) {
  expect_header(in, "MWDS");
  DescriptorSet set;
  set.video_id = get_string(in);
  const std::uint32_t d = get_u32(in);
  const std::uint64_t l = get_u64(in);
  check_count(l * d);
  set.features.resize(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < set.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.features.cols(); ++j) {
      set.features(i, j) = static_cast<double>(get_f32(in));
    }
  }
  set.validate();
  return set;
}

void write_gmm(std::ostream& out, const SphericalGmm& gmm) {
  gmm.validate();
  put_header(out, "MWGM");
  put_u32(out, static_cast<std::uint64_t>(gmm.components()));
  put_u32(out, static_cast<std::uint64_t>(gmm.dim()));
  put_vector(out, gmm.weights);
  put_matrix(out, gmm.means);
  put_vector(out, gmm.variances);
}

SphericalGmm read_gmm(std::istream& in) {
  expect_header(in, "MWGM");
  const std::uint32_t k = get_u32(in);
  const std::uint32_t d = get_u32(in);
  SphericalGmm gmm;
  gmm.weights = get_vector(in, k);
  gmm.means = get_matrix(in, k, d);
  gmm.variances = get_vector(in, k);
  gmm.validate();
  return gmm;
}

void write_pca(std::ostream& out, const PcaProjection& pca) {
  put_header(out, "MWPC");
  put_pca_body(out, pca);
}

PcaProjection read_pca(std::istream& in) {
  expect_header(in, "MWPC");
  return get_pca_body(in);
}

void write_words(std::ostream& out, std::span<const MidLevelWord> words) {
  if (words.empty()) throw Error(Errc::kInvalidInput, "no words to write");
  for (const MidLevelWord& w : words) require_compatible(words.front(), w);
  put_header(out, "MWWD");
  put_u32(out, static_cast<std::uint64_t>(words.front().kind()));
  put_u32(out, static_cast<std::uint64_t>(words.front().rows()));
  put_u32(out, static_cast<std::uint64_t>(words.front().cols()));
  put_u64(out, words.size());
  for (const MidLevelWord& w : words) put_matrix(out, payload_matrix(w));
  for (const MidLevelWord& w : words) {
    put_string(out, w.provenance().video_id);
    put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(w.provenance().component));
  }
}

std::vector<MidLevelWord> read_words(std::istream& in) {
  expect_header(in, "MWWD");
  const WordKind kind = get_kind(in);
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  const std::uint64_t count = get_u64(in);
  check_count(count * rows * cols);
  std::vector<MatrixXd> payloads;
  payloads.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) payloads.push_back(get_matrix(in, rows, cols));
  std::vector<MidLevelWord> words;
  words.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    WordProvenance prov;
    prov.video_id = get_string(in);
    prov.component = static_cast<int>(static_cast<std::int32_t>(get_u32(in)));
    words.push_back(make_word(kind, payloads[i], std::move(prov)));
  }
  return words;
}

void write_karcher_codebook(std::ostream& out, const KarcherCodebook& codebook,
                            const PcaProjection* pca) {
  if (codebook.centers.empty()) throw Error(Errc::kInvalidInput, "empty codebook");
  const MidLevelWord& first = codebook.centers.front();
  put_header(out, "MWCB");
  put_u32(out, static_cast<std::uint64_t>(codebook.kind));
  put_u32(out, static_cast<std::uint64_t>(first.rows()));
  put_u32(out, static_cast<std::uint64_t>(first.cols()));
  put_u32(out, codebook.size());
  put_u32(out, pca ? static_cast<std::uint64_t>(pca->output_dim()) : 0);
  for (const MidLevelWord& c : codebook.centers) put_matrix(out, payload_matrix(c));
  if (pca) put_pca_body(out, *pca);
}

StoredKarcherCodebook read_karcher_codebook(std::istream& in) {
  expect_header(in, "MWCB");
  StoredKarcherCodebook stored;
  stored.codebook.kind = get_kind(in);
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  const std::uint32_t m = get_u32(in);
  const std::uint32_t d = get_u32(in);
  for (std::uint32_t i = 0; i < m; ++i) {
    stored.codebook.centers.push_back(make_word(stored.codebook.kind, get_matrix(in, rows, cols),
                                                {"codeword", static_cast<int>(i)}));
  }
  if (d > 0) {
    stored.pca = get_pca_body(in);
    if (stored.pca->output_dim() != d) throw Error(Errc::kFormat, "PCA dim mismatch");
  }
  return stored;
}

void write_riemannian_gmm(std::ostream& out, const RiemannianGmm& gmm) {
  gmm.validate();
  put_header(out, "MWRG");
  put_u32(out, static_cast<std::uint64_t>(gmm.kind));
  put_u32(out, static_cast<std::uint64_t>(gmm.word_rows));
  put_u32(out, static_cast<std::uint64_t>(gmm.word_cols));
  put_u32(out, static_cast<std::uint64_t>(gmm.components()));
  put_u32(out, static_cast<std::uint64_t>(gmm.dim()));
  put_vector(out, gmm.weights);
  put_matrix(out, gmm.means);
  put_matrix(out, gmm.variances);
  put_pca_body(out, gmm.pca);
}

RiemannianGmm read_riemannian_gmm(std::istream& in) {
  expect_header(in, "MWRG");
  RiemannianGmm gmm;
  gmm.kind = get_kind(in);
  gmm.word_rows = get_u32(in);
  gmm.word_cols = get_u32(in);
  const std::uint32_t m = get_u32(in);
  const std::uint32_t d = get_u32(in);
  gmm.weights = get_vector(in, m);
  gmm.means = get_matrix(in, m, d);
  gmm.variances = get_matrix(in, m, d);
  gmm.pca = get_pca_body(in);
  gmm.validate();
  return gmm;
}

void write_encodings(std::ostream& out, std::span<const EncodedVideo> videos) {
  put_header(out, "MWEV");
  put_u64(out, videos.size());
  for (const EncodedVideo& v : videos) {
    put_string(out, v.video_id);
    put_u32(out, static_cast<std::uint64_t>(v.method));
    put_u32(out, static_cast<std::uint64_t>(v.kind));
    put_u32(out, static_cast<std::uint64_t>(v.codebook_size));
    put_u32(out, static_cast<std::uint64_t>(v.block_size));
    put_u64(out, static_cast<std::uint64_t>(v.vector.size()));
    put_vector(out, v.vector);
  }
}

std::vector<EncodedVideo> read_encodings(std::istream& in) {
  expect_header(in, "MWEV");
  const std::uint64_t count = get_u64(in);
  check_count(count);
  std::vector<EncodedVideo> videos;
  for (std::uint64_t i = 0; i < count; ++i) {
    EncodedVideo v;
    v.video_id = get_string(in);
    const std::uint32_t method = get_u32(in);
    if (method > 2) throw Error(Errc::kFormat, "unknown encoder tag");
    v.method = static_cast<EncoderMethod>(method);
    v.kind = get_kind(in);
    v.codebook_size = static_cast<int>(get_u32(in));
    v.block_size = static_cast<int>(get_u32(in));
    v.vector = get_vector(in, get_u64(in));
    videos.push_back(std::move(v));
  }
  return videos;
}

void write_encodings_text(std::ostream& out, std::span<const EncodedVideo> videos) {
  char buf[32];
  for (const EncodedVideo& v : videos) {
    out << v.video_id << '\t' << encoder_name(v.method);
    for (Eigen::Index i = 0; i < v.vector.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v.vector(i));
      out << '\t' << buf;
    }
    out << '\n';
  }
}

std::string peek_magic(const std::filesystem::path& path) {
  return read_file(path, [](std::istream& in) {
    char got[4];
    if (!in.read(got, 4)) throw Error(Errc::kFormat, "file too short for a magic");
    return std::string(got, 4);
  });
}

}  // namespace midword::io
