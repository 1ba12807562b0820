#pragma once

// Artifact file formats. Every binary container starts with a four-byte
// magic and a little-endian u32 version (currently 1); all integers are
// little-endian and all model payloads are 64-bit IEEE floats, row-major.
//
//   MWDS  descriptor set: id_len u32, id bytes (UTF-8), d u32, L u64,
//         L*d float32 features
//   MWGM  spherical GMM: K u32, d u32, weights[K], means[K*d], variances[K]
//   MWPC  PCA: input u32, output u32, mean[input], projection[output*input]
//   MWWD  words: kind u32, rows u32, cols u32, count u64,
//         payload[count*rows*cols], then per word: id_len u32, id, component i32
//   MWCB  Karcher codebook: kind u32, rows u32, cols u32, M u32, D u32,
//         centers[M*rows*cols], then the PCA body (as MWPC) when D > 0
//   MWRG  Riemannian GMM: kind u32, rows u32, cols u32, M u32, D u32,
//         weights[M], means[M*D], variances[M*D], then the PCA body
//   MWEV  encodings: count u64, then per video: id_len u32, id, method u32,
//         kind u32, M u32, block u32, length u64, values[length]
//
// Word kinds: 0 subspace, 1 covariance, 2 Gaussian. Methods: 0 BoVW, 1 VLAD,
// 2 Fisher vector.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "midword/alignment.hpp"
#include "midword/codebook.hpp"
#include "midword/encoding.hpp"
#include "midword/words.hpp"

namespace midword::io {

inline constexpr std::uint32_t kFormatVersion = 1;

void write_descriptor_set(std::ostream& out, const DescriptorSet& set);
DescriptorSet read_descriptor_set(std::istream& in);

void write_gmm(std::ostream& out, const SphericalGmm& gmm);
SphericalGmm read_gmm(std::istream& in);

void write_pca(std::ostream& out, const PcaProjection& pca);
PcaProjection read_pca(std::istream& in);

void write_words(std::ostream& out, std::span<const MidLevelWord> words);
std::vector<MidLevelWord> read_words(std::istream& in);

void write_karcher_codebook(std::ostream& out, const KarcherCodebook& codebook,
                            const PcaProjection* pca = nullptr);
struct StoredKarcherCodebook {
  KarcherCodebook codebook;
  std::optional<PcaProjection> pca;
};
StoredKarcherCodebook read_karcher_codebook(std::istream& in);

void write_riemannian_gmm(std::ostream& out, const RiemannianGmm& gmm);
RiemannianGmm read_riemannian_gmm(std::istream& in);

void write_encodings(std::ostream& out, std::span<const EncodedVideo> videos);
std::vector<EncodedVideo> read_encodings(std::istream& in);

/// One line per video: id, method, then the values, tab-separated, with
/// values printed to 17 significant digits.
void write_encodings_text(std::ostream& out, std::span<const EncodedVideo> videos);

/// Reads the four-byte magic of a file without consuming the rest.
std::string peek_magic(const std::filesystem::path& path);

// Path-based wrappers; throw kIo when a file cannot be opened.
template <typename F>
void write_file(const std::filesystem::path& path, F&& writer);
template <typename F>
auto read_file(const std::filesystem::path& path, F&& reader);

}  // namespace midword::io

#include "midword/io_file.inl"
