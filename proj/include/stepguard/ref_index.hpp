#pragma once

// Cached matrix of l2-normalized reference embeddings and the single
// matrix-vector product that scores a query against every reference.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stepguard/encoder.hpp"

namespace stepguard {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class IndexErrorKind {
  Io,
  BadMagic,
  UnsupportedVersion,
  Truncated,
  TrailingBytes,
  ChecksumMismatch,
  InvariantViolation,  // non-unit row, duplicate id, zero-norm input, empty index
  InvalidInput,        // dimension mismatch or otherwise unusable build input
};

class IndexError : public std::runtime_error {
 public:
  IndexError(IndexErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  IndexErrorKind kind() const noexcept { return kind_; }

 private:
  IndexErrorKind kind_;
};

const char* to_string(IndexErrorKind kind) noexcept;

struct BuildMeta {
  std::uint64_t encoder_fingerprint = 0;
  std::optional<std::chrono::system_clock::time_point> built_at;
};

/// Immutable n x d matrix of unit rows with unique ids. Safe to share across
/// threads once constructed.
class ReferenceIndex {
 public:
  static constexpr double kNormTolerance = 1e-6;

  /// Validates every invariant; throws IndexError(InvariantViolation).
  ReferenceIndex(RowMatrixF rows, std::vector<std::string> ids, BuildMeta meta = {});

  std::size_t size() const noexcept { return ids_.size(); }
  int dim() const noexcept { return static_cast<int>(rows_.cols()); }
  const RowMatrixF& rows() const noexcept { return rows_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const BuildMeta& meta() const noexcept { return meta_; }

  /// New index with `more` appended after the existing rows.
  ReferenceIndex extended(std::span<const Embedding> more) const;

 private:
  RowMatrixF rows_;
  std::vector<std::string> ids_;
  BuildMeta meta_;
};

struct SimilarityReport {
  Eigen::VectorXd scores;
  double p_max = 0.0;
  std::size_t argmax = 0;
  std::string argmax_id;
};

/// Row i = E(r_i) / ||E(r_i)||, order preserved.
ReferenceIndex build_index(std::span<const Embedding> embeddings, std::uint64_t encoder_fingerprint = 0);

/// scores = R * (q / ||q||); ties in the maximum resolve to the lowest row.
SimilarityReport score(const ReferenceIndex& index, const Eigen::VectorXd& query);
inline SimilarityReport score(const ReferenceIndex& index, const Embedding& query) {
  return score(index, query.vec);
}

// On-disk format (little-endian):
//   "EDGSHLD1" | u32 version=1 | u32 n | u32 d
//   n x (u16 id_len | id bytes | d x f32)
//   u64 FNV-1a of every preceding byte
inline constexpr char kIndexMagic[8] = {'E', 'D', 'G', 'S', 'H', 'L', 'D', '1'};
inline constexpr std::uint32_t kIndexVersion = 1;

std::vector<std::byte> serialize_index(const ReferenceIndex& index);
ReferenceIndex parse_index(std::span<const std::byte> bytes);

void save_index(const ReferenceIndex& index, const std::filesystem::path& path);
ReferenceIndex load_index(const std::filesystem::path& path);

/// Checksum field of a serialized index (the trailing eight bytes).
std::uint64_t stored_checksum(std::span<const std::byte> bytes);

}  // namespace stepguard
