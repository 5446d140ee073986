#include "stepguard/ref_index.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "stepguard/checksum.hpp"
#include "stepguard/errors.hpp"

namespace stepguard {
namespace {

constexpr std::size_t kHeaderSize = 20;
constexpr std::size_t kChecksumSize = 8;

void check_invariants(const RowMatrixF& rows, const std::vector<std::string>& ids) {
  if (ids.empty()) throw IndexError(IndexErrorKind::InvariantViolation, "index must have at least one row");
  if (rows.cols() < 1) throw IndexError(IndexErrorKind::InvariantViolation, "index dimension must be >= 1");
  if (static_cast<std::size_t>(rows.rows()) != ids.size()) {
    throw IndexError(IndexErrorKind::InvariantViolation, "row count does not match id count");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second) {
      throw IndexError(IndexErrorKind::InvariantViolation, "duplicate id '" + ids[i] + "'");
    }
    const auto row = rows.row(static_cast<Eigen::Index>(i));
    if (!row.allFinite()) {
      throw IndexError(IndexErrorKind::InvariantViolation, "row '" + ids[i] + "' has non-finite values");
    }
    const double norm = row.cast<double>().norm();
    if (std::abs(norm - 1.0) > ReferenceIndex::kNormTolerance) {
      throw IndexError(IndexErrorKind::InvariantViolation,
                       "row '" + ids[i] + "' is not unit length (norm " + std::to_string(norm) + ")");
    }
  }
}

RowMatrixF normalized_rows(std::span<const Embedding> embeddings, Eigen::Index dim) {
  RowMatrixF rows(static_cast<Eigen::Index>(embeddings.size()), dim);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& e = embeddings[i];
    if (e.vec.size() != dim) {
      throw IndexError(IndexErrorKind::InvalidInput,
                       "embedding '" + e.id + "' has dimension " + std::to_string(e.vec.size()) +
                           ", expected " + std::to_string(dim));
    }
    if (!e.vec.allFinite()) {
      throw IndexError(IndexErrorKind::InvalidInput, "embedding '" + e.id + "' has non-finite values");
    }
    const double norm = e.vec.norm();
    if (norm == 0.0) {
      throw IndexError(IndexErrorKind::InvariantViolation, "embedding '" + e.id + "' has zero norm");
    }
    rows.row(static_cast<Eigen::Index>(i)) = (e.vec / norm).cast<float>().transpose();
  }
  return rows;
}

class ByteWriter {
 public:
  void raw(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::byte*>(data);
    out_.insert(out_.end(), p, p + size);
  }
  template <typename UInt>
  void uint(UInt value) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      out_.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
    }
  }
  void f32(float value) { uint(std::bit_cast<std::uint32_t>(value)); }
  std::vector<std::byte>& bytes() { return out_; }

 private:
  std::vector<std::byte> out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw IndexError(IndexErrorKind::Truncated, std::string("index file truncated while reading ") + what);
    }
  }
  template <typename UInt>
  UInt uint(const char* what) {
    need(sizeof(UInt), what);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      value |= static_cast<UInt>(std::to_integer<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return value;
  }
  float f32(const char* what) { return std::bit_cast<float>(uint<std::uint32_t>(what)); }
  std::string string(std::size_t n, const char* what) {
    need(n, what);
    std::string out(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return out;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(IndexErrorKind kind) noexcept {
  switch (kind) {
    case IndexErrorKind::Io: return "io error";
    case IndexErrorKind::BadMagic: return "bad magic";
    case IndexErrorKind::UnsupportedVersion: return "unsupported version";
    case IndexErrorKind::Truncated: return "truncated file";
    case IndexErrorKind::TrailingBytes: return "trailing bytes";
    case IndexErrorKind::ChecksumMismatch: return "checksum mismatch";
    case IndexErrorKind::InvariantViolation: return "invariant violation";
    case IndexErrorKind::InvalidInput: return "invalid input";
  }
  return "?";
}

ReferenceIndex::ReferenceIndex(RowMatrixF rows, std::vector<std::string> ids, BuildMeta meta)
    : rows_(std::move(rows)), ids_(std::move(ids)), meta_(meta) {
  check_invariants(rows_, ids_);
}

ReferenceIndex ReferenceIndex::extended(std::span<const Embedding> more) const {
  RowMatrixF added = normalized_rows(more, rows_.cols());
  RowMatrixF rows(rows_.rows() + added.rows(), rows_.cols());
  rows << rows_, added;
  auto ids = ids_;
  for (const auto& e : more) ids.push_back(e.id);
  return ReferenceIndex(std::move(rows), std::move(ids), meta_);
}

ReferenceIndex build_index(std::span<const Embedding> embeddings, std::uint64_t encoder_fingerprint) {
  if (embeddings.empty()) throw IndexError(IndexErrorKind::InvalidInput, "no embeddings to index");
  RowMatrixF rows = normalized_rows(embeddings, embeddings.front().vec.size());
  std::vector<std::string> ids;
  ids.reserve(embeddings.size());
  for (const auto& e : embeddings) ids.push_back(e.id);
  return ReferenceIndex(std::move(rows), std::move(ids),
                        BuildMeta{encoder_fingerprint, std::chrono::system_clock::now()});
}

SimilarityReport score(const ReferenceIndex& index, const Eigen::VectorXd& query) {
  if (query.size() != index.dim()) {
    throw InvalidArgument("query dimension " + std::to_string(query.size()) +
                          " != index dimension " + std::to_string(index.dim()));
  }
  if (!query.allFinite()) throw NonFiniteValue("query has non-finite values");
  const double norm = query.norm();
  if (norm == 0.0) throw InvalidArgument("cannot score a zero-norm query");

  const Eigen::VectorXf unit = (query / norm).cast<float>();
  SimilarityReport report;
  report.scores = (index.rows() * unit).cast<double>();
  report.argmax = 0;
  report.p_max = report.scores[0];
  for (Eigen::Index i = 1; i < report.scores.size(); ++i) {
    if (report.scores[i] > report.p_max) {
      report.p_max = report.scores[i];
      report.argmax = static_cast<std::size_t>(i);
    }
  }
  report.argmax_id = index.ids()[report.argmax];
  return report;
}

std::vector<std::byte> serialize_index(const ReferenceIndex& index) {
  ByteWriter w;
  w.raw(kIndexMagic, sizeof kIndexMagic);
  w.uint<std::uint32_t>(kIndexVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(index.size()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(index.dim()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& id = index.ids()[i];
    if (id.size() > 0xFFFF) throw InvalidArgument("id '" + id.substr(0, 32) + "...' exceeds 65535 bytes");
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
    w.raw(id.data(), id.size());
    const auto row = index.rows().row(static_cast<Eigen::Index>(i));
    for (Eigen::Index c = 0; c < row.size(); ++c) w.f32(row[c]);
  }
  const std::uint64_t checksum = fnv1a64(w.bytes());
  w.uint<std::uint64_t>(checksum);
  return std::move(w.bytes());
}

std::uint64_t stored_checksum(std::span<const std::byte> bytes) {
  if (bytes.size() < kChecksumSize) throw IndexError(IndexErrorKind::Truncated, "no checksum present");
  ByteReader r(bytes.subspan(bytes.size() - kChecksumSize));
  return r.uint<std::uint64_t>("checksum");
}

ReferenceIndex parse_index(std::span<const std::byte> bytes) {
  if (bytes.size() < sizeof kIndexMagic) throw IndexError(IndexErrorKind::Truncated, "index file shorter than magic");
  if (std::memcmp(bytes.data(), kIndexMagic, sizeof kIndexMagic) != 0) {
    throw IndexError(IndexErrorKind::BadMagic, "bad magic: not an index file");
  }
  if (bytes.size() < kHeaderSize + kChecksumSize) {
    throw IndexError(IndexErrorKind::Truncated, "index file shorter than header");
  }
  ByteReader r(bytes.first(bytes.size() - kChecksumSize));
  r.string(sizeof kIndexMagic, "magic");
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kIndexVersion) {
    throw IndexError(IndexErrorKind::UnsupportedVersion, "unsupported index version " + std::to_string(version));
  }
  const auto n = r.uint<std::uint32_t>("n");
  const auto d = r.uint<std::uint32_t>("d");
  // Each row occupies at least 2 + 4d bytes; reject impossible headers before allocating.
  if (static_cast<std::uint64_t>(n) * (2 + 4ULL * d) > r.remaining()) {
    throw IndexError(IndexErrorKind::Truncated, "index header claims more rows than the file holds");
  }

  RowMatrixF rows(n, d);
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = r.uint<std::uint16_t>("id length");
    ids.push_back(r.string(len, "id"));
    for (std::uint32_t c = 0; c < d; ++c) rows(i, c) = r.f32("row values");
  }
  if (r.remaining() != 0) {
    throw IndexError(IndexErrorKind::TrailingBytes,
                     std::to_string(r.remaining()) + " unexpected bytes before checksum");
  }
  const std::uint64_t expected = fnv1a64(bytes.first(bytes.size() - kChecksumSize));
  if (expected != stored_checksum(bytes)) {
    throw IndexError(IndexErrorKind::ChecksumMismatch, "checksum mismatch: file is corrupted");
  }
  return ReferenceIndex(std::move(rows), std::move(ids));
}

void save_index(const ReferenceIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IndexError(IndexErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IndexError(IndexErrorKind::Io, "failed writing '" + path.string() + "'");
}

ReferenceIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexError(IndexErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_index(std::as_bytes(std::span(raw)));
}

}  // namespace stepguard
