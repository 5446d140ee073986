#pragma once

// Desk-scale stand-ins for the decode (latent -> pixels) and encode
// (pixels -> embedding) stages of a filtering pipeline.

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace stepguard {

enum class EncoderKind { Identity, Downsample, RandomProjection };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::Identity;
  int out_dim = 0;  // 0 with Identity: same as the input
  std::uint64_t seed = 0;
};

struct Embedding {
  std::string id;
  Eigen::VectorXd vec;
};

/// An encoder bound to an input dimension. For RandomProjection the d x D
/// matrix is drawn once at construction: row-major N(0, 1) entries from the
/// seeded Box-Muller stream, scaled by 1/sqrt(d).
class Encoder {
 public:
  Encoder(EncoderSpec spec, int input_dim);

  const EncoderSpec& spec() const noexcept { return spec_; }
  int input_dim() const noexcept { return input_dim_; }
  int output_dim() const noexcept { return output_dim_; }
  const Eigen::MatrixXd& projection() const noexcept { return projection_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& input) const;

  /// Stable hash of the spec and input dimension, stored as index build metadata.
  std::uint64_t fingerprint() const noexcept;

 private:
  EncoderSpec spec_;
  int input_dim_;
  int output_dim_;
  Eigen::MatrixXd projection_;
};

Embedding encode(const Eigen::VectorXd& input, const Encoder& encoder, std::string id = {});

enum class DecoderKind { Identity, FixedLinear };

/// Identity or an injective linear map M (full column rank).
class Decoder {
 public:
  Decoder() = default;
  explicit Decoder(Eigen::MatrixXd matrix);

  /// Random Gaussian M of shape out_dim x in_dim from the seeded stream.
  static Decoder random_linear(int out_dim, int in_dim, std::uint64_t seed);

  DecoderKind kind() const noexcept { return matrix_ ? DecoderKind::FixedLinear : DecoderKind::Identity; }
  const std::optional<Eigen::MatrixXd>& matrix() const noexcept { return matrix_; }
  /// Output dimension for a given latent dimension.
  int output_dim(int latent_dim) const noexcept;

  Eigen::VectorXd operator()(const Eigen::VectorXd& latent) const;

 private:
  std::optional<Eigen::MatrixXd> matrix_;
};

Eigen::VectorXd decode(const Eigen::VectorXd& latent, const Decoder& decoder);

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& name);

}  // namespace stepguard
