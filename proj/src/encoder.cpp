#include "stepguard/encoder.hpp"

#include <cmath>

#include "stepguard/checksum.hpp"
#include "stepguard/errors.hpp"
#include "stepguard/rng.hpp"

namespace stepguard {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::Identity: return "identity";
    case EncoderKind::Downsample: return "downsample";
    case EncoderKind::RandomProjection: return "randproj";
  }
  return "?";
}

EncoderKind encoder_kind_from_string(const std::string& name) {
  if (name == "identity") return EncoderKind::Identity;
  if (name == "downsample") return EncoderKind::Downsample;
  if (name == "randproj" || name == "random-projection") return EncoderKind::RandomProjection;
  throw InvalidArgument("unknown encoder kind '" + name + "'");
}

Encoder::Encoder(EncoderSpec spec, int input_dim) : spec_(spec), input_dim_(input_dim) {
  if (input_dim < 1) throw InvalidArgument("encoder input dimension must be >= 1");
  if (spec_.out_dim < 0) throw InvalidArgument("encoder out_dim must be positive");
  switch (spec_.kind) {
    case EncoderKind::Identity:
      if (spec_.out_dim != 0 && spec_.out_dim != input_dim) {
        throw InvalidArgument("identity encoder: out_dim " + std::to_string(spec_.out_dim) +
                              " != input dim " + std::to_string(input_dim));
      }
      output_dim_ = input_dim;
      break;
    case EncoderKind::Downsample:
      if (spec_.out_dim < 1 || input_dim % spec_.out_dim != 0) {
        throw InvalidArgument("downsample encoder: input dim " + std::to_string(input_dim) +
                              " is not divisible by out_dim " + std::to_string(spec_.out_dim));
      }
      output_dim_ = spec_.out_dim;
      break;
    case EncoderKind::RandomProjection: {
      if (spec_.out_dim < 1) throw InvalidArgument("random projection needs out_dim >= 1");
      output_dim_ = spec_.out_dim;
      NormalStream normal(spec_.seed);
      projection_.resize(output_dim_, input_dim_);
      for (int r = 0; r < output_dim_; ++r) {
        for (int c = 0; c < input_dim_; ++c) projection_(r, c) = normal();
      }
      projection_ /= std::sqrt(static_cast<double>(output_dim_));
      break;
    }
  }
}

Eigen::VectorXd Encoder::operator()(const Eigen::VectorXd& input) const {
  if (input.size() != input_dim_) {
    throw InvalidArgument("encoder: input dim " + std::to_string(input.size()) + " != " +
                          std::to_string(input_dim_));
  }
  if (!input.allFinite()) throw NonFiniteValue("encoder: non-finite input");
  switch (spec_.kind) {
    case EncoderKind::Identity:
      return input;
    case EncoderKind::Downsample: {
      const int block = input_dim_ / output_dim_;
      return input.reshaped(block, output_dim_).colwise().mean().transpose();
    }
    case EncoderKind::RandomProjection:
      return projection_ * input;
  }
  return input;
}

std::uint64_t Encoder::fingerprint() const noexcept {
  const std::uint64_t fields[] = {static_cast<std::uint64_t>(spec_.kind),
                                  static_cast<std::uint64_t>(output_dim_),
                                  static_cast<std::uint64_t>(input_dim_), spec_.seed};
  return fnv1a64(std::as_bytes(std::span(fields)));
}

Embedding encode(const Eigen::VectorXd& input, const Encoder& encoder, std::string id) {
  return {std::move(id), encoder(input)};
}

Decoder::Decoder(Eigen::MatrixXd matrix) {
  if (matrix.size() == 0) throw InvalidArgument("decoder matrix is empty");
  if (!matrix.allFinite()) throw NonFiniteValue("decoder matrix has non-finite entries");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(matrix);
  if (qr.rank() != matrix.cols()) {
    throw InvalidArgument("decoder matrix must have full column rank (rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(matrix.cols()) + ")");
  }
  matrix_ = std::move(matrix);
}

Decoder Decoder::random_linear(int out_dim, int in_dim, std::uint64_t seed) {
  if (out_dim < in_dim) throw InvalidArgument("random_linear decoder needs out_dim >= in_dim");
  NormalStream normal(seed);
  Eigen::MatrixXd m(out_dim, in_dim);
  for (int r = 0; r < out_dim; ++r) {
    for (int c = 0; c < in_dim; ++c) m(r, c) = normal();
  }
  return Decoder(std::move(m));
}

int Decoder::output_dim(int latent_dim) const noexcept {
  return matrix_ ? static_cast<int>(matrix_->rows()) : latent_dim;
}

Eigen::VectorXd Decoder::operator()(const Eigen::VectorXd& latent) const {
  if (!latent.allFinite()) throw NonFiniteValue("decoder: non-finite latent");
  if (!matrix_) return latent;
  if (latent.size() != matrix_->cols()) {
    throw InvalidArgument("decoder: latent dim " + std::to_string(latent.size()) + " != " +
                          std::to_string(matrix_->cols()));
  }
  return *matrix_ * latent;
}

Eigen::VectorXd decode(const Eigen::VectorXd& latent, const Decoder& decoder) {
  return decoder(latent);
}

}  // namespace stepguard
