#pragma once

// Linear-schedule flow math: interpolation between noise and data, the true
// flow velocity, and pseudo-clean (x-pred) estimation from velocity or noise
// predictions.
//
// Time runs from t = 0 (pure noise) to t = 1 (clean data):
//   z_t = t * x + (1 - t) * eps,   v = dz_t/dt = x - eps.
// Samplers that count time the other way must convert with t' = 1 - t
// before calling into this header.

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "stepguard/errors.hpp"

namespace stepguard {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class ScheduleKind { LinearFlow, LinearNoise };
enum class PredictionKind { Velocity, Noise };

/// Linear noise schedule alpha_t = t, sigma_t = 1 - t.
///
/// `t_floor` bounds how close to t = 0 the noise-form x-pred may be evaluated;
/// below it the division by t amplifies prediction error without bound.
class Schedule {
 public:
  static constexpr double kDefaultTimeFloor = 0.05;

  explicit Schedule(ScheduleKind kind = ScheduleKind::LinearFlow,
                    double t_floor = kDefaultTimeFloor)
      : kind_(kind), t_floor_(t_floor) {
    if (!(t_floor > 0.0 && t_floor < 1.0)) {
      throw InvalidArgument("schedule t_floor must lie in (0, 1), got " +
                            std::to_string(t_floor));
    }
  }

  /// Builds a schedule from general coefficient functions. Only the linear
  /// pair alpha_t = t, sigma_t = 1 - t is supported; anything else is
  /// rejected after probing a grid of times.
  static Schedule from_coefficients(ScheduleKind kind,
                                    const std::function<double(double)>& alpha,
                                    const std::function<double(double)>& sigma,
                                    double t_floor = kDefaultTimeFloor) {
    constexpr int kProbes = 64;
    for (int i = 0; i <= kProbes; ++i) {
      const double t = static_cast<double>(i) / kProbes;
      if (std::abs(alpha(t) - t) > 1e-12 || std::abs(sigma(t) - (1.0 - t)) > 1e-12) {
        throw InvalidArgument("only linear schedules (alpha_t = t, sigma_t = 1 - t) are supported");
      }
    }
    return Schedule(kind, t_floor);
  }

  ScheduleKind kind() const noexcept { return kind_; }
  double t_floor() const noexcept { return t_floor_; }

  template <typename Scalar>
  static Scalar alpha(Scalar t) noexcept { return t; }
  template <typename Scalar>
  static Scalar sigma(Scalar t) noexcept { return Scalar(1) - t; }

 private:
  ScheduleKind kind_;
  double t_floor_;
};

template <typename Scalar>
struct LatentState {
  Vector<Scalar> z;
  Scalar t{0};
};

template <typename Scalar>
struct Prediction {
  PredictionKind kind{PredictionKind::Velocity};
  Vector<Scalar> value;
};

namespace detail {

template <typename Scalar>
void check_time(Scalar t) {
  if (!(t >= Scalar(0) && t <= Scalar(1))) {
    throw InvalidArgument("time must lie in [0, 1], got " + std::to_string(static_cast<double>(t)));
  }
}

template <typename A, typename B>
void check_same_size(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                     const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

template <typename A>
void check_finite(const Eigen::MatrixBase<A>& a, const char* what) {
  if (!a.allFinite()) throw NonFiniteValue(std::string(what) + ": non-finite value");
}

}  // namespace detail

/// z_t = t * x + (1 - t) * eps.
template <typename DerivedX, typename DerivedE>
LatentState<typename DerivedX::Scalar> interpolate(const Eigen::MatrixBase<DerivedX>& x,
                                                   const Eigen::MatrixBase<DerivedE>& eps,
                                                   typename DerivedX::Scalar t) {
  using Scalar = typename DerivedX::Scalar;
  detail::check_same_size(x, eps, "interpolate");
  detail::check_time(t);
  detail::check_finite(x, "interpolate x");
  detail::check_finite(eps, "interpolate eps");
  LatentState<Scalar> state;
  state.z = Schedule::alpha(t) * x + Schedule::sigma(t) * eps;
  state.t = t;
  return state;
}

/// v = x - eps, the constant time derivative of the linear path.
template <typename DerivedX, typename DerivedE>
Vector<typename DerivedX::Scalar> true_velocity(const Eigen::MatrixBase<DerivedX>& x,
                                                const Eigen::MatrixBase<DerivedE>& eps) {
  detail::check_same_size(x, eps, "true_velocity");
  return x - eps;
}

/// Pseudo-clean estimate of the final sample from an intermediate state.
///   Velocity: x = z_t + (1 - t) * v
///   Noise:    x = (z_t - (1 - t) * eps) / t,  requires t >= t_floor
template <typename Scalar>
Vector<Scalar> x_pred(const LatentState<Scalar>& state, const Prediction<Scalar>& pred,
                      const Schedule& schedule) {
  detail::check_same_size(state.z, pred.value, "x_pred");
  detail::check_time(state.t);
  const Scalar remaining = Schedule::sigma(state.t);
  Vector<Scalar> out;
  if (pred.kind == PredictionKind::Velocity) {
    out = state.z + remaining * pred.value;
  } else {
    if (static_cast<double>(state.t) < schedule.t_floor()) {
      throw NearSingularTime("noise-form x_pred at t=" + std::to_string(static_cast<double>(state.t)) +
                             " is below t_floor=" + std::to_string(schedule.t_floor()));
    }
    out = (state.z - remaining * pred.value) / state.t;
  }
  detail::check_finite(out, "x_pred");
  return out;
}

}  // namespace stepguard
