#pragma once

// Linear Kalman filter for a single fiducial under a constant-acceleration
// motion model. State layout is fixed: [tx vx ax  ty vy ay  tz vz az].

#include <cstdint>
#include <optional>

#include "fidtrack/matrix.hpp"

namespace fidtrack {

inline constexpr std::size_t kStateDim = 9;
inline constexpr std::size_t kMeasDim = 3;

using StateVector = Vector<kStateDim>;

// Index of the position component for axis 0..2 inside StateVector.
constexpr std::size_t position_index(std::size_t axis) { return axis * 3; }

struct FilterConfig {
  double dt = 0.005;  // seconds
  Mat9 Q{};           // process covariance, per step
  Mat3 R{};           // measurement covariance
  Mat9 P0{};          // initial state covariance
};

enum class ProcessNoiseScaling {
  kPerSecond,  // Q_step = q_var * dt * I
  kPerStep,    // Q_step = q_var * I
};

// Scalar knobs that expand into a FilterConfig.
struct FilterParams {
  double dt_s = 0.005;
  double q_var = 0.001;
  ProcessNoiseScaling q_scaling = ProcessNoiseScaling::kPerSecond;
  Vec3 r_var{0.0225, 0.0225, 0.0441};
  std::optional<Vec3> p0_pos_var;  // defaults to r_var
  double p0_vel_var = 4.0;
  double p0_acc_var = 0.01;
};

/// Expands params into matrices. Throws InvalidArgument on non-positive dt,
/// negative variances, or a non-positive measurement variance.
FilterConfig make_filter_config(const FilterParams& params);

/// Simulation profile: dt = 5 ms, q_var = 0.001, R = diag(0.0225, 0.0225, 0.0441).
FilterConfig default_filter_config();

struct FilterState {
  StateVector x{};
  Mat9 P{};
  std::uint64_t k = 0;
};

struct Prior {
  StateVector x{};
  Mat9 P{};
  std::uint64_t k = 0;  // index of the step being predicted
};

struct Gain {
  Mat9x3 K{};
  Mat3 S{};  // innovation covariance H·P⁻·Hᵀ + R
};

struct StepOutput {
  FilterState state;
  Vec3 refined;
  Vec3 innovation;
  double nis = 0.0;
  bool predicted_only = false;
};

/// Block-diagonal transition with [[1, dt, dt²/2], [0, 1, dt], [0, 0, 1]] per axis.
Mat9 build_transition(double dt);

/// Selector for the three position components.
Mat3x9 build_observation();

/// x⁻ = A·x, P⁻ = A·P·Aᵀ + Q (symmetrized).
Prior predict(const FilterState& state, const FilterConfig& config);

/// K = P⁻Hᵀ S⁻¹ via a Cholesky solve on S. Throws SingularInnovation if S is
/// not positive definite.
Gain gain(const Mat9& P_prior, const Mat3& R);

/// x = x⁻ + K(z − Hx⁻), P = (I − KH)P⁻ (symmetrized).
FilterState update(const Prior& prior, const Mat9x3& K, const Vec3& z);

/// One full filter cycle. A missing measurement yields a prediction-only step.
StepOutput step(const FilterState& state, const std::optional<Vec3>& z, const FilterConfig& config);

/// Position from z0, zero velocity and acceleration, P = P0, k = 0.
FilterState init_state(const Vec3& z0, const FilterConfig& config);

/// H·x.
Vec3 position_of(const StateVector& x);

/// νᵀS⁻¹ν. Throws SingularInnovation if S is not positive definite.
double normalized_innovation_squared(const Vec3& innovation, const Mat3& S);

}  // namespace fidtrack
