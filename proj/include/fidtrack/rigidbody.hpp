#pragma once

// Ground-truth generator for a rigid multi-fiducial array: constant
// translational acceleration, constant angular velocity integrated with a
// first-order rotation update, and seeded anisotropic Gaussian measurement
// noise with optional occlusion-bias segments.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fidtrack/matrix.hpp"

namespace fidtrack {

struct Pose {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{};
};

// Emulates a translucent occluder sitting on one fiducial for a while: a
// constant offset on [start_k, end_k] plus a one-step spike at both ends.
struct OcclusionBias {
  std::size_t fiducial_id = 0;
  std::uint64_t start_k = 0;
  std::uint64_t end_k = 0;
  Vec3 offset{};
  Vec3 spike_magnitude{0.5, 0.5, 0.7};

  friend bool operator==(const OcclusionBias&, const OcclusionBias&) = default;
};

struct SimConfig {
  std::vector<Vec3> fiducial_initials;
  Vec3 v0{};       // mm/s
  Vec3 a0{};       // mm/s²
  Vec3 omega{};    // rad/s
  double fps = 200.0;
  double duration = 5.0;  // s
  Vec3 noise_std{};       // mm, per axis
  std::uint64_t seed = 0;
  std::vector<OcclusionBias> bias_segments;
  bool orthonormalize = false;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Four coplanar fiducials, a0 = 0.1 mm/s² per axis, ω = 0.001 rad/s per axis,
/// 200 fps for 5 s, noise std (0.15, 0.15, 0.21) mm.
SimConfig default_sim_config(std::uint64_t seed = 42);

struct FiducialSample {
  Vec3 truth{};
  Vec3 measured{};
  bool occluded = false;

  friend bool operator==(const FiducialSample&, const FiducialSample&) = default;
};

struct SessionData {
  double dt = 0.0;
  std::size_t fiducial_count = 0;
  std::uint64_t seed = 0;
  bool has_truth = true;
  std::vector<FiducialSample> samples;  // step-major, fiducial-minor
  std::optional<SimConfig> config;

  std::size_t step_count() const { return fiducial_count == 0 ? 0 : samples.size() / fiducial_count; }
  const FiducialSample& at(std::size_t k, std::size_t fiducial) const {
    return samples[k * fiducial_count + fiducial];
  }
  FiducialSample& at(std::size_t k, std::size_t fiducial) { return samples[k * fiducial_count + fiducial]; }

  friend bool operator==(const SessionData&, const SessionData&) = default;
};

Mat3 skew(const Vec3& omega);

/// R + dt·skew(ω)·R, optionally projected to the nearest rotation.
Mat3 propagate_rotation(const Mat3& R_prev, const Vec3& omega, double dt, bool orthonormalize);

struct Kinematics {
  Vec3 t;
  Vec3 v;
  Vec3 a;
};

Kinematics propagate_translation(const Vec3& t, const Vec3& v, const Vec3& a, double dt);

Vec3 transform_point(const Pose& pose, const Vec3& x0);

/// Distances between cyclically consecutive points: 0→1, 1→2, …, (n−1)→0.
std::vector<double> pairwise_distances(const std::vector<Vec3>& points);

/// Nearest rotation in the Frobenius sense (polar factor).
Mat3 nearest_rotation(const Mat3& m);

/// Throws InvalidArgument on a config that violates its invariants.
void validate(const SimConfig& config);

std::size_t step_count(const SimConfig& config);

SessionData simulate_session(const SimConfig& config);

}  // namespace fidtrack
