#include "fidtrack/rigidbody.hpp"

#include <cmath>
#include <string>

#include "fidtrack/errors.hpp"
#include "fidtrack/noise.hpp"

namespace fidtrack {

SimConfig default_sim_config(std::uint64_t seed) {
  SimConfig c;
  c.fiducial_initials = {{-180.0, 180.0, 1230.0},
                         {170.0, -150.0, 1230.0},
                         {50.0, -130.0, 1230.0},
                         {70.0, -110.0, 1230.0}};
  c.v0 = {0.0, 0.0, 0.0};
  c.a0 = {0.1, 0.1, 0.1};
  c.omega = {0.001, 0.001, 0.001};
  c.fps = 200.0;
  c.duration = 5.0;
  c.noise_std = {0.15, 0.15, 0.21};
  c.seed = seed;
  return c;
}

Mat3 skew(const Vec3& w) {
  return Mat3::from({0.0, -w.z, w.y,  //
                     w.z, 0.0, -w.x,  //
                     -w.y, w.x, 0.0});
}

namespace {

double determinant(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Transpose of the inverse, via the cofactor matrix.
Mat3 inverse_transpose(const Mat3& m) {
  Mat3 cof{};
  cof(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  cof(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  cof(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  cof(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  cof(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  cof(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  cof(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  cof(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  cof(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return cof * (1.0 / determinant(m));
}

void require_finite(const Vec3& v, const std::string& what) {
  if (!is_finite(v)) throw InvalidArgument(what + " must be finite");
}

}  // namespace

Mat3 nearest_rotation(const Mat3& m) {
  if (!(std::abs(determinant(m)) > 0.0)) throw InvalidArgument("cannot orthonormalize a singular matrix");
  // Newton iteration for the polar factor; quadratic convergence near a rotation.
  Mat3 x = m;
  for (int i = 0; i < 100; ++i) {
    const Mat3 next = (x + inverse_transpose(x)) * 0.5;
    const double change = inf_norm(next - x);
    x = next;
    if (change <= 1e-16) break;
  }
  return x;
}

Mat3 propagate_rotation(const Mat3& R_prev, const Vec3& omega, double dt, bool orthonormalize) {
  Mat3 r = R_prev + (skew(omega) * R_prev) * dt;
  if (orthonormalize) r = nearest_rotation(r);
  return r;
}

Kinematics propagate_translation(const Vec3& t, const Vec3& v, const Vec3& a, double dt) {
  return {t + v * dt + a * (0.5 * dt * dt), v + a * dt, a};
}

Vec3 transform_point(const Pose& pose, const Vec3& x0) { return pose.rotation * x0 + pose.translation; }

std::vector<double> pairwise_distances(const std::vector<Vec3>& points) {
  if (points.size() < 2) throw InvalidArgument("pairwise_distances needs at least 2 points");
  std::vector<double> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.push_back(norm(points[(i + 1) % points.size()] - points[i]));
  }
  return out;
}

void validate(const SimConfig& c) {
  if (c.fiducial_initials.empty()) throw InvalidArgument("simulation needs at least one fiducial");
  for (std::size_t i = 0; i < c.fiducial_initials.size(); ++i) {
    require_finite(c.fiducial_initials[i], "fiducial " + std::to_string(i) + " initial position");
  }
  require_finite(c.v0, "v0");
  require_finite(c.a0, "a0");
  require_finite(c.omega, "omega");
  require_finite(c.noise_std, "noise_std");
  if (!std::isfinite(c.fps) || c.fps <= 0.0) throw InvalidArgument("fps must be > 0");
  if (!std::isfinite(c.duration) || c.duration <= 0.0) throw InvalidArgument("duration must be > 0");
  if (c.noise_std.x < 0.0 || c.noise_std.y < 0.0 || c.noise_std.z < 0.0) {
    throw InvalidArgument("noise_std components must be >= 0");
  }
  for (const auto& b : c.bias_segments) {
    if (b.fiducial_id >= c.fiducial_initials.size()) {
      throw InvalidArgument("bias segment references unknown fiducial " + std::to_string(b.fiducial_id));
    }
    if (b.start_k >= b.end_k) throw InvalidArgument("bias segment needs start_k < end_k");
    require_finite(b.offset, "bias offset");
    require_finite(b.spike_magnitude, "bias spike");
  }
}

std::size_t step_count(const SimConfig& c) {
  return static_cast<std::size_t>(std::llround(c.fps * c.duration));
}

SessionData simulate_session(const SimConfig& config) {
  validate(config);
  const std::size_t steps = step_count(config);
  const std::size_t n = config.fiducial_initials.size();

  SessionData s;
  s.dt = 1.0 / config.fps;
  s.fiducial_count = n;
  s.seed = config.seed;
  s.has_truth = true;
  s.config = config;
  s.samples.resize(steps * n);

  GaussianNoise noise(config.seed);
  Pose pose;
  Vec3 v = config.v0;
  Vec3 a = config.a0;

  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t f = 0; f < n; ++f) {
      FiducialSample& sample = s.at(k, f);
      sample.truth = transform_point(pose, config.fiducial_initials[f]);
      Vec3 m = sample.truth;
      // Draw order is part of the reproducibility contract: x, y, z.
      m.x += config.noise_std.x * noise.next();
      m.y += config.noise_std.y * noise.next();
      m.z += config.noise_std.z * noise.next();
      sample.measured = m;
    }
    const Kinematics next = propagate_translation(pose.translation, v, a, s.dt);
    pose.translation = next.t;
    v = next.v;
    a = next.a;
    pose.rotation = propagate_rotation(pose.rotation, config.omega, s.dt, config.orthonormalize);
  }

  for (const auto& b : config.bias_segments) {
    for (std::uint64_t k = b.start_k; k <= b.end_k && k < steps; ++k) {
      FiducialSample& sample = s.at(k, b.fiducial_id);
      sample.measured = sample.measured + b.offset;
      if (k == b.start_k || k == b.end_k) sample.measured = sample.measured + b.spike_magnitude;
      sample.occluded = true;
    }
  }
  return s;
}

}  // namespace fidtrack
