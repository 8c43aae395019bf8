#include "fidtrack/kalman.hpp"

#include <cmath>
#include <string>

#include "fidtrack/errors.hpp"

namespace fidtrack {

namespace {

void require_finite(const StateVector& x, const Mat9& P, const char* where) {
  if (!all_finite(x) || !all_finite(P)) {
    throw NumericalOverflow(std::string(where) + ": non-finite state or covariance");
  }
}

void require_non_negative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidArgument(std::string(name) + " must be finite and >= 0");
  }
}

}  // namespace

FilterConfig make_filter_config(const FilterParams& params) {
  if (!std::isfinite(params.dt_s) || params.dt_s <= 0.0) {
    throw InvalidArgument("dt must be finite and > 0");
  }
  require_non_negative(params.q_var, "q_var");
  for (std::size_t i = 0; i < 3; ++i) {
    if (!std::isfinite(params.r_var[i]) || params.r_var[i] <= 0.0) {
      throw InvalidArgument("measurement variances must be finite and > 0");
    }
  }
  const Vec3 pos = params.p0_pos_var.value_or(params.r_var);
  for (std::size_t i = 0; i < 3; ++i) require_non_negative(pos[i], "p0 position variance");
  require_non_negative(params.p0_vel_var, "p0 velocity variance");
  require_non_negative(params.p0_acc_var, "p0 acceleration variance");

  FilterConfig config;
  config.dt = params.dt_s;
  const double q = params.q_scaling == ProcessNoiseScaling::kPerSecond ? params.q_var * params.dt_s
                                                                      : params.q_var;
  config.Q = Mat9::identity() * q;
  config.R = Mat3::diagonal({params.r_var.x, params.r_var.y, params.r_var.z});
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t base = position_index(axis);
    config.P0(base, base) = pos[axis];
    config.P0(base + 1, base + 1) = params.p0_vel_var;
    config.P0(base + 2, base + 2) = params.p0_acc_var;
  }
  return config;
}

FilterConfig default_filter_config() { return make_filter_config(FilterParams{}); }

Mat9 build_transition(double dt) {
  if (!std::isfinite(dt)) throw InvalidArgument("transition dt must be finite");
  Mat9 a = Mat9::identity();
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t b = position_index(axis);
    a(b, b + 1) = dt;
    a(b, b + 2) = 0.5 * dt * dt;
    a(b + 1, b + 2) = dt;
  }
  return a;
}

Mat3x9 build_observation() {
  Mat3x9 h{};
  for (std::size_t axis = 0; axis < 3; ++axis) h(axis, position_index(axis)) = 1.0;
  return h;
}

Vec3 position_of(const StateVector& x) {
  return {x[position_index(0)], x[position_index(1)], x[position_index(2)]};
}

Prior predict(const FilterState& state, const FilterConfig& config) {
  const Mat9 a = build_transition(config.dt);
  Prior prior;
  prior.x = a * state.x;
  prior.P = symmetrize(a * state.P * transpose(a) + config.Q);
  prior.k = state.k + 1;
  require_finite(prior.x, prior.P, "predict");
  return prior;
}

Gain gain(const Mat9& P_prior, const Mat3& R) {
  static const Mat3x9 h = build_observation();
  Gain g;
  const Mat3x9 hp = h * P_prior;  // H·P⁻ = (P⁻·Hᵀ)ᵀ since P⁻ is symmetric
  g.S = symmetrize(hp * transpose(h) + R);
  const auto chol = Cholesky<3>::factor(g.S);
  if (!chol) throw SingularInnovation("innovation covariance is not positive definite");
  // S·Kᵀ = H·P⁻
  g.K = transpose(chol->solve(hp));
  return g;
}

FilterState update(const Prior& prior, const Mat9x3& K, const Vec3& z) {
  static const Mat3x9 h = build_observation();
  const Vec3 innovation = z - position_of(prior.x);
  FilterState post;
  post.x = prior.x + K * to_column(innovation);
  post.P = symmetrize((Mat9::identity() - K * h) * prior.P);
  post.k = prior.k;
  require_finite(post.x, post.P, "update");
  return post;
}

double normalized_innovation_squared(const Vec3& innovation, const Mat3& S) {
  const auto chol = Cholesky<3>::factor(S);
  if (!chol) throw SingularInnovation("innovation covariance is not positive definite");
  const Vector<3> nu = to_column(innovation);
  const Vector<3> w = chol->solve(nu);
  return std::max(0.0, nu[0] * w[0] + nu[1] * w[1] + nu[2] * w[2]);
}

StepOutput step(const FilterState& state, const std::optional<Vec3>& z, const FilterConfig& config) {
  const Prior prior = predict(state, config);
  StepOutput out;
  if (!z) {
    out.state = FilterState{prior.x, prior.P, prior.k};
    out.refined = position_of(prior.x);
    out.predicted_only = true;
    return out;
  }
  if (!is_finite(*z)) throw InvalidArgument("measurement must be finite");
  const Gain g = gain(prior.P, config.R);
  out.innovation = *z - position_of(prior.x);
  out.nis = normalized_innovation_squared(out.innovation, g.S);
  out.state = update(prior, g.K, *z);
  out.refined = position_of(out.state.x);
  return out;
}

FilterState init_state(const Vec3& z0, const FilterConfig& config) {
  if (!is_finite(z0)) throw InvalidArgument("initial measurement must be finite");
  FilterState s;
  for (std::size_t axis = 0; axis < 3; ++axis) s.x[position_index(axis)] = z0[axis];
  s.P = config.P0;
  s.k = 0;
  return s;
}

}  // namespace fidtrack
