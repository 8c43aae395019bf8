#include <doctest.h>

#include <random>

#include "fidtrack/errors.hpp"
#include "fidtrack/kalman.hpp"
#include "test_support.hpp"

using namespace fidtrack;

namespace {

FilterConfig config_with(double dt, const Mat9& q, const Mat3& r) {
  FilterConfig c;
  c.dt = dt;
  c.Q = q;
  c.R = r;
  c.P0 = Mat9::identity();
  return c;
}

StateVector iota_state() {
  StateVector x;
  for (std::size_t i = 0; i < 9; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

}  // namespace

TEST_SUITE("build_transition") {
  TEST_CASE("dt = 0 gives identity") { CHECK(build_transition(0.0) == Mat9::identity()); }

  TEST_CASE("dt = 1 gives the constant-acceleration blocks") {
    const Mat9 a = build_transition(1.0);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const std::size_t b = axis * 3;
      CHECK(a(b, b) == 1.0);
      CHECK(a(b, b + 1) == 1.0);
      CHECK(a(b, b + 2) == 0.5);
      CHECK(a(b + 1, b) == 0.0);
      CHECK(a(b + 1, b + 1) == 1.0);
      CHECK(a(b + 1, b + 2) == 1.0);
      CHECK(a(b + 2, b + 2) == 1.0);
    }
    // Nothing couples the axes.
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j)
        if (i / 3 != j / 3) CHECK(a(i, j) == 0.0);
  }

  TEST_CASE("dt = 0.005 entries") {
    const Mat9 a = build_transition(0.005);
    CHECK(a(0, 1) == 0.005);
    CHECK(a(0, 2) == doctest::Approx(1.25e-5).epsilon(1e-15));
  }

  TEST_CASE("non-finite dt is rejected") {
    CHECK_THROWS_AS(build_transition(std::nan("")), InvalidArgument);
    CHECK_THROWS_AS(build_transition(INFINITY), InvalidArgument);
  }
}

TEST_SUITE("build_observation") {
  TEST_CASE("selects the position components") {
    const Mat3x9 h = build_observation();
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 9; ++c) CHECK(h(r, c) == (c == 3 * r ? 1.0 : 0.0));
    const auto hx = h * iota_state();
    CHECK(hx[0] == 1.0);
    CHECK(hx[1] == 4.0);
    CHECK(hx[2] == 7.0);
    CHECK(h * transpose(h) == Mat3::identity());
  }
}

TEST_SUITE("predict") {
  TEST_CASE("constant velocity advances position") {
    FilterState s;
    s.x[1] = 1.0;
    const Prior p = predict(s, config_with(0.005, Mat9::zero(), Mat3::identity()));
    CHECK(p.x[0] == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(p.x[1] == 1.0);
    CHECK(p.k == 1);
  }

  TEST_CASE("dt = 0 and Q = 0 leave the belief unchanged") {
    std::mt19937_64 rng(5);
    FilterState s;
    s.x = iota_state();
    s.P = testing::random_spd<9>(rng, 0.1, 10.0);
    const Prior p = predict(s, config_with(0.0, Mat9::zero(), Mat3::identity()));
    CHECK(p.x == s.x);
    for (std::size_t i = 0; i < 81; ++i) CHECK(p.P.data[i] == doctest::Approx(s.P.data[i]).epsilon(1e-15));
  }

  TEST_CASE("P = I, dt = 1 propagates to 2.25 on the position variance") {
    FilterState s;
    s.P = Mat9::identity();
    const Prior p = predict(s, config_with(1.0, Mat9::zero(), Mat3::identity()));
    // Frozen from the dense oracle: (A·I·Aᵀ)(0,0) = 1 + 1 + 0.25.
    const Eigen::Matrix<double, 9, 9> a = testing::oracle_transition(1.0);
    const Eigen::Matrix<double, 9, 9> oracle = a * a.transpose();
    REQUIRE(oracle(0, 0) == doctest::Approx(2.25));
    CHECK(p.P(0, 0) == doctest::Approx(2.25).epsilon(1e-15));
  }

  TEST_CASE("overflow is reported") {
    FilterState s;
    s.x[0] = 1e308;
    s.x[1] = 1e308;
    CHECK_THROWS_AS(predict(s, config_with(10.0, Mat9::zero(), Mat3::identity())), NumericalOverflow);
  }
}

TEST_SUITE("gain") {
  TEST_CASE("identity inputs give S = 2I and K = Hᵀ/2") {
    const Gain g = gain(Mat9::identity(), Mat3::identity());
    CHECK(g.S == Mat3::identity() * 2.0);
    const auto expected = transpose(build_observation()) * 0.5;
    for (std::size_t i = 0; i < 27; ++i) CHECK(g.K.data[i] == doctest::Approx(expected.data[i]).epsilon(1e-15));
  }

  TEST_CASE("huge measurement noise kills the gain") {
    const Gain g = gain(Mat9::identity(), Mat3::identity() * 1e12);
    CHECK(inf_norm(g.K) <= 1e-11);
  }

  TEST_CASE("no state uncertainty gives zero gain") {
    const Gain g = gain(Mat9::zero(), Mat3::identity());
    CHECK(g.K == Mat9x3::zero());
  }

  TEST_CASE("singular innovation covariance is refused") {
    CHECK_THROWS_AS(gain(Mat9::zero(), Mat3::zero()), SingularInnovation);
    CHECK_THROWS_AS(gain(Mat9::zero(), Mat3::diagonal({1.0, -1.0, 1.0})), SingularInnovation);
  }
}

TEST_SUITE("update") {
  TEST_CASE("zero gain keeps the prior") {
    std::mt19937_64 rng(8);
    Prior p{iota_state(), testing::random_spd<9>(rng, 0.1, 1.0), 3};
    const FilterState s = update(p, Mat9x3::zero(), {10, 20, 30});
    CHECK(s.x == p.x);
    for (std::size_t i = 0; i < 81; ++i) CHECK(s.P.data[i] == doctest::Approx(p.P.data[i]).epsilon(1e-15));
    CHECK(s.k == 3);
  }

  TEST_CASE("zero innovation keeps the prior state for any gain") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    Prior p{iota_state(), Mat9::identity(), 1};
    Mat9x3 k;
    for (double& v : k.data) v = g(rng);
    const FilterState s = update(p, k, position_of(p.x));
    CHECK(s.x == p.x);
  }

  TEST_CASE("unit innovation on x moves tx by one half") {
    const Prior p{StateVector{}, Mat9::identity(), 1};
    const Gain g = gain(p.P, Mat3::identity());
    const FilterState s = update(p, g.K, {1.0, 0.0, 0.0});
    // Frozen from the dense oracle product K·ν with K = Hᵀ/2.
    for (std::size_t i = 0; i < 9; ++i) CHECK(s.x[i] == doctest::Approx(i == 0 ? 0.5 : 0.0));
  }
}

TEST_SUITE("step") {
  TEST_CASE("static marker converges onto a constant reading") {
    const FilterConfig c = default_filter_config();
    const Vec3 z{50.0, -130.0, 1230.0};
    FilterState s = init_state(z, c);
    StepOutput out;
    for (int k = 1; k <= 1000; ++k) {
      out = step(s, z, c);
      s = out.state;
      if (k >= 500) REQUIRE(norm(out.refined - z) <= 1e-3);
    }
  }

  TEST_CASE("missing reading after convergence barely moves the estimate") {
    const FilterConfig c = default_filter_config();
    const Vec3 z{1.0, 2.0, 3.0};
    FilterState s = init_state(z, c);
    for (int k = 0; k < 1000; ++k) s = step(s, z, c).state;
    const Vec3 before = position_of(s.x);
    const StepOutput out = step(s, std::nullopt, c);
    CHECK(out.predicted_only);
    CHECK(out.nis == 0.0);
    CHECK(out.innovation == Vec3{});
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const double v = s.x[axis * 3 + 1];
      const double a = s.x[axis * 3 + 2];
      CHECK(std::abs(out.refined[axis] - before[axis]) <= std::abs(v) * c.dt + std::abs(a) * c.dt * c.dt / 2 + 1e-15);
    }
    const Prior p = predict(s, c);
    CHECK(out.state.x == p.x);
    CHECK(out.state.P == p.P);
  }

  TEST_CASE("consistent measurement with dt = 0 and Q = 0") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      FilterState s;
      std::normal_distribution<double> g;
      for (std::size_t i = 0; i < 9; ++i) s.x[i] = g(rng);
      s.P = testing::random_spd<9>(rng, 1e-3, 10.0);
      const FilterConfig c = config_with(0.0, Mat9::zero(), testing::random_spd<3>(rng, 0.01, 1.0));
      const StepOutput out = step(s, position_of(s.x), c);
      CHECK(out.state.x == s.x);
      CHECK(trace(out.state.P) <= trace(s.P) + 1e-12);
    }
  }

  TEST_CASE("step index increments and refined is H·x") {
    const FilterConfig c = default_filter_config();
    FilterState s = init_state({1, 2, 3}, c);
    const StepOutput out = step(s, Vec3{1.1, 2.1, 2.9}, c);
    CHECK(out.state.k == 1);
    CHECK(out.refined == Vec3{out.state.x[0], out.state.x[3], out.state.x[6]});
    CHECK_FALSE(out.predicted_only);
    CHECK(out.innovation.x == doctest::Approx(0.1));
  }

  TEST_CASE("non-finite measurement is rejected") {
    const FilterConfig c = default_filter_config();
    CHECK_THROWS_AS(step(init_state({0, 0, 0}, c), Vec3{0, std::nan(""), 0}, c), InvalidArgument);
  }
}

TEST_SUITE("init_state") {
  TEST_CASE("positions from the first reading, derivatives zero") {
    const FilterConfig c = default_filter_config();
    const FilterState s = init_state({1, 2, 3}, c);
    const StateVector expected = StateVector::from({1, 0, 0, 2, 0, 0, 3, 0, 0});
    CHECK(s.x == expected);
    CHECK(s.k == 0);
    CHECK(s.P == c.P0);
  }

  TEST_CASE("default P0 position variance equals R") {
    const FilterConfig c = default_filter_config();
    CHECK(c.P0(0, 0) == 0.0225);
    CHECK(c.P0(0, 0) == c.R(0, 0));
    CHECK(c.P0(6, 6) == c.R(2, 2));
  }

  TEST_CASE("non-finite first reading is rejected") {
    CHECK_THROWS_AS(init_state({INFINITY, 0, 0}, default_filter_config()), InvalidArgument);
  }
}

TEST_SUITE("filter config") {
  TEST_CASE("per-second process noise scales with dt") {
    FilterParams p;
    const FilterConfig c = make_filter_config(p);
    CHECK(c.Q(4, 4) == doctest::Approx(0.001 * 0.005));
    CHECK(c.Q(4, 5) == 0.0);
    p.q_scaling = ProcessNoiseScaling::kPerStep;
    CHECK(make_filter_config(p).Q(4, 4) == 0.001);
  }

  TEST_CASE("invalid params are rejected") {
    FilterParams p;
    p.dt_s = 0.0;
    CHECK_THROWS_AS(make_filter_config(p), InvalidArgument);
    p = {};
    p.r_var.z = 0.0;
    CHECK_THROWS_AS(make_filter_config(p), InvalidArgument);
    p = {};
    p.q_var = -1.0;
    CHECK_THROWS_AS(make_filter_config(p), InvalidArgument);
  }
}

TEST_SUITE("properties") {
  TEST_CASE("step matches the dense reference on random inputs") {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto rc = testing::random_case(rng);
      const StepOutput got = step(rc.state, rc.z, rc.config);
      const auto want = testing::oracle_step(rc.state, rc.z, rc.config);
      const double xs = want.x.cwiseAbs().maxCoeff();
      const double ps = want.P.cwiseAbs().maxCoeff();
      for (int i = 0; i < 9; ++i) worst = std::max(worst, testing::rel_err(got.state.x[i], want.x(i), xs));
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) worst = std::max(worst, testing::rel_err(got.state.P(i, j), want.P(i, j), ps));
      worst = std::max(worst, testing::rel_err(got.nis, want.nis, 1.0));
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, testing::rel_err(got.innovation[i], want.innovation(i), 1.0));
      }
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("covariance stays symmetric and PSD over long random runs") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    for (int run = 0; run < 5; ++run) {
      auto rc = testing::random_case(rng);
      FilterState s = rc.state;
      for (int k = 0; k < 1000; ++k) {
        const Vec3 z = position_of(s.x) + Vec3{g(rng), g(rng), g(rng)};
        s = step(s, z, rc.config).state;
        const double scale = std::max(1.0, inf_norm(s.P));
        REQUIRE(testing::asymmetry(s.P) <= 1e-9 * scale);
        REQUIRE(testing::min_eigenvalue(s.P) >= -1e-9);
      }
    }
  }

  TEST_CASE("zero innovation is an exact fixed point") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      const auto rc = testing::random_case(rng);
      const Prior p = predict(rc.state, rc.config);
      const StepOutput out = step(rc.state, position_of(p.x), rc.config);
      CHECK(out.state.x == p.x);
      CHECK(out.nis == 0.0);
    }
  }

  TEST_CASE("gain never overshoots the measurement in the S metric") {
    // With S = LLᵀ, L⁻¹(HK)L = L⁻¹(HP⁻Hᵀ)L⁻ᵀ is symmetric with eigenvalues in [0, 1].
    std::mt19937_64 rng(41);
    const auto h = testing::oracle_observation();
    for (int trial = 0; trial < 500; ++trial) {
      const Mat9 p = testing::random_spd<9>(rng, 1e-6, 1e3);
      const Mat3 r = testing::random_spd<3>(rng, 1e-4, 1e2);
      const Gain g = gain(p, r);
      const Eigen::Matrix3d hk = h * testing::to_eigen(g.K);
      const Eigen::Matrix3d l = testing::to_eigen(g.S).llt().matrixL();
      const Eigen::Matrix3d w = l.triangularView<Eigen::Lower>().solve(hk * l);
      const double spectral = Eigen::JacobiSVD<Eigen::Matrix3d>(w).singularValues()(0);
      CHECK(spectral <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("NIS averages to the measurement dimension on a well-specified model") {
    // Truth follows the filter's own model with process noise drawn from Q.
    FilterParams params;
    const FilterConfig c = make_filter_config(params);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    const Mat9 a = build_transition(c.dt);
    const double q_std = std::sqrt(c.Q(0, 0));
    StateVector truth = StateVector::from({0, 1, 0.1, 0, 1, 0.1, 1230, 0, 0.1});
    const auto meas = [&] {
      return position_of(truth) + Vec3{std::sqrt(c.R(0, 0)) * g(rng), std::sqrt(c.R(1, 1)) * g(rng),
                                       std::sqrt(c.R(2, 2)) * g(rng)};
    };
    FilterState s = init_state(meas(), c);
    double total = 0.0;
    const int n = 1000;
    for (int k = 0; k < n; ++k) {
      truth = a * truth;
      for (std::size_t i = 0; i < 9; ++i) truth[i] += q_std * g(rng);
      const StepOutput out = step(s, meas(), c);
      total += out.nis;
      s = out.state;
    }
    const double mean = total / n;
    CHECK(mean >= 2.5);
    CHECK(mean <= 3.5);
  }
}
