#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "fidtrack/errors.hpp"
#include "fidtrack/metrics.hpp"

using namespace fidtrack;

namespace {

struct Run {
  SessionData session;
  std::vector<FilteredFrame> filtered;
};

Run run_pipeline(const SimConfig& c) {
  Run r{simulate_session(c), {}};
  TrackerBank bank = new_bank(r.session.fiducial_count, default_filter_config(), 16.27);
  r.filtered = filter_frames(bank, frames_from_session(r.session));
  return r;
}

}  // namespace

TEST_SUITE("mse") {
  TEST_CASE("identical series") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(mse(a, a, 0) == 0.0);
    CHECK(error_variance(a, a, 0) == 0.0);
  }

  TEST_CASE("constant error") {
    for (std::size_t n : {1u, 7u, 1000u}) {
      std::vector<double> truth(n), meas(n);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = static_cast<double>(i) * 0.37;
        meas[i] = truth[i] + 0.1;
      }
      CHECK(mse(meas, truth, 0) == doctest::Approx(0.01).epsilon(1e-12));
      CHECK(error_variance(meas, truth, 0) <= 1e-20);
    }
  }

  TEST_CASE("burnout skips the head") {
    const std::vector<double> truth{0, 0, 0, 0};
    const std::vector<double> meas{100, 100, 1, -1};
    CHECK(mse(meas, truth, 2) == 1.0);
    CHECK(error_variance(meas, truth, 2) == 1.0);
  }

  TEST_CASE("errors") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{1, 2};
    CHECK_THROWS_AS(mse(a, b, 0), InvalidArgument);
    CHECK_THROWS_AS(mse(a, a, 3), InvalidArgument);
    CHECK_THROWS_AS(error_variance(a, a, 5), InvalidArgument);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}, 0), InvalidArgument);
  }

  TEST_CASE("default raw x-axis error level") {
    const SessionData s = simulate_session(default_sim_config());
    std::vector<double> meas, truth;
    for (std::size_t k = 0; k < s.step_count(); ++k) {
      meas.push_back(s.at(k, 0).measured.x);
      truth.push_back(s.at(k, 0).truth.x);
    }
    CHECK(mse(meas, truth, 100) == doctest::Approx(2.1e-2).epsilon(0.2));
    CHECK(error_variance(meas, truth, 100) == doctest::Approx(2.09e-2).epsilon(0.2));
  }
}

TEST_SUITE("properties") {
  TEST_CASE("mse is variance plus squared mean") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> bias(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 50 + static_cast<std::size_t>(trial) * 7;
      std::vector<double> truth(n), meas(n);
      const double b = bias(rng);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = 1000.0 * g(rng);
        meas[i] = truth[i] + b + 0.2 * g(rng);
      }
      const std::size_t burn = n / 10;
      double mean = 0.0;
      for (std::size_t i = burn; i < n; ++i) mean += meas[i] - truth[i];
      mean /= static_cast<double>(n - burn);
      const double m = mse(meas, truth, burn);
      CHECK(m >= 0.0);
      CHECK(std::abs(m - (error_variance(meas, truth, burn) + mean * mean)) <= 1e-12 * m);
    }
  }

  TEST_CASE("mse vanishes only for equal series") {
    std::vector<double> a(100, 3.0);
    std::vector<double> b = a;
    CHECK(mse(a, b, 10) == 0.0);
    b[50] += 1e-9;
    CHECK(mse(a, b, 10) > 0.0);
    CHECK(mse(a, b, 60) == 0.0);
  }
}

TEST_SUITE("build_report") {
  TEST_CASE("default run") {
    const Run r = run_pipeline(default_sim_config());
    const MetricsReport rep = build_report(r.session, r.filtered);
    REQUIRE(rep.rows.size() == 12);
    CHECK(rep.burnout_samples == 100);
    CHECK(rep.n_used == 900);
    const double raw[3] = {0.0225, 0.0225, 0.0441};
    for (std::size_t f = 0; f < 4; ++f) {
      for (std::size_t axis = 0; axis < 3; ++axis) {
        const MetricsRow& row = rep.row(f, axis);
        CHECK(row.fiducial == f);
        CHECK(row.axis == axis);
        CHECK(row.mse_raw == doctest::Approx(raw[axis]).epsilon(0.2));
        CHECK(row.mse_filtered <= 1e-3);
        CHECK(row.var_filtered <= row.mse_filtered * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("no noise and no motion gives zero error") {
    SimConfig c = default_sim_config();
    c.noise_std = {};
    c.a0 = {};
    c.omega = {};
    const Run r = run_pipeline(c);
    for (const auto& row : build_report(r.session, r.filtered).rows) {
      CHECK(row.mse_raw <= 1e-12);
      CHECK(row.mse_filtered <= 1e-12);
      CHECK(row.var_raw <= 1e-12);
      CHECK(row.var_filtered <= 1e-12);
    }
  }

  TEST_CASE("matches mse on extracted series") {
    const Run r = run_pipeline(default_sim_config(5));
    const MetricsReport rep = build_report(r.session, r.filtered, 250);
    CHECK(rep.n_used == 750);
    std::vector<double> filt, truth;
    for (std::size_t k = 0; k < r.session.step_count(); ++k) {
      filt.push_back(r.filtered[k].fiducials[2].refined.y);
      truth.push_back(r.session.at(k, 2).truth.y);
    }
    CHECK(rep.row(2, 1).mse_filtered == mse(filt, truth, 250));
  }

  TEST_CASE("invalid inputs") {
    const Run r = run_pipeline(default_sim_config());
    CHECK_THROWS_AS(build_report(r.session, r.filtered, 1000), InvalidArgument);

    const std::span<const FilteredFrame> short_stream(r.filtered.data(), 999);
    CHECK_THROWS_AS(build_report(r.session, short_stream), SchemaError);

    auto shifted = r.filtered;
    shifted[10].k = 11;
    CHECK_THROWS_AS(build_report(r.session, shifted), SchemaError);

    auto narrow = r.filtered;
    narrow[3].fiducials.pop_back();
    CHECK_THROWS_AS(build_report(r.session, narrow), SchemaError);

    SessionData no_truth = r.session;
    no_truth.has_truth = false;
    CHECK_THROWS_AS(build_report(no_truth, r.filtered), InvalidArgument);
  }

  TEST_CASE("permuting fiducials permutes rows") {
    const SimConfig c = default_sim_config(8);
    const Run a = run_pipeline(c);
    const std::vector<std::size_t> perm{3, 1, 0, 2};
    // Permuting the initial positions alone would change the noise draw
    // assignment, so permute the finished session instead.
    Run b{a.session, {}};
    for (std::size_t k = 0; k < a.session.step_count(); ++k)
      for (std::size_t i = 0; i < 4; ++i) b.session.at(k, i) = a.session.at(k, perm[i]);
    TrackerBank bank = new_bank(4, default_filter_config(), 16.27);
    b.filtered = filter_frames(bank, frames_from_session(b.session));
    const MetricsReport ra = build_report(a.session, a.filtered);
    const MetricsReport rb = build_report(b.session, b.filtered);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t axis = 0; axis < 3; ++axis) {
        MetricsRow expect = ra.row(perm[i], axis);
        expect.fiducial = i;
        CHECK(rb.row(i, axis) == expect);
      }
    }
  }
}

TEST_SUITE("report output") {
  TEST_CASE("csv layout") {
    const Run r = run_pipeline(default_sim_config());
    const MetricsReport rep = build_report(r.session, r.filtered);
    std::ostringstream os;
    write_report_csv(os, rep);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "fiducial_id,axis,mse_raw,mse_filtered,var_raw,var_filtered,burnout,n_used");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 12);
  }

  TEST_CASE("table mentions every fiducial and axis") {
    const Run r = run_pipeline(default_sim_config());
    std::ostringstream os;
    write_report_table(os, build_report(r.session, r.filtered));
    const std::string text = os.str();
    CHECK(text.find("X") != std::string::npos);
    CHECK(text.find("Z") != std::string::npos);
    CHECK(axis_name(0) == 'X');
    CHECK(axis_name(2) == 'Z');
  }
}
