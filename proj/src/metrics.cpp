#include "fidtrack/metrics.hpp"

#include <cstdio>
#include <ostream>
#include <string>

#include "fidtrack/errors.hpp"
#include "fidtrack/format.hpp"

namespace fidtrack {

namespace {

std::size_t effective_count(std::span<const double> measured, std::span<const double> truth,
                            std::size_t burnout) {
  if (measured.size() != truth.size()) {
    throw InvalidArgument("series length mismatch: " + std::to_string(measured.size()) + " vs " +
                          std::to_string(truth.size()));
  }
  if (burnout >= measured.size()) {
    throw InvalidArgument("burnout of " + std::to_string(burnout) + " leaves no samples out of " +
                          std::to_string(measured.size()));
  }
  return measured.size() - burnout;
}

}  // namespace

double mse(std::span<const double> measured, std::span<const double> truth, std::size_t burnout) {
  const std::size_t n = effective_count(measured, truth, burnout);
  double sum = 0.0;
  for (std::size_t i = burnout; i < measured.size(); ++i) {
    const double e = measured[i] - truth[i];
    sum += e * e;
  }
  return sum / static_cast<double>(n);
}

double error_variance(std::span<const double> measured, std::span<const double> truth, std::size_t burnout) {
  const std::size_t n = effective_count(measured, truth, burnout);
  double mean = 0.0;
  for (std::size_t i = burnout; i < measured.size(); ++i) mean += measured[i] - truth[i];
  mean /= static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = burnout; i < measured.size(); ++i) {
    const double d = (measured[i] - truth[i]) - mean;
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

MetricsReport build_report(const SessionData& session, std::span<const FilteredFrame> filtered,
                           std::size_t burnout) {
  if (!session.has_truth) throw InvalidArgument("no ground truth in session");
  const std::size_t steps = session.step_count();
  const std::size_t n_fid = session.fiducial_count;
  if (burnout >= steps) {
    throw InvalidArgument("burnout of " + std::to_string(burnout) + " leaves no samples out of " +
                          std::to_string(steps));
  }
  if (filtered.size() != steps) {
    throw SchemaError("filtered stream has " + std::to_string(filtered.size()) + " frames, session has " +
                      std::to_string(steps) + " steps");
  }
  for (std::size_t k = 0; k < steps; ++k) {
    if (filtered[k].k != k) throw SchemaError("filtered frame " + std::to_string(k) + " has k=" +
                                              std::to_string(filtered[k].k));
    if (filtered[k].fiducials.size() != n_fid) {
      throw SchemaError("filtered frame " + std::to_string(k) + " has wrong fiducial count");
    }
    for (std::size_t f = 0; f < n_fid; ++f) {
      if (!filtered[k].fiducials[f].tracked) {
        throw SchemaError("fiducial " + std::to_string(f) + " untracked at k=" + std::to_string(k));
      }
    }
  }

  MetricsReport report;
  report.burnout_samples = burnout;
  std::vector<double> truth(steps), raw(steps), refined(steps);
  for (std::size_t f = 0; f < n_fid; ++f) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
      for (std::size_t k = 0; k < steps; ++k) {
        const FiducialSample& s = session.at(k, f);
        truth[k] = s.truth[axis];
        raw[k] = s.measured[axis];
        refined[k] = filtered[k].fiducials[f].refined[axis];
      }
      MetricsRow row;
      row.fiducial = f;
      row.axis = axis;
      row.mse_raw = mse(raw, truth, burnout);
      row.mse_filtered = mse(refined, truth, burnout);
      row.var_raw = error_variance(raw, truth, burnout);
      row.var_filtered = error_variance(refined, truth, burnout);
      report.rows.push_back(row);
    }
  }
  report.n_used = steps - burnout;
  return report;
}

char axis_name(std::size_t axis) { return "XYZ"[axis]; }

void write_report_table(std::ostream& out, const MetricsReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %12s %12s   %12s %12s\n", "", "MSE raw", "MSE KF", "Var raw",
                "Var KF");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "Fiducial %zu, %c    %12.3e %12.3e   %12.3e %12.3e\n", r.fiducial + 1,
                  axis_name(r.axis), r.mse_raw, r.mse_filtered, r.var_raw, r.var_filtered);
    out << line;
  }
  out << "burnout " << report.burnout_samples << " samples, " << report.n_used << " used (mm^2)\n";
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  out << "fiducial_id,axis,mse_raw,mse_filtered,var_raw,var_filtered,burnout,n_used\n";
  for (const auto& r : report.rows) {
    out << r.fiducial << ',' << static_cast<char>(axis_name(r.axis) - 'A' + 'a') << ',' << format_double(r.mse_raw)
        << ',' << format_double(r.mse_filtered) << ',' << format_double(r.var_raw) << ','
        << format_double(r.var_filtered) << ',' << report.burnout_samples << ',' << report.n_used << '\n';
  }
}

}  // namespace fidtrack
