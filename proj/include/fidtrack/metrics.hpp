#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fidtrack/rigidbody.hpp"
#include "fidtrack/tracking_bank.hpp"

namespace fidtrack {

inline constexpr std::size_t kDefaultBurnout = 100;

/// Mean of (measured − truth)² over samples [burnout, n).
double mse(std::span<const double> measured, std::span<const double> truth, std::size_t burnout);

/// Variance (denominator n) of measured − truth over samples [burnout, n).
double error_variance(std::span<const double> measured, std::span<const double> truth, std::size_t burnout);

struct MetricsRow {
  std::size_t fiducial = 0;
  std::size_t axis = 0;  // 0 = x, 1 = y, 2 = z
  double mse_raw = 0.0;
  double mse_filtered = 0.0;
  double var_raw = 0.0;
  double var_filtered = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;  // fiducial-major, axis-minor
  std::size_t burnout_samples = 0;
  std::size_t n_used = 0;

  const MetricsRow& row(std::size_t fiducial, std::size_t axis) const { return rows.at(fiducial * 3 + axis); }
};

/// Raw (session measurements) and filtered (refined positions) errors against
/// the session's ground truth. Throws SchemaError when the streams do not line
/// up, and InvalidArgument when the session has no truth or the burnout leaves
/// nothing to evaluate.
MetricsReport build_report(const SessionData& session, std::span<const FilteredFrame> filtered,
                           std::size_t burnout = kDefaultBurnout);

char axis_name(std::size_t axis);

void write_report_table(std::ostream& out, const MetricsReport& report);
void write_report_csv(std::ostream& out, const MetricsReport& report);

}  // namespace fidtrack
