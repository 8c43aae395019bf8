#pragma once

// On-disk formats.
//
// Config: one JSON object with a "filter" and a "sim" section. Unknown keys
// are rejected; omitted keys take their defaults and are echoed on write.
//
// Session recording (CSV, LF line endings, '.' radix, 17 significant digits):
//   # {"format":"fidtrack-session","version":1,"dt":...,"fiducials":N,
//      "seed":...,"has_truth":true,"config":{...sim section...}}
//   k,t_s,fiducial_id,truth_x,truth_y,truth_z,meas_x,meas_y,meas_z,occluded
//   0,0,0,-180,180,1230,-179.87,...,0
// Rows are sorted by (k, fiducial_id). Recordings without ground truth drop
// the three truth columns.
//
// Filtered output (same conventions):
//   # {"format":"fidtrack-filtered","version":1,"dt":...,"fiducials":N}
//   k,t_s,fiducial_id,meas_x,meas_y,meas_z,refined_x,refined_y,refined_z,nis,occluded_suspect,predicted_only
// Missing measurements and not-yet-tracked fiducials leave their fields empty.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fidtrack/kalman.hpp"
#include "fidtrack/rigidbody.hpp"
#include "fidtrack/tracking_bank.hpp"

namespace fidtrack {

inline constexpr int kSessionSchemaVersion = 1;

struct FilterSection {
  FilterParams params;
  GateConfig gate;
  std::size_t burnout = 100;
};

struct ConfigFile {
  FilterSection filter;
  SimConfig sim;
};

/// Simulation filter profile plus the default simulated array.
ConfigFile default_config();

/// Throws ConfigError naming the offending key (as a JSON path).
ConfigFile parse_config(std::string_view json_text);
std::string config_to_json(const ConfigFile& config);

ConfigFile read_config(const std::filesystem::path& path);
void write_config(const ConfigFile& config, const std::filesystem::path& path);

FilterConfig filter_config_from(const FilterSection& section);

void write_session(const SessionData& session, std::ostream& out);
void write_session(const SessionData& session, const std::filesystem::path& path);
SessionData read_session(std::istream& in);
SessionData read_session(const std::filesystem::path& path);

struct FilteredSession {
  double dt = 0.0;
  std::size_t fiducial_count = 0;
  std::vector<FilteredFrame> frames;
  std::vector<std::optional<Vec3>> measured;  // step-major, fiducial-minor

  const std::optional<Vec3>& measured_at(std::size_t k, std::size_t f) const {
    return measured[k * fiducial_count + f];
  }

  friend bool operator==(const FilteredSession&, const FilteredSession&) = default;
};

FilteredSession make_filtered_session(double dt, std::size_t fiducial_count, const std::vector<Frame>& inputs,
                                      std::vector<FilteredFrame> outputs);

void write_filtered(const FilteredSession& filtered, std::ostream& out);
void write_filtered(const FilteredSession& filtered, const std::filesystem::path& path);
FilteredSession read_filtered(std::istream& in);
FilteredSession read_filtered(const std::filesystem::path& path);

}  // namespace fidtrack
