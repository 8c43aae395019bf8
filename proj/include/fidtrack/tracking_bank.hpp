#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fidtrack/kalman.hpp"
#include "fidtrack/rigidbody.hpp"

namespace fidtrack {

struct Frame {
  std::uint64_t k = 0;
  double t = 0.0;  // seconds
  std::vector<std::optional<Vec3>> readings;
};

struct GateConfig {
  double threshold = 16.27;  // chi-square(3) 99.9th percentile
  std::uint32_t persistence = 3;
  // When set, a measurement whose NIS exceeds the threshold is not fused;
  // the filter runs a prediction-only step instead.
  bool reject_gated = false;
};

struct FiducialOutput {
  bool tracked = false;  // false until the first valid reading
  Vec3 refined{};
  double nis = 0.0;
  bool occluded_suspect = false;
  bool predicted_only = false;

  friend bool operator==(const FiducialOutput&, const FiducialOutput&) = default;
};

struct FilteredFrame {
  std::uint64_t k = 0;
  std::vector<FiducialOutput> fiducials;

  friend bool operator==(const FilteredFrame&, const FilteredFrame&) = default;
};

// One independent filter per fiducial. Frames must arrive with consecutive k.
class TrackerBank {
 public:
  TrackerBank(std::size_t n_fiducials, FilterConfig config, GateConfig gate = {});

  FilteredFrame ingest(const Frame& frame);

  std::size_t size() const { return trackers_.size(); }
  const FilterConfig& config() const { return config_; }
  const GateConfig& gate() const { return gate_; }
  // nullopt while the fiducial has not been seen yet.
  const std::optional<FilterState>& state(std::size_t fiducial) const { return trackers_.at(fiducial).state; }
  std::uint32_t exceedance_run(std::size_t fiducial) const { return trackers_.at(fiducial).run; }

 private:
  struct Tracker {
    std::optional<FilterState> state;
    std::uint32_t run = 0;  // consecutive frames with NIS above threshold
  };

  FiducialOutput advance(Tracker& tracker, const std::optional<Vec3>& reading) const;

  FilterConfig config_;
  GateConfig gate_;
  std::vector<Tracker> trackers_;
  std::optional<std::uint64_t> last_k_;
};

TrackerBank new_bank(std::size_t n_fiducials, const FilterConfig& config, double gate_threshold);

/// Feeds every frame through the bank on the calling thread and returns
/// fiducial updates per second of wall-clock time. Throws InvalidArgument on
/// an empty stream.
double throughput_bench(TrackerBank& bank, std::span<const Frame> frames);

/// One frame per recorded step, every reading present.
std::vector<Frame> frames_from_session(const SessionData& session);

std::vector<FilteredFrame> filter_frames(TrackerBank& bank, std::span<const Frame> frames);

}  // namespace fidtrack
