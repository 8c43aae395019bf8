#include "fidtrack/tracking_bank.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "fidtrack/errors.hpp"

namespace fidtrack {

TrackerBank::TrackerBank(std::size_t n_fiducials, FilterConfig config, GateConfig gate)
    : config_(std::move(config)), gate_(gate), trackers_(n_fiducials) {
  if (n_fiducials == 0) throw InvalidArgument("tracker bank needs at least one fiducial");
  if (!std::isfinite(gate_.threshold) || gate_.threshold <= 0.0) {
    throw InvalidArgument("gate threshold must be > 0");
  }
  if (gate_.persistence == 0) throw InvalidArgument("gate persistence must be >= 1");
}

TrackerBank new_bank(std::size_t n_fiducials, const FilterConfig& config, double gate_threshold) {
  GateConfig gate;
  gate.threshold = gate_threshold;
  return TrackerBank(n_fiducials, config, gate);
}

FiducialOutput TrackerBank::advance(Tracker& tracker, const std::optional<Vec3>& reading) const {
  FiducialOutput out;
  if (!tracker.state) {
    if (!reading) return out;  // idle until first sighting
    tracker.state = init_state(*reading, config_);
    out.tracked = true;
    out.refined = position_of(tracker.state->x);
    return out;
  }

  StepOutput step_out = step(*tracker.state, reading, config_);
  if (!step_out.predicted_only) {
    const bool exceeded = step_out.nis > gate_.threshold;
    tracker.run = exceeded ? tracker.run + 1 : 0;
    if (exceeded && gate_.reject_gated) {
      const double nis = step_out.nis;
      step_out = step(*tracker.state, std::nullopt, config_);
      step_out.nis = nis;
    }
  }
  tracker.state = step_out.state;

  out.tracked = true;
  out.refined = step_out.refined;
  out.nis = step_out.nis;
  out.predicted_only = step_out.predicted_only;
  out.occluded_suspect = tracker.run >= gate_.persistence;
  return out;
}

FilteredFrame TrackerBank::ingest(const Frame& frame) {
  if (frame.readings.size() != trackers_.size()) {
    throw SchemaError("frame has " + std::to_string(frame.readings.size()) + " readings, bank tracks " +
                      std::to_string(trackers_.size()));
  }
  if (last_k_ && frame.k != *last_k_ + 1) {
    throw OrderingError("frame k=" + std::to_string(frame.k) + " does not follow k=" + std::to_string(*last_k_));
  }

  FilteredFrame out;
  out.k = frame.k;
  out.fiducials.reserve(trackers_.size());
  // Filters share nothing; updating them one by one in ID order keeps the
  // output layout deterministic.
  for (std::size_t f = 0; f < trackers_.size(); ++f) {
    out.fiducials.push_back(advance(trackers_[f], frame.readings[f]));
  }
  last_k_ = frame.k;
  return out;
}

double throughput_bench(TrackerBank& bank, std::span<const Frame> frames) {
  if (frames.empty()) throw InvalidArgument("throughput_bench needs a non-empty frame stream");
  std::size_t updates = 0;
  double sink = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (const Frame& frame : frames) {
    const FilteredFrame out = bank.ingest(frame);
    for (const auto& f : out.fiducials) sink += f.refined.x;
    updates += out.fiducials.size();
  }
  const auto stop = std::chrono::steady_clock::now();
  // Keep the optimizer from discarding the work.
  volatile double keep = sink;
  (void)keep;
  const double seconds = std::chrono::duration<double>(stop - start).count();
  return static_cast<double>(updates) / std::max(seconds, 1e-9);
}

std::vector<Frame> frames_from_session(const SessionData& session) {
  std::vector<Frame> frames(session.step_count());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    frames[k].k = k;
    frames[k].t = static_cast<double>(k) * session.dt;
    frames[k].readings.reserve(session.fiducial_count);
    for (std::size_t f = 0; f < session.fiducial_count; ++f) {
      frames[k].readings.emplace_back(session.at(k, f).measured);
    }
  }
  return frames;
}

std::vector<FilteredFrame> filter_frames(TrackerBank& bank, std::span<const Frame> frames) {
  std::vector<FilteredFrame> out;
  out.reserve(frames.size());
  for (const Frame& frame : frames) out.push_back(bank.ingest(frame));
  return out;
}

}  // namespace fidtrack
