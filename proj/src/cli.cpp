#include "fidtrack/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fidtrack/errors.hpp"
#include "fidtrack/format.hpp"
#include "fidtrack/metrics.hpp"
#include "fidtrack/session_io.hpp"
#include "fidtrack/svg_chart.hpp"
#include "fidtrack/tracking_bank.hpp"

namespace fidtrack {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> fps;
  std::optional<std::size_t> burnout;
  std::optional<double> gate;
  std::optional<std::size_t> last;
  std::string format;
  std::string out_path;
  std::string in_path;
  std::string truth_path;
  std::string filtered_path;
  std::size_t fiducial = 1;
  std::string axis = "x";
  std::size_t frames = 100000;
};

ConfigFile load_config(const Options& o) {
  ConfigFile c = o.config_path.empty() ? default_config() : read_config(o.config_path);
  if (o.seed) c.sim.seed = *o.seed;
  if (o.duration) {
    if (!(*o.duration > 0.0)) throw UsageError("--duration must be > 0");
    c.sim.duration = *o.duration;
  }
  if (o.fps) {
    if (!(*o.fps > 0.0)) throw UsageError("--fps must be > 0");
    c.sim.fps = *o.fps;
  }
  if (o.burnout) c.filter.burnout = *o.burnout;
  if (o.gate) {
    if (!(*o.gate > 0.0)) throw UsageError("--gate must be > 0");
    c.filter.gate.threshold = *o.gate;
  }
  return c;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Writes to --out when given, otherwise to stdout.
void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing", o.out_path);
  f << text;
  f.flush();
  if (!f) throw IoError("write failed", o.out_path);
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ConfigFile c = load_config(o);
  const SessionData s = simulate_session(c.sim);
  write_session(s, std::filesystem::path(o.out_path));

  out << "wrote " << s.step_count() << " steps x " << s.fiducial_count << " fiducials to " << o.out_path << "\n";
  if (c.sim.fiducial_initials.size() >= 2) {
    out << "consecutive fiducial distances (mm):";
    for (double d : pairwise_distances(c.sim.fiducial_initials)) out << ' ' << fmt2(d);
    out << "\n";
  }
  std::vector<double> sum(3, 0.0), sumsq(3, 0.0);
  for (const auto& smp : s.samples) {
    for (std::size_t a = 0; a < 3; ++a) {
      const double e = smp.measured[a] - smp.truth[a];
      sum[a] += e;
      sumsq[a] += e * e;
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(s.samples.size(), 1));
  out << "measurement noise std (mm):";
  for (std::size_t a = 0; a < 3; ++a) {
    const double mean = sum[a] / n;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", std::sqrt(std::max(0.0, sumsq[a] / n - mean * mean)));
    out << ' ' << axis_name(a) << '=' << buf;
  }
  out << "\n";
  return kExitOk;
}

int cmd_filter(const Options& o, std::ostream& out) {
  const ConfigFile c = load_config(o);
  const SessionData s = read_session(std::filesystem::path(o.in_path));
  FilterParams params = c.filter.params;
  params.dt_s = s.dt;  // the recording's cadence wins
  TrackerBank bank(s.fiducial_count, make_filter_config(params), c.filter.gate);
  const std::vector<Frame> frames = frames_from_session(s);
  std::vector<FilteredFrame> outputs = filter_frames(bank, frames);

  std::size_t flagged = 0;
  for (const auto& f : outputs)
    for (const auto& fid : f.fiducials) flagged += fid.occluded_suspect ? 1 : 0;

  const FilteredSession fs = make_filtered_session(s.dt, s.fiducial_count, frames, std::move(outputs));
  write_filtered(fs, std::filesystem::path(o.out_path));
  out << "filtered " << fs.frames.size() << " frames x " << fs.fiducial_count << " fiducials to " << o.out_path
      << " (" << flagged << " fiducial-frames flagged occluded_suspect)\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const ConfigFile c = load_config(o);
  const SessionData truth = read_session(std::filesystem::path(o.truth_path));
  if (!truth.has_truth) throw InvalidArgument("no ground truth in " + o.truth_path);
  const FilteredSession fs = read_filtered(std::filesystem::path(o.filtered_path));
  if (fs.fiducial_count != truth.fiducial_count) throw SchemaError("fiducial counts differ between inputs");
  if (fs.dt != truth.dt) throw SchemaError("dt differs between inputs");
  const MetricsReport report = build_report(truth, fs.frames, c.filter.burnout);

  std::ostringstream text;
  if (o.format == "csv") {
    write_report_csv(text, report);
  } else if (o.format == "table" || o.format.empty()) {
    write_report_table(text, report);
  } else {
    throw UsageError("evaluate supports --format table or csv");
  }
  emit(o, out, text.str());
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  const FilteredSession fs = read_filtered(std::filesystem::path(o.filtered_path));
  std::optional<SessionData> truth;
  if (!o.truth_path.empty()) {
    truth = read_session(std::filesystem::path(o.truth_path));
    if (!truth->has_truth) throw InvalidArgument("no ground truth in " + o.truth_path);
    if (truth->fiducial_count != fs.fiducial_count || truth->step_count() != fs.frames.size()) {
      throw SchemaError("truth session does not match the filtered session");
    }
  }
  if (o.fiducial < 1 || o.fiducial > fs.fiducial_count) {
    throw UsageError("--fiducial must be in 1.." + std::to_string(fs.fiducial_count));
  }
  if (o.axis.size() != 1 || std::string("xyz").find(o.axis[0]) == std::string::npos) {
    throw UsageError("--axis must be x, y or z");
  }
  const std::size_t fid = o.fiducial - 1;
  const std::size_t axis = static_cast<std::size_t>(o.axis[0] - 'x');
  const std::size_t total = fs.frames.size();
  std::size_t count = o.last.value_or(total);
  if (count > total) {
    err << "warning: window of " << count << " samples exceeds session length " << total << "; using " << total
        << "\n";
    count = total;
  }
  const std::size_t begin = total - count;

  LineChart chart;
  chart.title = "Fiducial " + std::to_string(o.fiducial) + ", " + o.axis + " direction";
  chart.x_label = "sample k";
  chart.y_label = "mm";
  ChartSeries truth_s{"ground truth", "#2ca02c", {}};
  ChartSeries meas_s{"measured", "#1f77b4", {}};
  ChartSeries ref_s{"Kalman filtered", "#d62728", {}};

  std::ostringstream csv;
  csv << "k" << (truth ? ",truth" : "") << ",measured,refined\n";
  for (std::size_t i = begin; i < total; ++i) {
    const auto& m = fs.measured_at(i, fid);
    const auto& r = fs.frames[i].fiducials[fid];
    csv << fs.frames[i].k;
    if (truth) csv << ',' << format_double(truth->at(i, fid).truth[axis]);
    csv << ',' << (m ? format_double((*m)[axis]) : std::string()) << ','
        << (r.tracked ? format_double(r.refined[axis]) : std::string()) << '\n';
    if (m && r.tracked) {
      chart.x.push_back(static_cast<double>(fs.frames[i].k));
      if (truth) truth_s.values.push_back(truth->at(i, fid).truth[axis]);
      meas_s.values.push_back((*m)[axis]);
      ref_s.values.push_back(r.refined[axis]);
    }
  }

  if (o.format == "svg") {
    chart.series.push_back(std::move(meas_s));
    if (truth) chart.series.push_back(std::move(truth_s));
    chart.series.push_back(std::move(ref_s));
    emit(o, out, render_svg(chart));
  } else if (o.format == "csv" || o.format.empty()) {
    emit(o, out, csv.str());
  } else {
    throw UsageError("report supports --format csv or svg");
  }
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  if (o.frames < 10000) throw UsageError("--frames must be >= 10000");
  ConfigFile c = load_config(o);
  c.sim.duration = static_cast<double>(o.frames) / c.sim.fps;
  c.sim.bias_segments.clear();
  const SessionData s = simulate_session(c.sim);
  const std::vector<Frame> frames = frames_from_session(s);
  FilterParams params = c.filter.params;
  params.dt_s = s.dt;
  TrackerBank bank(s.fiducial_count, make_filter_config(params), c.filter.gate);
  const double rate = throughput_bench(bank, frames);
  char line[160];
  std::snprintf(line, sizeof line, "%zu frames x %zu fiducials: %.0f fiducial-updates/s, %.3f us/update\n",
                frames.size(), s.fiducial_count, rate, 1e6 / rate);
  out << line;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-fiducial Kalman filtering for optical marker tracking", "fidtrack"};
  app.require_subcommand(1);
  Options o;

  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config (defaults are built in)");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic session");
  add_config(sim);
  sim->add_option("--seed", o.seed, "Noise seed");
  sim->add_option("--duration", o.duration, "Duration in seconds");
  sim->add_option("--fps", o.fps, "Frame rate in Hz");
  sim->add_option("--out", o.out_path, "Session CSV to write")->required();

  auto* filt = app.add_subcommand("filter", "Run the tracker bank over a recorded session");
  add_config(filt);
  filt->add_option("input", o.in_path, "Session CSV")->required();
  filt->add_option("--gate", o.gate, "NIS gate threshold");
  filt->add_option("--out", o.out_path, "Filtered CSV to write")->required();

  auto* eval = app.add_subcommand("evaluate", "MSE / error-variance table against ground truth");
  add_config(eval);
  eval->add_option("truth", o.truth_path, "Session CSV with ground truth")->required();
  eval->add_option("filtered", o.filtered_path, "Filtered CSV")->required();
  eval->add_option("--burnout", o.burnout, "Leading samples to ignore");
  eval->add_option("--format", o.format, "table or csv");
  eval->add_option("--out", o.out_path, "Write the report here instead of stdout");

  auto* rep = app.add_subcommand("report", "Plot-ready series for one fiducial and axis");
  rep->add_option("filtered", o.filtered_path, "Filtered CSV")->required();
  rep->add_option("--truth", o.truth_path, "Session CSV with ground truth");
  rep->add_option("--fiducial", o.fiducial, "Fiducial number, 1-based");
  rep->add_option("--axis", o.axis, "x, y or z");
  rep->add_option("--last", o.last, "Only the last N samples");
  rep->add_option("--format", o.format, "csv or svg");
  rep->add_option("--out", o.out_path, "Write here instead of stdout");

  auto* bench = app.add_subcommand("bench", "Single-thread filter throughput");
  add_config(bench);
  bench->add_option("--frames", o.frames, "Frames to process (>= 10000)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageOrIo;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (filt->parsed()) return cmd_filter(o, out);
    if (eval->parsed()) return cmd_evaluate(o, out);
    if (rep->parsed()) return cmd_report(o, out, err);
    if (bench->parsed()) return cmd_bench(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageOrIo;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitUsageOrIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsageOrIo;
}

}  // namespace fidtrack
