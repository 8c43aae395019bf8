#include "fidtrack/session_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "fidtrack/errors.hpp"
#include "fidtrack/format.hpp"

namespace fidtrack {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict JSON access

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("expected a number", path);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("expected a finite number", path);
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError("expected a non-negative integer", path);
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError("expected true or false", path);
  return j.get<bool>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected an array of 3 numbers", path);
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"), get_number(j[2], path + "[2]")};
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

// Visits the keys of one JSON object and rejects any it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
  }

  template <typename Fn>
  void field(const std::string& key, Fn&& apply) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it != j_.end()) apply(*it, join_path(path_, key));
  }

  template <typename Fn>
  void required(const std::string& key, Fn&& apply) {
    if (!j_.contains(key)) throw ConfigError("missing required key", join_path(path_, key));
    field(key, std::forward<Fn>(apply));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key", join_path(path_, key));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json sim_to_json(const SimConfig& sim) {
  json fiducials = json::array();
  for (const auto& p : sim.fiducial_initials) fiducials.push_back(vec3_json(p));
  json biases = json::array();
  for (const auto& b : sim.bias_segments) {
    biases.push_back({{"fiducial_id", b.fiducial_id},
                      {"start_k", b.start_k},
                      {"end_k", b.end_k},
                      {"offset", vec3_json(b.offset)},
                      {"spike", vec3_json(b.spike_magnitude)}});
  }
  return {{"fiducials", fiducials},
          {"v0", vec3_json(sim.v0)},
          {"a0", vec3_json(sim.a0)},
          {"omega", vec3_json(sim.omega)},
          {"fps", sim.fps},
          {"duration_s", sim.duration},
          {"noise_std", vec3_json(sim.noise_std)},
          {"seed", sim.seed},
          {"bias_segments", biases},
          {"orthonormalize", sim.orthonormalize}};
}

SimConfig sim_from_json(const json& j, const std::string& path, SimConfig sim) {
  ObjectReader r(j, path);
  r.field("fiducials", [&](const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError("expected an array of positions", p);
    sim.fiducial_initials.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      sim.fiducial_initials.push_back(get_vec3(v[i], p + "[" + std::to_string(i) + "]"));
    }
    if (sim.fiducial_initials.empty()) throw ConfigError("at least one fiducial is required", p);
  });
  r.field("v0", [&](const json& v, const std::string& p) { sim.v0 = get_vec3(v, p); });
  r.field("a0", [&](const json& v, const std::string& p) { sim.a0 = get_vec3(v, p); });
  r.field("omega", [&](const json& v, const std::string& p) { sim.omega = get_vec3(v, p); });
  r.field("fps", [&](const json& v, const std::string& p) {
    sim.fps = get_number(v, p);
    if (sim.fps <= 0.0) throw ConfigError("must be > 0", p);
  });
  r.field("duration_s", [&](const json& v, const std::string& p) {
    sim.duration = get_number(v, p);
    if (sim.duration <= 0.0) throw ConfigError("must be > 0", p);
  });
  r.field("noise_std", [&](const json& v, const std::string& p) {
    sim.noise_std = get_vec3(v, p);
    if (sim.noise_std.x < 0.0 || sim.noise_std.y < 0.0 || sim.noise_std.z < 0.0) {
      throw ConfigError("must be >= 0", p);
    }
  });
  r.field("seed", [&](const json& v, const std::string& p) { sim.seed = get_unsigned(v, p); });
  r.field("orthonormalize", [&](const json& v, const std::string& p) { sim.orthonormalize = get_bool(v, p); });
  r.field("bias_segments", [&](const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError("expected an array", p);
    sim.bias_segments.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string bp = p + "[" + std::to_string(i) + "]";
      OcclusionBias b;
      ObjectReader br(v[i], bp);
      br.required("fiducial_id", [&](const json& x, const std::string& xp) { b.fiducial_id = get_unsigned(x, xp); });
      br.required("start_k", [&](const json& x, const std::string& xp) { b.start_k = get_unsigned(x, xp); });
      br.required("end_k", [&](const json& x, const std::string& xp) {
        b.end_k = get_unsigned(x, xp);
        if (b.end_k <= b.start_k) throw ConfigError("end_k must be > start_k", xp);
      });
      br.field("offset", [&](const json& x, const std::string& xp) { b.offset = get_vec3(x, xp); });
      br.field("spike", [&](const json& x, const std::string& xp) { b.spike_magnitude = get_vec3(x, xp); });
      br.finish();
      sim.bias_segments.push_back(b);
    }
  });
  r.finish();
  for (std::size_t i = 0; i < sim.bias_segments.size(); ++i) {
    if (sim.bias_segments[i].fiducial_id >= sim.fiducial_initials.size()) {
      throw ConfigError("unknown fiducial", join_path(path, "bias_segments[" + std::to_string(i) + "].fiducial_id"));
    }
  }
  return sim;
}

const char* scaling_name(ProcessNoiseScaling s) {
  return s == ProcessNoiseScaling::kPerSecond ? "per_second" : "per_step";
}

json filter_to_json(const FilterSection& f) {
  const FilterParams& p = f.params;
  return {{"dt_s", p.dt_s},
          {"q_var", p.q_var},
          {"q_scaling", scaling_name(p.q_scaling)},
          {"r_var_xyz", vec3_json(p.r_var)},
          {"p0",
           {{"pos_var", vec3_json(p.p0_pos_var.value_or(p.r_var))},
            {"vel_var", p.p0_vel_var},
            {"acc_var", p.p0_acc_var}}},
          {"gate_threshold", f.gate.threshold},
          {"gate_persistence", f.gate.persistence},
          {"reject_gated", f.gate.reject_gated},
          {"burnout", f.burnout}};
}

FilterSection filter_from_json(const json& j, const std::string& path, FilterSection f) {
  ObjectReader r(j, path);
  FilterParams& p = f.params;
  const auto positive = [](double v, const std::string& key) {
    if (v <= 0.0) throw ConfigError("must be > 0", key);
    return v;
  };
  const auto non_negative = [](double v, const std::string& key) {
    if (v < 0.0) throw ConfigError("must be >= 0", key);
    return v;
  };
  r.field("dt_s", [&](const json& v, const std::string& k) { p.dt_s = positive(get_number(v, k), k); });
  r.field("q_var", [&](const json& v, const std::string& k) { p.q_var = non_negative(get_number(v, k), k); });
  r.field("q_scaling", [&](const json& v, const std::string& k) {
    if (v == "per_second") {
      p.q_scaling = ProcessNoiseScaling::kPerSecond;
    } else if (v == "per_step") {
      p.q_scaling = ProcessNoiseScaling::kPerStep;
    } else {
      throw ConfigError("expected \"per_second\" or \"per_step\"", k);
    }
  });
  r.field("r_var_xyz", [&](const json& v, const std::string& k) {
    p.r_var = get_vec3(v, k);
    for (std::size_t i = 0; i < 3; ++i) positive(p.r_var[i], k + "[" + std::to_string(i) + "]");
  });
  r.field("p0", [&](const json& v, const std::string& k) {
    ObjectReader pr(v, k);
    pr.field("pos_var", [&](const json& x, const std::string& xk) {
      const Vec3 pos = get_vec3(x, xk);
      for (std::size_t i = 0; i < 3; ++i) non_negative(pos[i], xk + "[" + std::to_string(i) + "]");
      p.p0_pos_var = pos;
    });
    pr.field("vel_var", [&](const json& x, const std::string& xk) { p.p0_vel_var = non_negative(get_number(x, xk), xk); });
    pr.field("acc_var", [&](const json& x, const std::string& xk) { p.p0_acc_var = non_negative(get_number(x, xk), xk); });
    pr.finish();
  });
  r.field("gate_threshold", [&](const json& v, const std::string& k) { f.gate.threshold = positive(get_number(v, k), k); });
  r.field("gate_persistence", [&](const json& v, const std::string& k) {
    const std::uint64_t g = get_unsigned(v, k);
    if (g == 0 || g > 1000000) throw ConfigError("must be in [1, 1000000]", k);
    f.gate.persistence = static_cast<std::uint32_t>(g);
  });
  r.field("reject_gated", [&](const json& v, const std::string& k) { f.gate.reject_gated = get_bool(v, k); });
  r.field("burnout", [&](const json& v, const std::string& k) { f.burnout = get_unsigned(v, k); });
  r.finish();
  return f;
}

// ---------------------------------------------------------------------------
// Files

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file", path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  return in;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed", path.string());
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  std::size_t number() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

struct Header {
  json meta;
  std::vector<std::string> columns;
};

Header read_header(LineReader& lines, const std::string& expected_format) {
  std::string line;
  if (!lines.next(line)) throw ParseError("empty file", 1);
  if (line.rfind("# ", 0) != 0) throw ParseError("expected '# {metadata}' header", lines.number());
  Header h;
  try {
    h.meta = json::parse(line.substr(2));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bad metadata JSON: ") + e.what(), lines.number());
  }
  if (!h.meta.is_object() || !h.meta.contains("format") || h.meta["format"] != expected_format) {
    throw SchemaError("not a " + expected_format + " file");
  }
  if (!h.meta.contains("version") || !h.meta["version"].is_number_integer()) {
    throw SchemaError("missing schema version");
  }
  const int version = h.meta["version"].get<int>();
  if (version > kSessionSchemaVersion || version < 1) {
    throw VersionError("unsupported " + expected_format + " schema version " + std::to_string(version));
  }
  if (!lines.next(line)) throw ParseError("missing column header", lines.number() + 1);
  for (auto f : split_csv(line)) h.columns.emplace_back(f);
  return h;
}

template <typename T>
T meta_value(const json& meta, const char* key) {
  if (!meta.contains(key)) throw SchemaError(std::string("metadata lacks '") + key + "'");
  try {
    return meta[key].get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("metadata field '") + key + "' has the wrong type");
  }
}

double field_number(std::string_view text, const char* column, std::size_t line) {
  const auto v = parse_double(text);
  if (!v) throw ParseError(std::string("invalid number '") + std::string(text) + "' in column " + column, line);
  return *v;
}

std::uint64_t field_index(std::string_view text, const char* column, std::size_t line) {
  const auto v = parse_unsigned(text);
  if (!v) throw ParseError(std::string("invalid integer '") + std::string(text) + "' in column " + column, line);
  return *v;
}

bool field_flag(std::string_view text, const char* column, std::size_t line) {
  if (text == "0") return false;
  if (text == "1") return true;
  throw ParseError(std::string("expected 0 or 1 in column ") + column, line);
}

void check_order(std::uint64_t k, std::uint64_t fid, std::size_t row, std::size_t n, std::size_t line) {
  if (fid >= n) throw SchemaError("line " + std::to_string(line) + ": fiducial_id " + std::to_string(fid) + " out of range");
  if (k != row / n || fid != row % n) {
    throw SchemaError("line " + std::to_string(line) + ": rows must be sorted by (k, fiducial_id) with every fiducial present");
  }
}

void check_time(double t, std::uint64_t k, double dt, std::size_t line) {
  const double expected = static_cast<double>(k) * dt;
  if (std::abs(t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
    throw SchemaError("line " + std::to_string(line) + ": t_s inconsistent with k*dt");
  }
}

const std::vector<std::string> kSessionColumnsTruth = {"k",      "t_s",    "fiducial_id", "truth_x", "truth_y",
                                                       "truth_z", "meas_x", "meas_y",      "meas_z",  "occluded"};
const std::vector<std::string> kSessionColumnsNoTruth = {"k",      "t_s",    "fiducial_id", "meas_x",
                                                         "meas_y", "meas_z", "occluded"};
const std::vector<std::string> kFilteredColumns = {"k",         "t_s",       "fiducial_id",     "meas_x",
                                                   "meas_y",    "meas_z",    "refined_x",       "refined_y",
                                                   "refined_z", "nis",       "occluded_suspect", "predicted_only"};

void write_columns(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ConfigFile default_config() {
  ConfigFile c;
  c.sim = default_sim_config();
  return c;
}

ConfigFile parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "<root>");
  }
  ConfigFile c = default_config();
  ObjectReader r(j, "");
  r.field("filter", [&](const json& v, const std::string& p) { c.filter = filter_from_json(v, p, c.filter); });
  r.field("sim", [&](const json& v, const std::string& p) { c.sim = sim_from_json(v, p, c.sim); });
  r.finish();
  return c;
}

std::string config_to_json(const ConfigFile& config) {
  const json j = {{"filter", filter_to_json(config.filter)}, {"sim", sim_to_json(config.sim)}};
  return j.dump(2) + "\n";
}

ConfigFile read_config(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void write_config(const ConfigFile& config, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << config_to_json(config);
  finish_write(out, path);
}

FilterConfig filter_config_from(const FilterSection& section) { return make_filter_config(section.params); }

// ---------------------------------------------------------------------------
// Sessions

void write_session(const SessionData& s, std::ostream& out) {
  json meta = {{"format", "fidtrack-session"},
               {"version", kSessionSchemaVersion},
               {"dt", s.dt},
               {"fiducials", s.fiducial_count},
               {"seed", s.seed},
               {"has_truth", s.has_truth},
               {"config", s.config ? sim_to_json(*s.config) : json(nullptr)}};
  out << "# " << meta.dump() << '\n';
  write_columns(out, s.has_truth ? kSessionColumnsTruth : kSessionColumnsNoTruth);
  const std::size_t steps = s.step_count();
  std::string row;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::string t = format_double(static_cast<double>(k) * s.dt);
    for (std::size_t f = 0; f < s.fiducial_count; ++f) {
      const FiducialSample& smp = s.at(k, f);
      row.clear();
      row += std::to_string(k) + ',' + t + ',' + std::to_string(f) + ',';
      if (s.has_truth) {
        row += format_double(smp.truth.x) + ',' + format_double(smp.truth.y) + ',' + format_double(smp.truth.z) + ',';
      }
      row += format_double(smp.measured.x) + ',' + format_double(smp.measured.y) + ',' +
             format_double(smp.measured.z) + ',' + (smp.occluded ? '1' : '0') + '\n';
      out << row;
    }
  }
}

void write_session(const SessionData& session, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_session(session, out);
  finish_write(out, path);
}

SessionData read_session(std::istream& in) {
  LineReader lines(in);
  const Header h = read_header(lines, "fidtrack-session");
  SessionData s;
  s.dt = meta_value<double>(h.meta, "dt");
  s.fiducial_count = meta_value<std::size_t>(h.meta, "fiducials");
  s.seed = meta_value<std::uint64_t>(h.meta, "seed");
  s.has_truth = meta_value<bool>(h.meta, "has_truth");
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw SchemaError("dt must be > 0");
  if (s.fiducial_count == 0) throw SchemaError("fiducial count must be >= 1");
  if (h.meta.contains("config") && !h.meta["config"].is_null()) {
    try {
      s.config = sim_from_json(h.meta["config"], "config", SimConfig{});
    } catch (const ConfigError& e) {
      throw SchemaError(std::string("embedded config: ") + e.what());
    }
  }

  const auto& expected = s.has_truth ? kSessionColumnsTruth : kSessionColumnsNoTruth;
  if (h.columns != expected) {
    throw SchemaError(h.columns == kSessionColumnsNoTruth || h.columns == kSessionColumnsTruth
                          ? "truth columns disagree with has_truth metadata"
                          : "unexpected column header");
  }

  std::string line;
  std::size_t row = 0;
  while (lines.next(line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::size_t ln = lines.number();
    if (f.size() != expected.size()) {
      throw ParseError("expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(f.size()), ln);
    }
    const std::uint64_t k = field_index(f[0], "k", ln);
    const double t = field_number(f[1], "t_s", ln);
    const std::uint64_t fid = field_index(f[2], "fiducial_id", ln);
    FiducialSample smp;
    std::size_t c = 3;
    if (s.has_truth) {
      smp.truth = {field_number(f[3], "truth_x", ln), field_number(f[4], "truth_y", ln),
                   field_number(f[5], "truth_z", ln)};
      c = 6;
    }
    smp.measured = {field_number(f[c], "meas_x", ln), field_number(f[c + 1], "meas_y", ln),
                    field_number(f[c + 2], "meas_z", ln)};
    smp.occluded = field_flag(f[c + 3], "occluded", ln);
    check_order(k, fid, row, s.fiducial_count, ln);
    check_time(t, k, s.dt, ln);
    s.samples.push_back(smp);
    ++row;
  }
  if (s.samples.size() % s.fiducial_count != 0) throw SchemaError("last step is incomplete");
  return s;
}

SessionData read_session(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return read_session(in);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  }
}

// ---------------------------------------------------------------------------
// Filtered output

FilteredSession make_filtered_session(double dt, std::size_t fiducial_count, const std::vector<Frame>& inputs,
                                      std::vector<FilteredFrame> outputs) {
  if (inputs.size() != outputs.size()) throw SchemaError("input and output frame counts differ");
  FilteredSession fs;
  fs.dt = dt;
  fs.fiducial_count = fiducial_count;
  fs.measured.reserve(inputs.size() * fiducial_count);
  for (const Frame& frame : inputs) {
    if (frame.readings.size() != fiducial_count) throw SchemaError("frame has wrong fiducial count");
    for (const auto& r : frame.readings) fs.measured.push_back(r);
  }
  fs.frames = std::move(outputs);
  return fs;
}

void write_filtered(const FilteredSession& fs, std::ostream& out) {
  const json meta = {{"format", "fidtrack-filtered"},
                     {"version", kSessionSchemaVersion},
                     {"dt", fs.dt},
                     {"fiducials", fs.fiducial_count}};
  out << "# " << meta.dump() << '\n';
  write_columns(out, kFilteredColumns);
  std::string row;
  for (std::size_t i = 0; i < fs.frames.size(); ++i) {
    const FilteredFrame& frame = fs.frames[i];
    const std::string t = format_double(static_cast<double>(frame.k) * fs.dt);
    for (std::size_t f = 0; f < frame.fiducials.size(); ++f) {
      const FiducialOutput& o = frame.fiducials[f];
      const auto& m = fs.measured_at(i, f);
      row = std::to_string(frame.k) + ',' + t + ',' + std::to_string(f) + ',';
      row += m ? format_double(m->x) + ',' + format_double(m->y) + ',' + format_double(m->z) + ',' : std::string(",,,");
      if (o.tracked) {
        row += format_double(o.refined.x) + ',' + format_double(o.refined.y) + ',' + format_double(o.refined.z) +
               ',' + format_double(o.nis) + ',';
      } else {
        row += ",,,,";
      }
      row += std::string(o.occluded_suspect ? "1" : "0") + ',' + (o.predicted_only ? "1" : "0") + '\n';
      out << row;
    }
  }
}

void write_filtered(const FilteredSession& filtered, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_filtered(filtered, out);
  finish_write(out, path);
}

FilteredSession read_filtered(std::istream& in) {
  LineReader lines(in);
  const Header h = read_header(lines, "fidtrack-filtered");
  FilteredSession fs;
  fs.dt = meta_value<double>(h.meta, "dt");
  fs.fiducial_count = meta_value<std::size_t>(h.meta, "fiducials");
  if (!(fs.dt > 0.0) || !std::isfinite(fs.dt)) throw SchemaError("dt must be > 0");
  if (fs.fiducial_count == 0) throw SchemaError("fiducial count must be >= 1");
  if (h.columns != kFilteredColumns) throw SchemaError("unexpected column header");

  std::string line;
  std::size_t row = 0;
  while (lines.next(line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::size_t ln = lines.number();
    if (f.size() != kFilteredColumns.size()) {
      throw ParseError("expected " + std::to_string(kFilteredColumns.size()) + " fields, got " +
                           std::to_string(f.size()),
                       ln);
    }
    const std::uint64_t k = field_index(f[0], "k", ln);
    const double t = field_number(f[1], "t_s", ln);
    const std::uint64_t fid = field_index(f[2], "fiducial_id", ln);
    check_order(k, fid, row, fs.fiducial_count, ln);
    check_time(t, k, fs.dt, ln);

    if (f[3].empty() && f[4].empty() && f[5].empty()) {
      fs.measured.emplace_back(std::nullopt);
    } else {
      fs.measured.emplace_back(
          Vec3{field_number(f[3], "meas_x", ln), field_number(f[4], "meas_y", ln), field_number(f[5], "meas_z", ln)});
    }
    FiducialOutput o;
    if (!(f[6].empty() && f[7].empty() && f[8].empty() && f[9].empty())) {
      o.tracked = true;
      o.refined = {field_number(f[6], "refined_x", ln), field_number(f[7], "refined_y", ln),
                   field_number(f[8], "refined_z", ln)};
      o.nis = field_number(f[9], "nis", ln);
    }
    o.occluded_suspect = field_flag(f[10], "occluded_suspect", ln);
    o.predicted_only = field_flag(f[11], "predicted_only", ln);
    if (fid == 0) {
      fs.frames.push_back(FilteredFrame{k, {}});
      fs.frames.back().fiducials.reserve(fs.fiducial_count);
    }
    fs.frames.back().fiducials.push_back(o);
    ++row;
  }
  if (fs.measured.size() % fs.fiducial_count != 0) throw SchemaError("last step is incomplete");
  return fs;
}

FilteredSession read_filtered(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return read_filtered(in);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  }
}

}  // namespace fidtrack
