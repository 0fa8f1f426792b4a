#include "qsense/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qsense/errors.hpp"
#include "qsense/stabilization.hpp"

namespace qsense::io {

namespace {

using nlohmann::json;

enum class FieldKind { common, dimensionless_only, si_only };

const std::map<std::string, FieldKind>& field_table() {
  static const std::map<std::string, FieldKind> table = {
      {"units", FieldKind::common},
      {"eta", FieldKind::common},
      {"beta_omega01", FieldKind::common},
      {"v_x0", FieldKind::common},
      {"theta_over_pi", FieldKind::common},
      {"protocol", FieldKind::common},
      {"mode", FieldKind::common},
      {"t1_over_t2_grid", FieldKind::common},
      {"v_x0_grid", FieldKind::common},
      {"v_x0_points", FieldKind::common},
      {"miscal_range", FieldKind::common},
      {"miscal_points", FieldKind::common},
      {"shots", FieldKind::common},
      {"iterations", FieldKind::common},
      {"chunks", FieldKind::common},
      {"contrast", FieldKind::common},
      {"seed", FieldKind::common},
      {"t2_drift", FieldKind::common},
      {"exact_sampling", FieldKind::common},
      {"output", FieldKind::common},
      {"summary", FieldKind::common},
      {"t1_over_t2", FieldKind::dimensionless_only},
      {"delta", FieldKind::dimensionless_only},
      {"deltas", FieldKind::dimensionless_only},
      {"h_max", FieldKind::dimensionless_only},
      {"t_end", FieldKind::dimensionless_only},
      {"dt", FieldKind::dimensionless_only},
      {"t1", FieldKind::si_only},
      {"t2", FieldKind::si_only},
      {"delta_rad_per_s", FieldKind::si_only},
      {"deltas_rad_per_s", FieldKind::si_only},
      {"h_max_rad_per_s", FieldKind::si_only},
      {"t_end_s", FieldKind::si_only},
      {"dt_s", FieldKind::si_only},
      {"sample_rate_hz", FieldKind::si_only},
  };
  return table;
}

double number(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

double number_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

std::uint64_t count_or(const json& j, const std::string& key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(key, "expected a non-empty array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError(key, "entries must be finite");
  }
  return out;
}

std::string text_or(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(key, "expected a string");
  return j.at(key).get<std::string>();
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

std::vector<double> linspace01(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

bool is_si(const RunConfig& c) { return c.units == UnitSystem::si; }

// Metadata shared by every CSV output.
std::vector<std::pair<std::string, std::string>> common_meta(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> meta = {
      {"tool", std::string(kToolName) + " " + kToolVersion},
      {"command", c.command},
  };
  if (is_si(c)) {
    meta.emplace_back("units", "si");
    meta.emplace_back("time_unit", "s");
    meta.emplace_back("rate_unit", "rad/s");
    meta.emplace_back("t2_seconds", format_number(c.t2_seconds));
  } else {
    meta.emplace_back("units", "dimensionless");
    meta.emplace_back("time_unit", "T2");
    meta.emplace_back("rate_unit", "1/T2");
  }
  meta.emplace_back("config", c.source.dump());
  return meta;
}

json provenance(const RunConfig& c) {
  return json{{"tool", kToolName},
              {"version", kToolVersion},
              {"command", c.command},
              {"units", is_si(c) ? "si" : "dimensionless"},
              {"config", c.source}};
}

std::string to_csv_string(const CsvDocument& doc) {
  std::ostringstream os;
  write_csv(os, doc);
  return os.str();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double time_scale(const CsvDocument& doc) {
  const std::string* units = doc.meta_value("units");
  if (units && *units == "si") {
    const std::string* t2 = doc.meta_value("t2_seconds");
    if (!t2) throw DomainError("SI document lacks t2_seconds");
    return parse_number(*t2);
  }
  return 1.0;
}

Mode mode_from(const std::string& s, const std::string& field) {
  if (s == "per_shot") return Mode::per_shot;
  if (s == "per_root_time") return Mode::per_root_time;
  throw ConfigError(field, "expected per_shot or per_root_time");
}

TimingBranch branch_from(const std::string& s) {
  for (auto b : {TimingBranch::ramsey_vy, TimingBranch::ramsey_snr, TimingBranch::stable_vy, TimingBranch::stable_snr,
                 TimingBranch::breakdown_vy, TimingBranch::breakdown_snr})
    if (s == to_string(b)) return b;
  throw DomainError("unknown timing branch " + s);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "optimize", "sweep", "miscal", "shots", "waveform"};
  return names;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like field=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path component");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunConfig parse_config(const std::string& command, const json& j) {
  RunConfig c;
  bool known = false;
  for (const auto& n : command_names()) known = known || n == command;
  if (!known) throw ConfigError("command", "unknown command '" + command + "'");
  c.command = command;
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  c.source = j;

  const std::string units = text_or(j, "units", "dimensionless");
  if (units == "si") {
    c.units = UnitSystem::si;
  } else if (units != "dimensionless") {
    throw ConfigError("units", "expected dimensionless or si");
  }
  for (const auto& [key, value] : j.items()) {
    const auto it = field_table().find(key);
    if (it == field_table().end()) throw ConfigError(key, "unknown field");
    if (it->second == FieldKind::si_only && !is_si(c))
      throw ConfigError(key, "SI field not allowed with units=dimensionless");
    if (it->second == FieldKind::dimensionless_only && is_si(c))
      throw ConfigError(key, "dimensionless field not allowed with units=si");
  }

  if (j.contains("eta") && j.contains("beta_omega01")) throw ConfigError("beta_omega01", "give eta or beta_omega01, not both");
  c.eta = number_or(j, "eta", 1.0);
  require(c.eta >= 0.0 && c.eta <= 1.0, "eta", "must lie in [0, 1]");
  if (j.contains("beta_omega01")) {
    const double bw = number(j, "beta_omega01");
    require(bw >= 0.0, "beta_omega01", "must be non-negative");
    c.eta = eta_from_temperature(bw, 1.0);
  }

  if (is_si(c)) {
    require(j.contains("t1"), "t1", "required with units=si");
    require(j.contains("t2"), "t2", "required with units=si");
    const double t1 = number(j, "t1");
    const double t2 = number(j, "t2");
    require(t1 > 0.0, "t1", "must be positive");
    require(t2 > 0.0, "t2", "must be positive");
    c.t2_seconds = t2;
    c.t1_over_t2 = t1 / t2;
    c.delta = number_or(j, "delta_rad_per_s", 0.0) * t2;
    c.h_max = number_or(j, "h_max_rad_per_s", kDefaultCapOverGamma2 / t2) * t2;
    c.t_end = number_or(j, "t_end_s", 5.0 * t2) / t2;
    if (j.contains("dt_s") && j.contains("sample_rate_hz")) throw ConfigError("sample_rate_hz", "give dt_s or sample_rate_hz, not both");
    if (j.contains("sample_rate_hz")) {
      const double rate = number(j, "sample_rate_hz");
      require(rate > 0.0, "sample_rate_hz", "must be positive");
      c.dt = 1.0 / (rate * t2);
    } else {
      c.dt = number_or(j, "dt_s", 0.01 * t2) / t2;
    }
    if (j.contains("deltas_rad_per_s")) {
      c.deltas = numbers(j, "deltas_rad_per_s");
      for (double& d : c.deltas) d *= t2;
    }
  } else {
    c.t1_over_t2 = number_or(j, "t1_over_t2", 1.0);
    c.delta = number_or(j, "delta", 0.0);
    c.h_max = number_or(j, "h_max", kDefaultCapOverGamma2);
    c.t_end = number_or(j, "t_end", 5.0);
    c.dt = number_or(j, "dt", 0.01);
    if (j.contains("deltas")) c.deltas = numbers(j, "deltas");
  }
  const char* ratio_field = is_si(c) ? "t1" : "t1_over_t2";
  require(c.t1_over_t2 >= 0.5, ratio_field, "T1/T2 below 1/2 needs negative pure dephasing");
  require(c.h_max > 0.0, is_si(c) ? "h_max_rad_per_s" : "h_max", "must be positive");
  require(c.t_end > 0.0, is_si(c) ? "t_end_s" : "t_end", "must be positive");
  require(c.dt > 0.0, is_si(c) ? "dt_s" : "dt", "must be positive");
  require(c.t_end / c.dt <= 1e7, is_si(c) ? "dt_s" : "dt", "more than 1e7 samples requested");
  for (double d : c.deltas)
    require(std::abs(d) <= 0.05, is_si(c) ? "deltas_rad_per_s" : "deltas", "|delta| T2 must not exceed 0.05");

  if (j.contains("v_x0") && j.contains("theta_over_pi")) throw ConfigError("theta_over_pi", "give v_x0 or theta_over_pi, not both");
  if (j.contains("theta_over_pi")) {
    const double t = number(j, "theta_over_pi");
    require(t >= 0.0 && t <= 0.5, "theta_over_pi", "must lie in [0, 0.5]");
    c.v_x0 = std::sin(t * std::numbers::pi);
  } else {
    c.v_x0 = number_or(j, "v_x0", c.v_x0);
    require(c.v_x0 >= 0.0 && c.v_x0 <= 1.0, "v_x0", "must lie in [0, 1]");
  }

  c.protocol = text_or(j, "protocol", "stabilized");
  require(c.protocol == "stabilized" || c.protocol == "ramsey", "protocol", "expected stabilized or ramsey");
  c.mode = mode_from(text_or(j, "mode", "per_shot"), "mode");

  if (j.contains("t1_over_t2_grid")) {
    c.t1_over_t2_grid = numbers(j, "t1_over_t2_grid");
    for (double r : c.t1_over_t2_grid) require(r >= 0.5, "t1_over_t2_grid", "entries must be >= 0.5");
  }
  if (j.contains("v_x0_grid") && j.contains("v_x0_points")) throw ConfigError("v_x0_points", "give v_x0_grid or v_x0_points, not both");
  if (j.contains("v_x0_grid")) {
    c.v_x0_grid = numbers(j, "v_x0_grid");
    for (double v : c.v_x0_grid) require(v >= 0.0 && v <= 1.0, "v_x0_grid", "entries must lie in [0, 1]");
  } else {
    const auto n = count_or(j, "v_x0_points", 21);
    require(n >= 1, "v_x0_points", "must be at least 1");
    c.v_x0_grid = linspace01(n);
  }
  c.miscal_range = number_or(j, "miscal_range", c.miscal_range);
  require(c.miscal_range >= 0.0 && c.miscal_range < 1.0, "miscal_range", "must lie in [0, 1)");
  c.miscal_points = count_or(j, "miscal_points", c.miscal_points);
  require(c.miscal_points >= 1, "miscal_points", "must be at least 1");

  c.shots = count_or(j, "shots", c.shots);
  require(c.shots >= 1, "shots", "must be at least 1");
  c.iterations = count_or(j, "iterations", c.iterations);
  c.chunks = count_or(j, "chunks", c.chunks);
  require(c.chunks >= 1, "chunks", "must be at least 1");
  require(c.iterations >= 2 * c.chunks, "iterations", "must be at least twice the number of chunks");
  c.contrast = number_or(j, "contrast", c.contrast);
  require(c.contrast > 0.0 && c.contrast <= 1.0, "contrast", "must lie in (0, 1]");
  c.seed = count_or(j, "seed", c.seed);
  c.t2_drift = number_or(j, "t2_drift", c.t2_drift);
  require(c.t2_drift >= 0.0 && c.t2_drift < 1.0, "t2_drift", "must lie in [0, 1)");
  if (j.contains("exact_sampling")) {
    require(j.at("exact_sampling").is_boolean(), "exact_sampling", "expected true or false");
    c.exact_sampling = j.at("exact_sampling").get<bool>();
  }
  c.output = text_or(j, "output", "");
  c.summary = text_or(j, "summary", "");
  return c;
}

// ---------------------------------------------------------------------------
// CSV

const std::string* CsvDocument::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

std::size_t CsvDocument::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw DomainError("CSV has no column '" + name + "'");
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw DomainError("not a number: '" + s + "'");
  return v;
}

void write_csv(std::ostream& os, const CsvDocument& doc) {
  for (const auto& [k, v] : doc.meta) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < doc.columns.size(); ++i) os << (i ? "," : "") << doc.columns[i];
  os << '\n';
  for (const auto& row : doc.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

CsvDocument read_csv(std::istream& is) {
  CsvDocument doc;
  std::string line;
  bool header = false;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      doc.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!header) {
      doc.columns = split(line);
      header = true;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != doc.columns.size()) throw DomainError("CSV row width does not match header");
    doc.rows.push_back(std::move(cells));
  }
  if (!header) throw DomainError("CSV has no column header");
  return doc;
}

// ---------------------------------------------------------------------------
// Readers

Trajectory read_trajectory(const CsvDocument& doc) {
  const double t2 = time_scale(doc);
  const std::size_t ct = doc.column("t"), cx = doc.column("v_x"), cy = doc.column("v_y"), cz = doc.column("v_z"),
                    ch = doc.column("h_y");
  Trajectory out;
  for (const auto& row : doc.rows)
    out.push_back({parse_number(row[ct]) / t2,
                   {parse_number(row[cx]), parse_number(row[cy]), parse_number(row[cz])},
                   parse_number(row[ch]) * t2});
  return out;
}

Matrix read_matrix(const CsvDocument& doc, const std::string& row_column, const std::string& col_column) {
  const std::size_t cr = doc.column(row_column), cc = doc.column(col_column), cv = doc.column("ratio");
  Matrix m;
  std::map<double, std::size_t> rows, cols;
  for (const auto& row : doc.rows) {
    rows.emplace(parse_number(row[cr]), 0);
    cols.emplace(parse_number(row[cc]), 0);
  }
  for (auto& [label, idx] : rows) {
    idx = m.row_labels.size();
    m.row_labels.push_back(label);
  }
  for (auto& [label, idx] : cols) {
    idx = m.col_labels.size();
    m.col_labels.push_back(label);
  }
  m.values.assign(m.rows() * m.cols(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : doc.rows)
    m.at(rows[parse_number(row[cr])], cols[parse_number(row[cc])]) = parse_number(row[cv]);
  return m;
}

std::vector<ShotRecord> read_records(const CsvDocument& doc) {
  const double t2 = time_scale(doc);
  const std::size_t ci = doc.column("iteration"), cp = doc.column("protocol"), cd = doc.column("delta"),
                    cs = doc.column("t2_scale"), ct = doc.column("t_meas"), cn = doc.column("shots"),
                    ck = doc.column("k_plus"), cseed = doc.column("seed");
  std::vector<ShotRecord> out;
  for (const auto& row : doc.rows) {
    ShotRecord r;
    r.iteration = std::stoull(row[ci]);
    if (row[cp] == "ramsey") {
      r.protocol = ShotProtocol::ramsey;
    } else if (row[cp] == "stabilized") {
      r.protocol = ShotProtocol::stabilized;
    } else {
      throw DomainError("unknown protocol tag " + row[cp]);
    }
    r.delta = parse_number(row[cd]) * t2;
    r.t2_scale = parse_number(row[cs]);
    r.t_meas = parse_number(row[ct]) / t2;
    r.shots = std::stoull(row[cn]);
    r.k_plus = std::stoull(row[ck]);
    r.seed = std::stoull(row[cseed]);
    out.push_back(r);
  }
  return out;
}

json report_to_json(const ImprovementReport& r) {
  return json{{"mode", to_string(r.mode)},
              {"ratio", r.ratio},
              {"best_v_x0", r.best_v_x0},
              {"best_theta", r.best_theta},
              {"best_theta_over_pi", r.best_theta / std::numbers::pi},
              {"t_meas", r.t_meas},
              {"t1_over_t2", finite_or_null(r.t1_over_t2)},
              {"eta", r.eta},
              {"branch", to_string(r.branch)},
              {"t_b", finite_or_null(r.t_b)},
              {"ode_ratio", finite_or_null(r.ode_ratio)},
              {"ode_delta", r.ode_delta}};
}

ImprovementReport report_from_json(const json& j) {
  auto num = [&](const char* key, double if_null) {
    const json& v = j.at(key);
    return v.is_null() ? if_null : v.get<double>();
  };
  ImprovementReport r;
  r.mode = mode_from(j.at("mode").get<std::string>(), "mode");
  r.ratio = num("ratio", 0.0);
  r.best_v_x0 = num("best_v_x0", 0.0);
  r.best_theta = num("best_theta", 0.0);
  r.t_meas = num("t_meas", 0.0);
  r.t1_over_t2 = num("t1_over_t2", std::numeric_limits<double>::infinity());
  r.eta = num("eta", 1.0);
  r.branch = branch_from(j.at("branch").get<std::string>());
  r.t_b = num("t_b", std::numeric_limits<double>::infinity());
  r.ode_ratio = num("ode_ratio", std::numeric_limits<double>::quiet_NaN());
  r.ode_delta = num("ode_delta", 0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Commands

CommandOutput cmd_simulate(const RunConfig& c) {
  const auto p = c.params();
  const std::size_t n = static_cast<std::size_t>(std::floor(c.t_end / c.dt + 1e-9)) + 1;
  ExperimentConfig cfg;
  cfg.delta = c.delta;
  for (std::size_t i = 0; i < n; ++i) cfg.time_grid.push_back(static_cast<double>(i) * c.dt);

  ControlSchedule schedule = ControlSchedule::zero();
  auto meta = common_meta(c);
  if (c.protocol == "ramsey") {
    cfg.initial = {1.0, 0.0, 0.0};
  } else {
    const auto init = InitialState::from_vx(c.v_x0);
    cfg.initial = init.bloch();
    schedule = build_schedule(init, p, c.h_max);
    const auto bd = breakdown_time(init, p);
    const double scale = is_si(c) ? c.t2_seconds : 1.0;
    meta.emplace_back("breakdown_time", format_number(bd.t_b * scale));
    meta.emplace_back("cutoff_time", schedule.cutoff_time() ? format_number(*schedule.cutoff_time() * scale) : "none");
  }
  const Trajectory traj = integrate_trajectory(cfg, p, schedule);

  CsvDocument doc;
  doc.meta = std::move(meta);
  doc.columns = {"t", "v_x", "v_y", "v_z", "h_y"};
  const double ts = is_si(c) ? c.t2_seconds : 1.0;
  for (const auto& pt : traj)
    doc.rows.push_back({format_number(pt.t * ts), format_number(pt.v.x), format_number(pt.v.y),
                        format_number(pt.v.z), format_number(pt.h_y / ts)});
  return {to_csv_string(doc), "csv", ""};
}

CommandOutput cmd_optimize(const RunConfig& c) {
  const auto report = optimize_initial_state(c.params(), c.mode);
  json j = report_to_json(report);
  if (is_si(c)) {
    j["t_meas_s"] = report.t_meas * c.t2_seconds;
    j["t_b_s"] = finite_or_null(report.t_b * c.t2_seconds);
  }
  j["provenance"] = provenance(c);
  return {j.dump(2) + "\n", "json", ""};
}

CommandOutput cmd_sweep(const RunConfig& c) {
  const Matrix m = sweep_improvement(c.t1_over_t2_grid, c.v_x0_grid, c.mode, c.eta);
  CsvDocument doc;
  doc.meta = common_meta(c);
  doc.meta.emplace_back("mode", to_string(c.mode));
  doc.meta.emplace_back("delta", format_number(0.01));
  doc.columns = {"t1_over_t2", "v_x0", "ratio"};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k)
      doc.rows.push_back({format_number(m.row_labels[i]), format_number(m.col_labels[k]), format_number(m.at(i, k))});
  return {to_csv_string(doc), "csv", ""};
}

CommandOutput cmd_miscal(const RunConfig& c) {
  const auto axis = miscalibration_axis(c.miscal_range, c.miscal_points);
  const auto res = miscalibration_grid(c.params(), axis, axis, c.mode);
  CsvDocument doc;
  doc.meta = common_meta(c);
  doc.meta.emplace_back("mode", to_string(c.mode));
  doc.meta.emplace_back("miscalibration", "T_nominal/T_actual - 1");
  doc.meta.emplace_back("nominal_ratio", format_number(res.nominal.ratio));
  doc.meta.emplace_back("nominal_v_x0", format_number(res.nominal.best_v_x0));
  doc.columns = {"miscal_1_over_T1", "miscal_1_over_T2", "ratio"};
  const Matrix& m = res.ratios;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k)
      doc.rows.push_back({format_number(m.row_labels[i]), format_number(m.col_labels[k]), format_number(m.at(i, k))});
  return {to_csv_string(doc), "csv", ""};
}

CommandOutput cmd_shots(const RunConfig& c) {
  const auto p = c.params();
  const auto init = InitialState::from_vx(c.v_x0);
  SweepOptions opts;
  opts.plan.shots = c.shots;
  opts.plan.contrast = c.contrast;
  opts.iterations = c.iterations;
  opts.mode = c.mode;
  opts.cap_over_gamma2 = c.h_max;
  opts.t2_drift = c.t2_drift;
  opts.exact_sampling = c.exact_sampling;
  const auto records = run_detuning_sweep(init, p, c.deltas, opts, c.seed);
  const auto estimate = chunked_ratio_estimate(records, c.chunks, c.mode);

  const double ts = is_si(c) ? c.t2_seconds : 1.0;
  CsvDocument doc;
  doc.meta = common_meta(c);
  doc.meta.emplace_back("rng", kRngDescription);
  doc.columns = {"iteration", "protocol", "delta", "t2_scale", "t_meas", "shots", "k_plus", "seed"};
  for (const auto& r : records)
    doc.rows.push_back({std::to_string(r.iteration), to_string(r.protocol), format_number(r.delta / ts),
                        format_number(r.t2_scale), format_number(r.t_meas * ts), std::to_string(r.shots),
                        std::to_string(r.k_plus), std::to_string(r.seed)});

  json uncertainty = json::object();
  json slopes = json::object();
  for (auto proto : {ShotProtocol::stabilized, ShotProtocol::ramsey}) {
    std::vector<double> x, y;
    double t_sum = 0.0;
    for (const auto& r : records) {
      if (r.protocol != proto) continue;
      x.push_back(r.delta * r.t2_scale);
      y.push_back(r.estimate());
      t_sum += r.t_meas / r.t2_scale;
    }
    // Estimates carry the readout contrast; the uncertainty formula wants the bare slope.
    SlopeFit fit = fit_slope(x, y);
    fit.slope /= c.contrast;
    fit.slope_std_error /= c.contrast;
    const double t_mean = t_sum / static_cast<double>(x.size());
    slopes[to_string(proto)] = {{"slope", fit.slope}, {"std_error", fit.slope_std_error}};
    ShotPlan plan;
    plan.shots = c.shots;
    plan.contrast = c.contrast;
    json u;
    if (fit.slope > 0.0) {
      if (c.mode == Mode::per_shot) {
        const double v = frequency_uncertainty(fit, plan, UncertaintyMode::per_root_shots, t_mean);
        u = is_si(c) ? json{{"value", v / c.t2_seconds / (2.0 * std::numbers::pi)}, {"unit", "Hz*sqrt(shots)"}}
                     : json{{"value", v}, {"unit", "1/T2*sqrt(shots)"}};
      } else {
        const double v = frequency_uncertainty(fit, plan, UncertaintyMode::per_root_time, t_mean);
        u = is_si(c) ? json{{"value", v / std::sqrt(c.t2_seconds) / (2.0 * std::numbers::pi)}, {"unit", "Hz/sqrt(Hz)"}}
                     : json{{"value", v}, {"unit", "T2^-1/2"}};
      }
    }
    uncertainty[to_string(proto)] = u;
  }

  json summary{{"mode", to_string(c.mode)},
               {"v_x0", c.v_x0},
               {"t1_over_t2", c.t1_over_t2},
               {"ratio_mean", estimate.mean},
               {"ratio_std_error", estimate.std_error},
               {"chunk_ratios", estimate.chunk_ratios},
               {"analytic_ratio", improvement_ratio(c.v_x0, p, c.mode)},
               {"slopes", slopes},
               {"frequency_uncertainty", uncertainty},
               {"rng", kRngDescription},
               {"seed", c.seed},
               {"provenance", provenance(c)}};
  return {to_csv_string(doc), "csv", summary.dump(2) + "\n"};
}

CommandOutput cmd_waveform(const RunConfig& c) {
  const auto p = c.params();
  const auto init = InitialState::from_vx(c.v_x0);
  const auto schedule = build_schedule(init, p, c.h_max);
  const std::size_t n = static_cast<std::size_t>(std::floor(c.t_end / c.dt + 1e-9)) + 1;
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = static_cast<double>(i) * c.dt;
  const auto h = schedule.sample(times);

  const double ts = is_si(c) ? c.t2_seconds : 1.0;
  CsvDocument doc;
  doc.meta = common_meta(c);
  doc.meta.emplace_back("h_max", format_number(c.h_max / ts));
  doc.meta.emplace_back("cutoff_time", schedule.cutoff_time() ? format_number(*schedule.cutoff_time() * ts) : "none");
  doc.columns = {"t", "h_y"};
  for (std::size_t i = 0; i < n; ++i) doc.rows.push_back({format_number(times[i] * ts), format_number(h[i] / ts)});
  return {to_csv_string(doc), "csv", ""};
}

CommandOutput run_command(const RunConfig& c) {
  if (c.command == "simulate") return cmd_simulate(c);
  if (c.command == "optimize") return cmd_optimize(c);
  if (c.command == "sweep") return cmd_sweep(c);
  if (c.command == "miscal") return cmd_miscal(c);
  if (c.command == "shots") return cmd_shots(c);
  if (c.command == "waveform") return cmd_waveform(c);
  throw ConfigError("command", "unknown command '" + c.command + "'");
}

}  // namespace qsense::io
