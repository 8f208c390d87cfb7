// SPDX-License-Identifier: Apache-2.0

#include "atomsplit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "atomsplit/oracle.hpp"

#ifndef ATOMSPLIT_BUILD_ID
#define ATOMSPLIT_BUILD_ID "unknown"
#endif

namespace atomsplit {

std::string build_id() { return ATOMSPLIT_BUILD_ID; }

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::positive_p: return "positive_p";
    case RunMode::oracle: return "oracle";
    case RunMode::compare: return "compare";
  }
  return "positive_p";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "positive_p") return RunMode::positive_p;
  if (name == "oracle") return RunMode::oracle;
  if (name == "compare") return RunMode::compare;
  throw ConfigError("unknown mode '" + name + "'");
}

void RunConfig::validate() const {
  try {
    model.validate();
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (trajectories == 0 && mode != RunMode::oracle) throw ConfigError("trajectories must be positive");
  if (batches < 8) throw ConfigError("batches must be at least 8");
  if (mode != RunMode::oracle && trajectories < batches) {
    throw ConfigError("trajectories must be at least the number of batches");
  }
  if (output_path.empty()) throw ConfigError("output_path must not be empty");
  if (mode != RunMode::positive_p && model.n_atoms > 200) {
    throw ConfigError("the exact oracle supports at most 200 atoms");
  }
}

// --------------------------------------------------------------------------
// Configuration text

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

std::optional<double> parse_cutoff(const std::string& key, const std::string& value) {
  if (value == "none") return std::nullopt;
  return parse_double(key, value);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string format_cutoff(const std::optional<double>& c) { return c ? format_double(*c) : "none"; }

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  double j = cfg.model.tunnelling.base_value();
  std::optional<double> j_cut;
  double chi = cfg.model.nonlinearity.base_value();
  std::optional<double> chi_cut;
  std::set<std::string> seen;

  std::istringstream lines{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");

    if (key == "n_wells") {
      if (parse_unsigned(key, value) != kWells) throw ConfigError("n_wells must be 3");
    } else if (key == "j") {
      j = parse_double(key, value);
    } else if (key == "j_cutoff") {
      j_cut = parse_cutoff(key, value);
    } else if (key == "chi") {
      chi = parse_double(key, value);
    } else if (key == "chi_cutoff") {
      chi_cut = parse_cutoff(key, value);
    } else if (key == "n_atoms") {
      cfg.model.n_atoms = static_cast<std::int64_t>(parse_unsigned(key, value));
    } else if (key == "initial_state_kind") {
      try {
        cfg.model.initial_state = initial_state_kind_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "initial_well") {
      cfg.model.initial_well = static_cast<int>(parse_unsigned(key, value));
    } else if (key == "dt") {
      cfg.integrator.dt = parse_double(key, value);
    } else if (key == "scheme") {
      try {
        cfg.integrator.scheme = scheme_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "sample_interval") {
      cfg.integrator.sample_interval = parse_double(key, value);
    } else if (key == "t_final") {
      cfg.integrator.t_final = parse_double(key, value);
    } else if (key == "divergence_cap") {
      cfg.integrator.divergence_cap = parse_double(key, value);
    } else if (key == "trajectories") {
      cfg.trajectories = parse_unsigned(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_unsigned(key, value);
    } else if (key == "batches") {
      cfg.batches = static_cast<std::size_t>(parse_unsigned(key, value));
    } else if (key == "output_path") {
      cfg.output_path = value;
    } else if (key == "mode") {
      cfg.mode = run_mode_from_string(value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  cfg.model.tunnelling = Schedule(j, j_cut);
  cfg.model.nonlinearity = Schedule(chi, chi_cut);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "n_wells = " << kWells << '\n'
      << "j = " << format_double(cfg.model.tunnelling.base_value()) << '\n'
      << "j_cutoff = " << format_cutoff(cfg.model.tunnelling.cutoff_time()) << '\n'
      << "chi = " << format_double(cfg.model.nonlinearity.base_value()) << '\n'
      << "chi_cutoff = " << format_cutoff(cfg.model.nonlinearity.cutoff_time()) << '\n'
      << "n_atoms = " << cfg.model.n_atoms << '\n'
      << "initial_state_kind = " << to_string(cfg.model.initial_state) << '\n'
      << "initial_well = " << cfg.model.initial_well << '\n'
      << "dt = " << format_double(cfg.integrator.dt) << '\n'
      << "scheme = " << to_string(cfg.integrator.scheme) << '\n'
      << "sample_interval = " << format_double(cfg.integrator.sample_interval) << '\n'
      << "t_final = " << format_double(cfg.integrator.t_final) << '\n'
      << "divergence_cap = " << format_double(cfg.integrator.divergence_cap) << '\n'
      << "trajectories = " << cfg.trajectories << '\n'
      << "seed = " << cfg.seed << '\n'
      << "batches = " << cfg.batches << '\n'
      << "output_path = " << cfg.output_path << '\n'
      << "mode = " << to_string(cfg.mode) << '\n';
  return out.str();
}

namespace {

nlohmann::json cutoff_json(const std::optional<double>& c) {
  return c ? nlohmann::json(*c) : nlohmann::json(nullptr);
}

std::optional<double> cutoff_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json config_json(const RunConfig& cfg) {
  return {
      {"n_wells", kWells},
      {"j", cfg.model.tunnelling.base_value()},
      {"j_cutoff", cutoff_json(cfg.model.tunnelling.cutoff_time())},
      {"chi", cfg.model.nonlinearity.base_value()},
      {"chi_cutoff", cutoff_json(cfg.model.nonlinearity.cutoff_time())},
      {"n_atoms", cfg.model.n_atoms},
      {"initial_state_kind", to_string(cfg.model.initial_state)},
      {"initial_well", cfg.model.initial_well},
      {"dt", cfg.integrator.dt},
      {"scheme", to_string(cfg.integrator.scheme)},
      {"sample_interval", cfg.integrator.sample_interval},
      {"t_final", cfg.integrator.t_final},
      {"divergence_cap", cfg.integrator.divergence_cap},
      {"trajectories", cfg.trajectories},
      {"seed", cfg.seed},
      {"batches", cfg.batches},
      {"output_path", cfg.output_path},
      {"mode", to_string(cfg.mode)},
  };
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

RunConfig config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (j.contains("config")) j = j.at("config");
  static const std::set<std::string> known = {
      "n_wells", "j",      "j_cutoff",        "chi",     "chi_cutoff",     "n_atoms",
      "initial_state_kind", "initial_well", "dt",      "scheme",         "sample_interval",
      "t_final", "divergence_cap", "trajectories", "seed", "batches", "output_path", "mode"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  try {
    RunConfig cfg;
    if (j.contains("n_wells") && j.at("n_wells").get<int>() != kWells) throw ConfigError("n_wells must be 3");
    cfg.model.tunnelling = Schedule(j.value("j", cfg.model.tunnelling.base_value()),
                                    j.contains("j_cutoff") ? cutoff_from_json(j.at("j_cutoff")) : std::nullopt);
    cfg.model.nonlinearity =
        Schedule(j.value("chi", cfg.model.nonlinearity.base_value()),
                 j.contains("chi_cutoff") ? cutoff_from_json(j.at("chi_cutoff")) : std::nullopt);
    cfg.model.n_atoms = j.value("n_atoms", cfg.model.n_atoms);
    if (j.contains("initial_state_kind")) {
      cfg.model.initial_state = initial_state_kind_from_string(j.at("initial_state_kind").get<std::string>());
    }
    cfg.model.initial_well = j.value("initial_well", cfg.model.initial_well);
    cfg.integrator.dt = j.value("dt", cfg.integrator.dt);
    if (j.contains("scheme")) cfg.integrator.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    cfg.integrator.sample_interval = j.value("sample_interval", cfg.integrator.sample_interval);
    cfg.integrator.t_final = j.value("t_final", cfg.integrator.t_final);
    cfg.integrator.divergence_cap = j.value("divergence_cap", cfg.integrator.divergence_cap);
    cfg.trajectories = j.value("trajectories", cfg.trajectories);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.batches = j.value("batches", cfg.batches);
    cfg.output_path = j.value("output_path", cfg.output_path);
    if (j.contains("mode")) cfg.mode = run_mode_from_string(j.at("mode").get<std::string>());
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// --------------------------------------------------------------------------
// Presets

namespace {

struct PresetRow {
  const char* name;
  double chi;
  bool cut_j;
  bool cut_chi;
  std::uint64_t trajectories;
};

// J = 1, Fock N2(0) = 200, t in [0, 10] for every preset.
constexpr PresetRow kPresets[] = {
    {"fig1", 1e-3, false, false, 1'080'000},
    {"fig2", 1e-3, false, false, 397'000},
    {"fig3a", 1e-3, false, false, 1'080'000},
    {"fig3b", 1e-4, false, false, 364'000},
    {"fig3c", 1e-5, false, false, 1'360'000},
    {"fig4a", 1e-3, true, true, 735'000},
    {"fig4b", 1e-3, true, false, 910'000},
};

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& row : kPresets) v.emplace_back(row.name);
    return v;
  }();
  return names;
}

RunConfig preset(std::string_view name, double scale) {
  if (!(scale >= 1.0) || !std::isfinite(scale)) throw ConfigError("--scale must be >= 1");
  for (const auto& row : kPresets) {
    if (name != row.name) continue;
    RunConfig cfg;
    cfg.model.tunnelling = Schedule(1.0, row.cut_j ? std::optional(kTransferTime) : std::nullopt);
    cfg.model.nonlinearity = Schedule(row.chi, row.cut_chi ? std::optional(kTransferTime) : std::nullopt);
    cfg.model.n_atoms = 200;
    cfg.model.initial_state = InitialStateKind::fock;
    cfg.model.initial_well = 2;
    cfg.integrator = IntegratorConfig{};
    cfg.trajectories = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(static_cast<double>(row.trajectories) / scale)));
    cfg.output_path = std::string(name) + ".csv";
    return cfg;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

// --------------------------------------------------------------------------
// Ensemble orchestration

MomentAccumulator simulate_ensemble(const RunConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::vector<double> times = sample_times(cfg.integrator);
  const std::uint64_t chunk = 4 * static_cast<std::uint64_t>(cfg.batches);
  const std::uint64_t n_chunks = (cfg.trajectories + chunk - 1) / chunk;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(1, n_chunks))));

  MomentAccumulator total(times, cfg.batches);
  std::atomic<std::uint64_t> next_chunk{0};
  std::mutex mutex;
  std::condition_variable merged_cv;
  std::map<std::uint64_t, MomentAccumulator> pending;
  std::uint64_t next_merge = 0;
  std::exception_ptr failure;

  // Chunks merge strictly in index order; a finished chunk waits in
  // `pending` until all earlier chunks are merged.
  auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t c = next_chunk.fetch_add(1);
        if (c >= n_chunks) return;
        MomentAccumulator local(times, cfg.batches);
        const std::uint64_t begin = c * chunk;
        const std::uint64_t end = std::min(cfg.trajectories, begin + chunk);
        for (std::uint64_t i = begin; i < end; ++i) {
          local.accumulate(integrate_trajectory({cfg.seed, i}, cfg.model, cfg.integrator), i);
        }
        std::unique_lock lock(mutex);
        // Bound memory: do not run far ahead of the merge front.
        merged_cv.wait(lock, [&] { return c < next_merge + 4 * workers || failure; });
        if (failure) return;
        pending.emplace(c, std::move(local));
        while (!pending.empty() && pending.begin()->first == next_merge) {
          total.merge(pending.begin()->second);
          pending.erase(pending.begin());
          ++next_merge;
        }
        merged_cv.notify_all();
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!failure) failure = std::current_exception();
      merged_cv.notify_all();
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return total;
}

TimeSeriesResult run_oracle(const RunConfig& cfg) {
  cfg.validate();
  return oracle_time_series(cfg.model, cfg.integrator.sample_interval,
                            static_cast<double>(cfg.integrator.sample_count()) * cfg.integrator.sample_interval);
}

// --------------------------------------------------------------------------
// CSV

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "t",    "n1",   "n1_se",   "n2",   "n2_se",   "n3",   "n3_se",   "vn1",  "vn2",         "vn3",
      "vn13", "vn13_se", "xi13", "xi13_se", "xis1", "xis1_se", "xis3", "xis3_se", "imag_residual"};
  return cols;
}

void write_csv(std::ostream& out, const TimeSeriesResult& result) {
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const TimePoint& p : result.points) {
    const double row[] = {p.t,
                          p.population[0].value, p.population[0].se,
                          p.population[1].value, p.population[1].se,
                          p.population[2].value, p.population[2].se,
                          p.variance[0].value,   p.variance[1].value,   p.variance[2].value,
                          p.variance_diff13.value, p.variance_diff13.se,
                          p.xi13.value,          p.xi13.se,
                          p.xi_steer1.value,     p.xi_steer1.se,
                          p.xi_steer3.value,     p.xi_steer3.se,
                          p.imag_residual};
    for (std::size_t c = 0; c < std::size(row); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::invalid_argument("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(trim(cell));
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const std::string v = trim(cell);
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (v.empty() || end != v.c_str() + v.size()) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" + v + "'");
      }
      row.push_back(x);
    }
    if (row.size() != table.columns.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": wrong number of fields");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

// --------------------------------------------------------------------------
// Comparison

namespace {

struct Series {
  std::string name;
  std::vector<double> a, a_se, b, b_se;
  bool has_se = true;
};

void score(ComparisonReport& report, const std::vector<double>& times, const Series& s) {
  ObservableCheck check;
  check.observable = s.name;
  check.has_se = s.has_se;
  if (s.has_se) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double diff = s.a[i] - s.b[i];
      const double se = std::hypot(s.a_se[i], s.b_se[i]);
      double z = 0.0;
      if (se > 0.0) {
        z = std::abs(diff) / se;
      } else if (diff != 0.0) {
        z = std::numeric_limits<double>::infinity();
      }
      if (!(z <= report.z_threshold)) ++check.flagged_points;
      if (z > check.max_abs_z || std::isnan(z)) {
        check.max_abs_z = z;
        check.worst_time = times[i];
      }
    }
  }
  if (check.flagged_points > 0) report.pass = false;
  report.checks.push_back(check);
}

}  // namespace

std::string ComparisonReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["z_threshold"] = z_threshold;
  j["observables"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json o = {{"observable", c.observable},
                        {"scored", c.has_se},
                        {"flagged_points", c.flagged_points},
                        {"worst_time", c.worst_time},
                        {"pass", c.flagged_points == 0}};
    o["max_abs_z"] = std::isfinite(c.max_abs_z) ? nlohmann::json(c.max_abs_z) : nlohmann::json("inf");
    j["observables"].push_back(o);
  }
  return j.dump(2);
}

ComparisonReport compare(const CsvTable& a, const CsvTable& b, double z_threshold) {
  for (const auto& name : csv_columns()) {
    a.column(name);
    b.column(name);
  }
  if (a.rows.size() != b.rows.size()) throw std::invalid_argument("sample grids differ in length");
  const std::size_t tc = a.column("t");
  std::vector<double> times;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double ta = a.rows[i][tc];
    const double tb = b.rows[i][b.column("t")];
    if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta))) {
      throw std::invalid_argument("sample grids differ at row " + std::to_string(i + 1));
    }
    times.push_back(ta);
  }
  auto column_of = [](const CsvTable& t, const std::string& name) {
    std::vector<double> v;
    const std::size_t c = t.column(name);
    for (const auto& row : t.rows) v.push_back(row[c]);
    return v;
  };
  ComparisonReport report;
  report.z_threshold = z_threshold;
  for (const char* name : {"n1", "n2", "n3", "vn1", "vn2", "vn3", "vn13", "xi13", "xis1", "xis3"}) {
    Series s;
    s.name = name;
    s.a = column_of(a, name);
    s.b = column_of(b, name);
    const std::string se_name = std::string(name) + "_se";
    s.has_se = std::find(a.columns.begin(), a.columns.end(), se_name) != a.columns.end();
    if (s.has_se) {
      s.a_se = column_of(a, se_name);
      s.b_se = column_of(b, se_name);
    }
    score(report, times, s);
  }
  return report;
}

ComparisonReport compare(const TimeSeriesResult& a, const TimeSeriesResult& b, double z_threshold) {
  if (a.points.size() != b.points.size()) throw std::invalid_argument("sample grids differ in length");
  std::vector<double> times;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (std::abs(a.points[i].t - b.points[i].t) > 1e-9 * std::max(1.0, std::abs(a.points[i].t))) {
      throw std::invalid_argument("sample grids differ at index " + std::to_string(i));
    }
    times.push_back(a.points[i].t);
  }
  using Getter = Estimate (*)(const TimePoint&);
  const std::pair<const char*, Getter> observables[] = {
      {"n1", [](const TimePoint& p) { return p.population[0]; }},
      {"n2", [](const TimePoint& p) { return p.population[1]; }},
      {"n3", [](const TimePoint& p) { return p.population[2]; }},
      {"vn1", [](const TimePoint& p) { return p.variance[0]; }},
      {"vn2", [](const TimePoint& p) { return p.variance[1]; }},
      {"vn3", [](const TimePoint& p) { return p.variance[2]; }},
      {"vn13", [](const TimePoint& p) { return p.variance_diff13; }},
      {"xi13", [](const TimePoint& p) { return p.xi13; }},
      {"xis1", [](const TimePoint& p) { return p.xi_steer1; }},
      {"xis3", [](const TimePoint& p) { return p.xi_steer3; }},
  };
  ComparisonReport report;
  report.z_threshold = z_threshold;
  for (const auto& [name, get] : observables) {
    Series s;
    s.name = name;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Estimate ea = get(a.points[i]);
      const Estimate eb = get(b.points[i]);
      s.a.push_back(ea.value);
      s.a_se.push_back(ea.se);
      s.b.push_back(eb.value);
      s.b_se.push_back(eb.se);
    }
    score(report, times, s);
  }
  return report;
}

// --------------------------------------------------------------------------
// Run

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string csv_text(const TimeSeriesResult& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

std::string metadata(const RunConfig& cfg, const char* source, const TimeSeriesResult& r, double wall,
                     unsigned workers) {
  nlohmann::json j;
  j["source"] = source;
  j["config"] = config_json(cfg);
  j["build_id"] = build_id();
  j["valid_trajectories"] = r.n_valid;
  j["divergent_trajectories"] = r.n_excluded;
  j["wall_seconds"] = wall;
  j["workers"] = workers;
  return j.dump(2) + "\n";
}

std::string sibling(const std::string& csv_path, const std::string& suffix) {
  std::filesystem::path p(csv_path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

}  // namespace

RunSummary run(const RunConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  RunSummary summary;

  if (cfg.mode == RunMode::oracle) {
    summary.result = run_oracle(cfg);
    summary.wall_seconds = elapsed();
    write_file(cfg.output_path, csv_text(summary.result));
    write_file(cfg.output_path + ".meta.json",
               metadata(cfg, "oracle", summary.result, summary.wall_seconds, 1));
    summary.files = {cfg.output_path, cfg.output_path + ".meta.json"};
    return summary;
  }

  const MomentAccumulator acc = simulate_ensemble(cfg, workers);
  summary.divergent = acc.excluded();
  const double fraction = static_cast<double>(summary.divergent) / static_cast<double>(cfg.trajectories);
  auto breach = [&] {
    std::ostringstream msg;
    msg << summary.divergent << " of " << cfg.trajectories
        << " trajectories diverged (fraction " << fraction << " > " << kMaxDivergentFraction << ")";
    return DivergenceBreach(msg.str());
  };
  // Nothing meaningful to write when too few trajectories survive.
  if (fraction > kMaxDivergentFraction && acc.count() < cfg.batches) throw breach();
  summary.result = finalize(acc);
  summary.wall_seconds = elapsed();
  write_file(cfg.output_path, csv_text(summary.result));
  write_file(cfg.output_path + ".meta.json",
             metadata(cfg, "positive_p", summary.result, summary.wall_seconds, workers));
  summary.files = {cfg.output_path, cfg.output_path + ".meta.json"};

  if (cfg.mode == RunMode::compare) {
    const TimeSeriesResult exact = run_oracle(cfg);
    const std::string oracle_path = sibling(cfg.output_path, ".oracle.csv");
    write_file(oracle_path, csv_text(exact));
    write_file(oracle_path + ".meta.json", metadata(cfg, "oracle", exact, elapsed(), 1));
    summary.comparison = compare(summary.result, exact);
    const std::string report_path = sibling(cfg.output_path, ".compare.json");
    write_file(report_path, summary.comparison.to_json() + "\n");
    summary.files.insert(summary.files.end(), {oracle_path, oracle_path + ".meta.json", report_path});
  }

  if (fraction > kMaxDivergentFraction) throw breach();
  return summary;
}

}  // namespace atomsplit
