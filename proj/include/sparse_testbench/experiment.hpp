#pragma once

// Declarative experiments: JSON configs, sweeps over p, flattened result
// records, CSV / JSON / manifest persistence with atomic renames, the
// exponent table and the figures.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sparse_testbench/decision.hpp"
#include "sparse_testbench/error.hpp"
#include "sparse_testbench/risk.hpp"
#include "sparse_testbench/signal.hpp"
#include "sparse_testbench/svg.hpp"
#include "sparse_testbench/theory.hpp"

#ifndef SPARSE_TESTBENCH_VERSION
#define SPARSE_TESTBENCH_VERSION "0.0.0"
#endif

namespace sparse_testbench {

inline constexpr const char* kToolVersion = SPARSE_TESTBENCH_VERSION;

struct ExperimentConfig {
  std::string experiment_id;
  DesignFamily design_family = DesignFamily::orthogonal;
  RegimeSpec regime;
  std::vector<TestRequest> tests;
  std::vector<std::int64_t> p_grid;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string output_dir = "results";
  std::optional<SignMode> prior_sign_mode;
  bool materialize_orthogonal = false;

  bool operator==(const ExperimentConfig&) const = default;
};

// --- JSON mapping ------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || it.key() == key;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  return obj.at(key);
}

inline double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

inline std::int64_t as_integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  return v.get<std::int64_t>();
}

template <typename F>
auto translate(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

inline json test_to_json(const TestRequest& t) {
  json out = json::object();
  out["name"] = std::string(to_string(t.name));
  if (!t.params.empty()) {
    json params = json::object();
    for (const auto& [k, v] : t.params) params[k] = v;
    out["params"] = params;
  }
  if (t.lr_sign_mode) out["prior"] = std::string(to_string(*t.lr_sign_mode));
  if (!t.members.empty()) {
    json members = json::array();
    for (const auto& m : t.members) members.push_back(test_to_json(m));
    out["members"] = members;
  }
  return out;
}

inline TestRequest test_from_json(const json& v, const std::string& where) {
  TestRequest t;
  if (v.is_string()) {
    t.name = translate([&] { return parse_test_name(v.get<std::string>()); });
    return t;
  }
  if (!v.is_object()) throw ConfigError(where + " must be a test name or object");
  reject_unknown_keys(v, {"name", "params", "prior", "members"}, where);
  t.name = translate([&] { return parse_test_name(as_string(require(v, "name", where), where + ".name")); });
  if (v.contains("params")) {
    const auto& params = v.at("params");
    if (!params.is_object()) throw ConfigError(where + ".params must be an object");
    static const char* const kKnown[] = {"t", "tau", "tau_p", "ols_tau", "ols_cstar", "cutoff"};
    for (auto it = params.begin(); it != params.end(); ++it) {
      if (std::find(std::begin(kKnown), std::end(kKnown), it.key()) == std::end(kKnown)) {
        throw ConfigError("unknown test parameter '" + it.key() + "' in " + where);
      }
      t.params[it.key()] = as_number(it.value(), where + ".params." + it.key());
    }
  }
  if (v.contains("prior")) {
    t.lr_sign_mode = translate([&] { return parse_sign_mode(as_string(v.at("prior"), where + ".prior")); });
  }
  if (v.contains("members")) {
    const auto& members = v.at("members");
    if (!members.is_array()) throw ConfigError(where + ".members must be an array");
    for (std::size_t i = 0; i < members.size(); ++i) {
      t.members.push_back(test_from_json(members[i], where + ".members[" + std::to_string(i) + "]"));
    }
  }
  if ((t.name == TestName::bonferroni) != !t.members.empty()) {
    throw ConfigError(where + ": members are required for bonferroni and only allowed there");
  }
  return t;
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json regime = json::object();
  regime["alpha"] = c.regime.alpha;
  regime["signal_mode"] = std::string(to_string(c.regime.mode));
  regime["r"] = c.regime.r;
  regime["delta"] = c.regime.delta;
  regime["fixed_s"] = c.regime.fixed_s ? json(*c.regime.fixed_s) : json(nullptr);
  regime["n_rule"] = {{"c", c.regime.n_rule.c}, {"gamma", c.regime.n_rule.gamma},
                      {"kappa", c.regime.n_rule.kappa}};
  json tests = json::array();
  for (const auto& t : c.tests) tests.push_back(detail::test_to_json(t));
  json out = json::object();
  out["experiment_id"] = c.experiment_id;
  out["design_family"] = std::string(to_string(c.design_family));
  out["regime"] = regime;
  out["tests"] = tests;
  out["p_grid"] = c.p_grid;
  out["reps"] = c.reps;
  out["seed"] = c.seed;
  out["output_dir"] = c.output_dir;
  if (c.prior_sign_mode) out["prior_sign_mode"] = std::string(to_string(*c.prior_sign_mode));
  if (c.materialize_orthogonal) out["materialize_orthogonal"] = true;
  return out;
}

/// Checks every invariant a run relies on, including that each test can be
/// built at each p.
inline void validate(const ExperimentConfig& c) {
  if (c.experiment_id.empty()) throw ConfigError("experiment_id must be nonempty");
  if (c.experiment_id == "." || c.experiment_id == "..") throw ConfigError("experiment_id is not a valid name");
  for (char ch : c.experiment_id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
    if (!safe) throw ConfigError("experiment_id must use only [A-Za-z0-9_.-]");
  }
  if (c.tests.empty()) throw ConfigError("tests must be nonempty");
  if (c.p_grid.empty()) throw ConfigError("p_grid must be nonempty");
  for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
    if (c.p_grid[i] < 2) throw ConfigError("p_grid entries must be >= 2");
    if (i > 0 && c.p_grid[i] <= c.p_grid[i - 1]) throw ConfigError("p_grid must be strictly increasing");
  }
  if (c.reps < kMinReps) throw ConfigError("reps must be >= 100");
  if (c.output_dir.empty()) throw ConfigError("output_dir must be nonempty");
  try {
    c.regime.validate();
    for (auto p : c.p_grid) {
      const auto resolved = resolve_regime(c.regime, static_cast<double>(p));
      for (const auto& t : c.tests) build_test(t, resolved);
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const BudgetError& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig config_from_json(const nlohmann::json& v) {
  using detail::as_integer;
  using detail::as_number;
  using detail::as_string;
  using detail::require;
  using detail::translate;
  if (!v.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(v, {"experiment_id", "design_family", "regime", "tests", "p_grid", "reps",
                                  "seed", "output_dir", "prior_sign_mode", "materialize_orthogonal"},
                              "config");
  ExperimentConfig c;
  c.experiment_id = as_string(require(v, "experiment_id", "config"), "experiment_id");
  c.design_family = translate([&] {
    return parse_design_family(as_string(require(v, "design_family", "config"), "design_family"));
  });

  const auto& reg = require(v, "regime", "config");
  if (!reg.is_object()) throw ConfigError("regime must be an object");
  detail::reject_unknown_keys(reg, {"alpha", "signal_mode", "r", "delta", "fixed_s", "n_rule"}, "regime");
  c.regime.mode = translate([&] {
    return parse_signal_mode(as_string(require(reg, "signal_mode", "regime"), "regime.signal_mode"));
  });
  if (reg.contains("alpha")) c.regime.alpha = as_number(reg.at("alpha"), "regime.alpha");
  if (reg.contains("r")) c.regime.r = as_number(reg.at("r"), "regime.r");
  if (reg.contains("delta")) c.regime.delta = as_number(reg.at("delta"), "regime.delta");
  if (reg.contains("fixed_s") && !reg.at("fixed_s").is_null()) {
    c.regime.fixed_s = as_integer(reg.at("fixed_s"), "regime.fixed_s");
  }
  if (reg.contains("n_rule")) {
    const auto& nr = reg.at("n_rule");
    if (!nr.is_object()) throw ConfigError("regime.n_rule must be an object");
    detail::reject_unknown_keys(nr, {"c", "gamma", "kappa"}, "regime.n_rule");
    if (nr.contains("c")) c.regime.n_rule.c = as_number(nr.at("c"), "n_rule.c");
    if (nr.contains("gamma")) c.regime.n_rule.gamma = as_number(nr.at("gamma"), "n_rule.gamma");
    if (nr.contains("kappa")) c.regime.n_rule.kappa = as_number(nr.at("kappa"), "n_rule.kappa");
  } else if (c.design_family != DesignFamily::orthogonal) {
    c.regime.n_rule = NRule::quadratic_log();
  }

  const auto& tests = require(v, "tests", "config");
  if (!tests.is_array()) throw ConfigError("tests must be an array");
  for (std::size_t i = 0; i < tests.size(); ++i) {
    c.tests.push_back(detail::test_from_json(tests[i], "tests[" + std::to_string(i) + "]"));
  }
  const auto& grid = require(v, "p_grid", "config");
  if (!grid.is_array()) throw ConfigError("p_grid must be an array");
  for (const auto& p : grid) c.p_grid.push_back(as_integer(p, "p_grid entry"));
  c.reps = as_integer(require(v, "reps", "config"), "reps");
  const auto& seed = require(v, "seed", "config");
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
    throw ConfigError("seed must be a nonnegative integer");
  }
  c.seed = seed.get<std::uint64_t>();
  if (v.contains("output_dir")) c.output_dir = as_string(v.at("output_dir"), "output_dir");
  if (v.contains("prior_sign_mode")) {
    c.prior_sign_mode = translate([&] { return parse_sign_mode(as_string(v.at("prior_sign_mode"), "prior_sign_mode")); });
  }
  if (v.contains("materialize_orthogonal")) {
    if (!v.at("materialize_orthogonal").is_boolean()) throw ConfigError("materialize_orthogonal must be a boolean");
    c.materialize_orthogonal = v.at("materialize_orthogonal").get<bool>();
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json v;
  try {
    v = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(v);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

/// Canonical serialization: sorted keys, no whitespace.
inline std::string canonical_dump(const ExperimentConfig& c) { return to_json(c).dump(); }

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_dump(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- results -----------------------------------------------------------------

struct ResultRecord {
  std::string experiment_id;
  RiskEstimate estimate;
  ExponentPrediction prediction;

  /// risk is 0 or >= 1, so a log transform of risk or 1 - risk is undefined.
  bool censored() const { return estimate.risk <= 0.0 || estimate.risk >= 1.0; }
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "experiment_id", "test", "p", "n", "s", "A", "design_family", "regime_label", "reps", "seed",
      "type1", "type1_ci", "type2_bayes", "type2_bayes_ci", "type2_worst_candidate",
      "type2_worst_candidate_ci", "risk", "risk_se", "censored", "predicted_side",
      "predicted_scale", "predicted_limit"};
  return cols;
}

/// 17 significant digits, '.' decimal separator.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_row(const ResultRecord& r) {
  const auto& e = r.estimate;
  const bool has_limit = r.prediction.limit_value.has_value();
  return {r.experiment_id,
          e.test_label,
          std::to_string(e.regime.p),
          std::to_string(e.regime.n),
          std::to_string(e.regime.s),
          format_real(e.regime.amplitude),
          std::string(to_string(e.design_family)),
          std::string(to_string(r.prediction.regime_label)),
          std::to_string(e.reps),
          std::to_string(e.seed),
          format_real(e.type1.value),
          format_real(e.type1.ci_halfwidth),
          format_real(e.type2_bayes.value),
          format_real(e.type2_bayes.ci_halfwidth),
          format_real(e.type2_worst_candidate.value),
          format_real(e.type2_worst_candidate.ci_halfwidth),
          format_real(e.risk),
          format_real(e.risk_se),
          r.censored() ? "true" : "false",
          has_limit ? std::string(to_string(r.prediction.side)) : "",
          has_limit ? std::string(to_string(r.prediction.scale)) : "",
          has_limit ? format_real(*r.prediction.limit_value) : ""};
}

inline std::string to_csv(const std::vector<ResultRecord>& records) {
  std::string out;
  const auto join = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  join(csv_columns());
  for (const auto& r : records) join(csv_row(r));
  return out;
}

inline nlohmann::json to_json(const ResultRecord& r) {
  using nlohmann::json;
  const auto& e = r.estimate;
  json out = json::object();
  out["experiment_id"] = r.experiment_id;
  out["test"] = e.test_label;
  out["p"] = e.regime.p;
  out["n"] = e.regime.n;
  out["s"] = e.regime.s;
  out["A"] = e.regime.amplitude;
  out["design_family"] = std::string(to_string(e.design_family));
  out["regime_label"] = std::string(to_string(r.prediction.regime_label));
  out["reps"] = e.reps;
  out["seed"] = e.seed;
  out["prior_sign_mode"] = std::string(to_string(e.prior_sign_mode));
  out["type1"] = e.type1.value;
  out["type1_ci"] = e.type1.ci_halfwidth;
  out["type2_bayes"] = e.type2_bayes.value;
  out["type2_bayes_ci"] = e.type2_bayes.ci_halfwidth;
  json candidates = json::array();
  for (const auto& c : e.type2_candidates) candidates.push_back(c.value);
  out["type2_candidates"] = candidates;
  out["type2_worst_candidate"] = e.type2_worst_candidate.value;
  out["type2_worst_candidate_ci"] = e.type2_worst_candidate.ci_halfwidth;
  out["risk"] = e.risk;
  out["risk_se"] = e.risk_se;
  out["censored"] = r.censored();
  if (r.prediction.limit_value) {
    out["prediction"] = {{"side", std::string(to_string(r.prediction.side))},
                         {"scale", std::string(to_string(r.prediction.scale))},
                         {"limit", *r.prediction.limit_value}};
  } else {
    out["prediction"] = nullptr;
  }
  out["warnings"] = e.warnings;
  return out;
}

struct RunOptions {
  int threads = 0;
  /// Called after each p with (p, index, total).
  std::function<void(std::int64_t, std::size_t, std::size_t)> progress;
};

/// Runs every (test, p) pair. Replications at p use the stream derived from
/// (seed, p), and all tests at one p share the same draws.
inline std::vector<ResultRecord> run_experiment(const ExperimentConfig& config,
                                                const RunOptions& options = {}) {
  validate(config);
  const ExponentPrediction prediction = classify_regime(config.regime);
  RiskOptions risk_options;
  risk_options.threads = options.threads;
  risk_options.materialize_orthogonal = config.materialize_orthogonal;
  risk_options.prior_sign_mode = config.prior_sign_mode;
  std::vector<ResultRecord> out;
  for (std::size_t i = 0; i < config.p_grid.size(); ++i) {
    const double p = static_cast<double>(config.p_grid[i]);
    const ResolvedRegime resolved = resolve_regime(config.regime, p);
    std::vector<TestSpec> specs;
    for (const auto& t : config.tests) specs.push_back(build_test(t, resolved));
    const auto estimates = estimate_risks(specs, config.regime, p, config.reps,
                                          derive_seed(config.seed, static_cast<std::uint64_t>(config.p_grid[i])),
                                          config.design_family, risk_options);
    for (const auto& e : estimates) out.push_back({config.experiment_id, e, prediction});
    if (options.progress) options.progress(config.p_grid[i], i + 1, config.p_grid.size());
  }
  return out;
}

// --- persistence -------------------------------------------------------------

/// Writes `content` next to `path` and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

struct RunArtifacts {
  std::filesystem::path directory;
  std::filesystem::path results_csv, results_json, manifest_json;
};

/// Persists a finished run. Nothing is renamed into place until every file
/// has been rendered.
inline RunArtifacts write_results(const ExperimentConfig& config,
                                  const std::vector<ResultRecord>& records, double wall_seconds,
                                  const std::filesystem::path& output_root) {
  RunArtifacts out;
  out.directory = output_root / config.experiment_id;
  out.results_csv = out.directory / "results.csv";
  out.results_json = out.directory / "results.json";
  out.manifest_json = out.directory / "manifest.json";

  const std::string csv = to_csv(records);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) rows.push_back(to_json(r));
  nlohmann::json manifest = {{"experiment_id", config.experiment_id},
                             {"config_hash", config_hash(config)},
                             {"config", to_json(config)},
                             {"tool_version", kToolVersion},
                             {"wall_time_seconds", wall_seconds},
                             {"rows", records.size()},
                             {"files", {"results.csv", "results.json"}}};
  write_atomic(out.results_json, rows.dump(2) + "\n");
  write_atomic(out.results_csv, csv);
  write_atomic(out.manifest_json, manifest.dump(2) + "\n");
  return out;
}

/// Loads and validates a config, runs it and writes its artifacts. An
/// explicit `output_root` overrides the config's output_dir.
inline RunArtifacts run_config_file(const std::filesystem::path& path,
                                    std::optional<std::filesystem::path> output_root = std::nullopt,
                                    const RunOptions& options = {}) {
  const ExperimentConfig config = load_config(path);
  const auto start = std::chrono::steady_clock::now();
  const auto records = run_experiment(config, options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return write_results(config, records, wall, output_root.value_or(config.output_dir));
}

// --- reading results back ----------------------------------------------------

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Log-risk scatter of a results.csv: one series per test, with the
/// predicted slope (or level) drawn dashed.
inline std::string results_plot_svg(const std::string& csv_text) {
  const auto rows = parse_csv(csv_text);
  if (rows.size() < 2) throw DomainError("results file has no data rows");
  const auto& header = rows.front();
  if (header != csv_columns()) throw DomainError("results file does not have the expected columns");
  const auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::vector<svg::ScatterSeries> series;
  std::string side = "log_risk", scale = "log p";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != header.size()) throw DomainError("malformed results row " + std::to_string(i));
    const double p = std::stod(r[col("p")]);
    const double s = std::stod(r[col("s")]);
    const double risk = std::stod(r[col("risk")]);
    const double reps = std::stod(r[col("reps")]);
    if (!r[col("predicted_side")].empty()) side = r[col("predicted_side")];
    if (!r[col("predicted_scale")].empty()) scale = r[col("predicted_scale")];
    double x = scale == "s log p" ? s * std::log(p) : std::log(p);
    double y;
    if (side == "risk_itself") {
      y = risk;
    } else {
      double v = side == "log_one_minus_risk" ? 1.0 - risk : risk;
      if (!(v > 0.0)) v = 1.0 / (2.0 * reps);
      y = std::log(v);
    }
    const std::string& name = r[col("test")];
    auto it = std::find_if(series.begin(), series.end(), [&](const auto& sr) { return sr.name == name; });
    if (it == series.end()) {
      series.push_back({name, {}, std::nullopt, std::nullopt});
      it = series.end() - 1;
      if (!r[col("predicted_limit")].empty()) {
        const double limit = std::stod(r[col("predicted_limit")]);
        if (side == "risk_itself") {
          it->reference_level = limit;
        } else if (scale == "log p" || scale == "s log p") {
          it->reference_slope = limit;
        }
      }
    }
    it->points.emplace_back(x, y);
  }
  const std::string y_label = side == "risk_itself" ? "risk"
                              : side == "log_one_minus_risk" ? "log(1 - risk)"
                                                              : "log risk";
  const std::string x_label = scale == "s log p" ? "s log p" : "log p";
  return svg::scatter_svg(series, "risk against " + x_label, x_label, y_label);
}

// --- exponent table ------------------------------------------------------------

/// Predicted limits over a canonical grid, as CSV.
inline std::string exponent_table_csv() {
  std::ostringstream out;
  out << "signal_mode,alpha,parameter,value,regime_label,side,scale,limit\n";
  const auto row = [&](const RegimeSpec& spec, const std::string& param, double value) {
    const auto pred = classify_regime(spec);
    out << to_string(spec.mode) << ',' << format_real(spec.alpha) << ',' << param << ','
        << format_real(value) << ',' << to_string(pred.regime_label) << ',';
    if (pred.limit_value) {
      out << to_string(pred.side) << ',' << to_string(pred.scale) << ','
          << format_real(*pred.limit_value);
    } else {
      out << ",,";
    }
    out << '\n';
  };
  for (double alpha : {0.55, 0.6, 0.7, 0.75, 0.8, 0.9}) {
    for (double r : {0.05, 0.08, 0.2, 0.3, 0.5, 1.0, 2.0, 4.0}) {
      row(RegimeSpec::sparse(alpha, r), "r", r);
    }
    row(RegimeSpec::sparse(alpha, rho_star(alpha)), "r=rho*", rho_star(alpha));
  }
  for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    for (double delta : {-0.45, -0.3, -0.1, 0.05, 0.08, 0.15, 0.3, 0.45}) {
      row(RegimeSpec::dense(alpha, delta), "delta", delta);
    }
  }
  for (std::int64_t s : {1, 2, 3, 5}) {
    RegimeSpec spec = RegimeSpec::boundary(s);
    const auto pred = classify_regime(spec);
    out << to_string(spec.mode) << ",," << "s" << ',' << s << ',' << to_string(pred.regime_label)
        << ',' << to_string(pred.side) << ',' << to_string(pred.scale) << ','
        << format_real(*pred.limit_value) << '\n';
  }
  return out.str();
}

}  // namespace sparse_testbench
