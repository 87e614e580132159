#pragma once

// Run and sweep configuration: JSON parsing with strict key checking,
// validation, defaults and emission of the effective configuration.

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmhd/error.hpp"
#include "bmhd/grid.hpp"
#include "bmhd/mhd.hpp"
#include "bmhd/stepper.hpp"

namespace bmhd {

using json = nlohmann::json;

struct InitialDataConfig {
  std::string family = "taylor-green-mhd";
  double amplitude = 0.1;
  std::uint64_t seed = 1;
  /// "kappa-inverse": a0 = amplitude * f / kappa;  "fixed": a0 = amplitude * f.
  std::string density_scaling = "kappa-inverse";
  /// Amplitude of the gradient (compressive) part added to u0, relative to amplitude.
  double compressive_amplitude = 0.0;

  void validate() const {
    if (family != "taylor-green-mhd" && family != "random-bandlimited")
      throw ConfigError("initial_data.family: unknown family '" + family +
                        "' (expected taylor-green-mhd or random-bandlimited)");
    if (!std::isfinite(amplitude) || amplitude < 0.0) throw ConfigError("initial_data.amplitude must be >= 0");
    if (density_scaling != "kappa-inverse" && density_scaling != "fixed")
      throw ConfigError("initial_data.density_scaling must be kappa-inverse or fixed");
    if (!std::isfinite(compressive_amplitude) || compressive_amplitude < 0.0)
      throw ConfigError("initial_data.compressive_amplitude must be >= 0");
  }
};

struct OutputConfig {
  std::string directory = "bmhd_out";
  int checkpoint_stride = 0;  ///< steps between checkpoints; 0 writes only the final one
  std::vector<std::string> formats = {"csv", "json", "gnuplot"};

  bool wants(const std::string& f) const {
    for (const auto& x : formats)
      if (x == f) return true;
    return false;
  }

  void validate() const {
    if (directory.empty()) throw ConfigError("outputs.directory must not be empty");
    if (checkpoint_stride < 0) throw ConfigError("outputs.checkpoint_stride must be >= 0");
    for (const auto& f : formats)
      if (f != "csv" && f != "json" && f != "gnuplot" && f != "checkpoint")
        throw ConfigError("outputs.formats: unknown format '" + f + "' (csv, json, gnuplot, checkpoint)");
  }
};

struct DiagnosticsConfig {
  double c_universal = 1.0;
  double kappa_threshold = 0.01;
  double m_horizon = 100.0;  ///< time cap for extending the incompressible run when estimating M
  double m_dt = 0.0;        ///< step bound for that extension; 0 means stepper.dt

  void validate() const {
    if (!(c_universal > 0.0)) throw ConfigError("diagnostics.c_universal must be > 0");
    if (!(kappa_threshold > 0.0)) throw ConfigError("diagnostics.kappa_threshold must be > 0");
    if (!(m_horizon >= 0.0)) throw ConfigError("diagnostics.m_horizon must be >= 0");
    if (!(m_dt >= 0.0)) throw ConfigError("diagnostics.m_dt must be >= 0");
  }
};

struct RunConfig {
  GridSpec grid;
  PhysParams params;
  StepperConfig stepper;
  InitialDataConfig initial_data;
  OutputConfig outputs;
  DiagnosticsConfig diagnostics;

  void validate() const {
    try {
      grid.validate();
      if (grid.d != 2) throw InvalidArgument("grid.d: solvers support d = 2 only");
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
    try {
      params.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    try {
      stepper.validate();
      if (stepper.cfl > 1.0) throw InvalidArgument("stepper.cfl must be <= 1");
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    initial_data.validate();
    outputs.validate();
    diagnostics.validate();
  }
};

struct SweepConfig {
  RunConfig base;
  std::vector<double> kappa_values;
  int parallelism = 1;
  std::string directory = "bmhd_sweep";

  void validate() const {
    base.validate();
    if (kappa_values.size() < 3) throw ConfigError("kappa_values: at least 3 values are required");
    for (std::size_t i = 0; i < kappa_values.size(); ++i) {
      if (!(kappa_values[i] > 0.0) || !std::isfinite(kappa_values[i]))
        throw ConfigError("kappa_values: all values must be > 0");
      if (i > 0 && !(kappa_values[i] > kappa_values[i - 1]))
        throw ConfigError("kappa_values must be strictly increasing");
    }
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (directory.empty()) throw ConfigError("directory must not be empty");
  }
};

namespace detail {

/// Reads a section while rejecting keys the caller did not consume.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name(key) + ": wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(name(it.key()) + ": unknown key");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": JSON parse error: " << e.what();
    throw ConfigError(os.str());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return os.str();
}

}  // namespace detail

inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  detail::Section top(j, "");
  if (!top.has("grid")) throw ConfigError("grid: section is required");
  if (!top.has("params")) throw ConfigError("params: section is required");
  {
    detail::Section s(top.at("grid"), "grid");
    s.get("d", c.grid.d);
    s.get("n", c.grid.n);
    s.get("period", c.grid.period);
    s.get("dealias_fraction", c.grid.dealias_fraction);
    s.finish();
  }
  {
    detail::Section s(top.at("params"), "params");
    s.get("mu", c.params.mu);
    s.get("nu", c.params.nu);
    s.get("gamma", c.params.gamma);
    const bool has_lambda = s.has("lambda"), has_kappa = s.has("kappa");
    if (has_lambda && has_kappa) throw ConfigError("params: give either lambda or kappa, not both");
    s.get("lambda", c.params.lambda);
    if (has_kappa) {
      double kappa = 0.0;
      s.get("kappa", kappa);
      c.params.lambda = kappa - 2.0 * c.params.mu;
    }
    s.finish();
  }
  if (top.has("stepper")) {
    detail::Section s(top.at("stepper"), "stepper");
    s.get("dt", c.stepper.dt);
    s.get("cfl", c.stepper.cfl);
    s.get("t_end", c.stepper.t_end);
    s.get("norm_stride", c.stepper.norm_stride);
    s.finish();
  }
  if (top.has("initial_data")) {
    detail::Section s(top.at("initial_data"), "initial_data");
    s.get("family", c.initial_data.family);
    s.get("amplitude", c.initial_data.amplitude);
    s.get("seed", c.initial_data.seed);
    s.get("density_scaling", c.initial_data.density_scaling);
    s.get("compressive_amplitude", c.initial_data.compressive_amplitude);
    s.finish();
  }
  if (top.has("outputs")) {
    detail::Section s(top.at("outputs"), "outputs");
    s.get("directory", c.outputs.directory);
    s.get("checkpoint_stride", c.outputs.checkpoint_stride);
    s.get("formats", c.outputs.formats);
    s.finish();
  }
  if (top.has("diagnostics")) {
    detail::Section s(top.at("diagnostics"), "diagnostics");
    s.get("c_universal", c.diagnostics.c_universal);
    s.get("kappa_threshold", c.diagnostics.kappa_threshold);
    s.get("m_horizon", c.diagnostics.m_horizon);
    s.get("m_dt", c.diagnostics.m_dt);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

inline json to_json(const RunConfig& c) {
  return json{
      {"grid", {{"d", c.grid.d}, {"n", c.grid.n}, {"period", c.grid.period}, {"dealias_fraction", c.grid.dealias_fraction}}},
      {"params", {{"mu", c.params.mu}, {"lambda", c.params.lambda}, {"nu", c.params.nu}, {"gamma", c.params.gamma}}},
      {"stepper",
       {{"dt", c.stepper.dt}, {"cfl", c.stepper.cfl}, {"t_end", c.stepper.t_end}, {"norm_stride", c.stepper.norm_stride}}},
      {"initial_data",
       {{"family", c.initial_data.family},
        {"amplitude", c.initial_data.amplitude},
        {"seed", c.initial_data.seed},
        {"density_scaling", c.initial_data.density_scaling},
        {"compressive_amplitude", c.initial_data.compressive_amplitude}}},
      {"outputs",
       {{"directory", c.outputs.directory},
        {"checkpoint_stride", c.outputs.checkpoint_stride},
        {"formats", c.outputs.formats}}},
      {"diagnostics",
       {{"c_universal", c.diagnostics.c_universal},
        {"kappa_threshold", c.diagnostics.kappa_threshold},
        {"m_horizon", c.diagnostics.m_horizon},
        {"m_dt", c.diagnostics.m_dt}}},
  };
}

inline RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>") {
  return run_config_from_json(detail::parse_json_text(text, origin));
}

inline RunConfig load_config(const std::string& path) { return parse_run_config(detail::read_text(path), path); }

/// Effective configuration as pretty JSON; reloading it gives the same config.
inline std::string emit_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  detail::Section top(j, "");
  if (!top.has("base")) throw ConfigError("base: section is required");
  c.base = run_config_from_json(top.at("base"));
  top.get("kappa_values", c.kappa_values);
  top.get("parallelism", c.parallelism);
  top.get("directory", c.directory);
  top.finish();
  c.validate();
  return c;
}

inline json to_json(const SweepConfig& c) {
  return json{{"base", to_json(c.base)},
              {"kappa_values", c.kappa_values},
              {"parallelism", c.parallelism},
              {"directory", c.directory}};
}

inline SweepConfig load_sweep_config(const std::string& path) {
  return sweep_config_from_json(detail::parse_json_text(detail::read_text(path), path));
}

/// Text for `--help`: every key with its default.
inline std::string config_defaults_help() {
  RunConfig c;
  return "Run configuration (JSON). Sections grid and params are required; every other key\n"
         "is optional and defaults to the value shown. params accepts lambda or kappa\n"
         "(kappa = lambda + 2 mu), not both. Unknown keys are rejected.\n\n" +
         to_json(c).dump(2) +
         "\n\nSweep configuration: {\"base\": <run config>, \"kappa_values\": [...strictly increasing, >= 3],\n"
         "                      \"parallelism\": 1, \"directory\": \"bmhd_sweep\"}\n";
}

}  // namespace bmhd
