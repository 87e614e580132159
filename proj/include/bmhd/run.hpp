#pragma once

// A paired run: the compressible and incompressible solvers advanced on one
// timeline, with streaming functionals, checkpoints and the final report.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmhd/checkpoint.hpp"
#include "bmhd/config.hpp"
#include "bmhd/diagnostics.hpp"
#include "bmhd/initial_data.hpp"
#include "bmhd/propagator.hpp"
#include "bmhd/report.hpp"
#include "bmhd/stepper.hpp"

namespace bmhd {

struct RunOptions {
  std::string resume_from;  ///< checkpoint written by a previous run (its .json sidecar must exist)
  long max_steps = -1;      ///< stop after this many steps, as if interrupted (-1: run to t_end)
  bool write_outputs = true;
  bool keep_samples = false;  ///< store every sampled state and rate in the result
};

struct RunResult {
  RunConfig config;
  FunctionalSeries series;
  InitialData initial;
  TheoremBudget budget;
  double Zd_T = 0.0;
  double M = 0.0;
  double t_M = 0.0;
  bool M_saturated = false;
  double M_2d_bound = 0.0;
  double energy_max_drift = 0.0;
  bool energy_relative = true;
  double max_rel_div_b = 0.0;
  double max_mean_drift = 0.0;
  double min_rho = 1.0;
  double dev_u_sup = 0.0;
  double dev_b_sup = 0.0;
  double lyap_min = std::numeric_limits<double>::infinity();
  double lyap_max = -std::numeric_limits<double>::infinity();
  long lyap_count = 0;
  double dt_min = std::numeric_limits<double>::infinity();
  double dt_max = 0.0;
  double min_dt_over_cfl = std::numeric_limits<double>::infinity();  ///< min over steps of dt / CFL bound
  long steps = 0;
  double t_final = 0.0;
  bool completed = false;
  bool blew_up = false;
  double blowup_time = 0.0;
  std::string blowup_message;
  std::vector<CompSample> comp_samples;
  std::vector<IncSample> inc_samples;
};

namespace detail {

inline nlohmann::json acc_to_json(const NormAccumulator& a) {
  return {a.linf, a.l1, a.last_t, a.last_value, a.samples};
}

inline NormAccumulator acc_from_json(const nlohmann::json& j) {
  NormAccumulator a;
  a.linf = j.at(0).get<double>();
  a.l1 = j.at(1).get<double>();
  a.last_t = j.at(2).get<double>();
  a.last_value = j.at(3).get<double>();
  a.samples = j.at(4).get<long>();
  return a;
}

#define BMHD_ZD_FIELDS(X) X(U) X(B) X(U_t) X(B_t) X(lapU) X(lapB) X(dissU) X(dissB)
#define BMHD_XY_FIELDS(X)                                                                                    \
  X(Qv) X(a) X(kgrad_a) X(Qv_t_grad_a) X(kLapQv) X(kLap_a_low) X(grad_a_high) X(Pv) X(c) X(Pv_t) X(c_t) \
      X(muLapPv) X(nuLapc) X(dev_u) X(dev_b)

inline nlohmann::json trackers_to_json(const ZdTracker& z, const XYTracker& xy) {
  nlohmann::json jz, jxy;
#define BMHD_PUT_Z(f) jz[#f] = acc_to_json(z.f);
#define BMHD_PUT_XY(f) jxy[#f] = acc_to_json(xy.f);
  BMHD_ZD_FIELDS(BMHD_PUT_Z)
  BMHD_XY_FIELDS(BMHD_PUT_XY)
#undef BMHD_PUT_Z
#undef BMHD_PUT_XY
  jz["energy0"] = z.energy0;
  jz["max_drift"] = z.max_drift;
  jz["last_drift"] = z.last_drift;
  jxy["max_rel_div_b"] = xy.max_rel_div_b;
  jxy["max_mean_drift"] = xy.max_mean_drift;
  jxy["min_rho"] = xy.min_rho;
  jxy["mean_a0"] = xy.mean_a0;
  return {{"zd", jz}, {"xy", jxy}};
}

inline void trackers_from_json(const nlohmann::json& j, ZdTracker& z, XYTracker& xy) {
  const auto& jz = j.at("zd");
  const auto& jxy = j.at("xy");
#define BMHD_GET_Z(f) z.f = acc_from_json(jz.at(#f));
#define BMHD_GET_XY(f) xy.f = acc_from_json(jxy.at(#f));
  BMHD_ZD_FIELDS(BMHD_GET_Z)
  BMHD_XY_FIELDS(BMHD_GET_XY)
#undef BMHD_GET_Z
#undef BMHD_GET_XY
  z.energy0 = jz.at("energy0").get<double>();
  z.max_drift = jz.at("max_drift").get<double>();
  z.last_drift = jz.at("last_drift").get<double>();
  xy.max_rel_div_b = jxy.at("max_rel_div_b").get<double>();
  xy.max_mean_drift = jxy.at("max_mean_drift").get<double>();
  xy.min_rho = jxy.at("min_rho").get<double>();
  xy.mean_a0 = jxy.at("mean_a0").get<double>();
}

#undef BMHD_ZD_FIELDS
#undef BMHD_XY_FIELDS

/// Linear interpolation of Z_d history at time t.
inline double zd_at(const std::vector<std::pair<double, double>>& hist, double t) {
  if (hist.empty()) return 0.0;
  if (t <= hist.front().first) return hist.front().second;
  auto it = std::lower_bound(hist.begin(), hist.end(), t,
                             [](const std::pair<double, double>& p, double x) { return p.first < x; });
  if (it == hist.end()) return hist.back().second;
  if (it->first == t || it == hist.begin()) return it->second;
  const auto& lo = *(it - 1);
  const double w = (t - lo.first) / (it->first - lo.first);
  return lo.second + w * (it->second - lo.second);
}

/// Z_d has saturated at the last sample time t: it grew by less than 1% over the last decade [t/10, t].
inline bool zd_saturated(const std::vector<std::pair<double, double>>& hist) {
  if (hist.empty()) return true;
  const auto [t, z] = hist.back();
  if (z == 0.0) return true;
  return z - zd_at(hist, 0.1 * t) < 0.01 * z;
}

inline nlohmann::json budget_json(const TheoremBudget& b) {
  return {{"M", json_number(b.M)},
          {"D0", json_number(b.D0)},
          {"delta0", json_number(b.delta0)},
          {"log_D0", json_number(b.log_D0)},
          {"log_delta0", json_number(b.log_delta0)},
          {"kappa", json_number(b.kappa)},
          {"C_universal", b.C_universal},
          {"threshold", b.threshold},
          {"kappa_check_value", json_number(b.kappa_check_value)},
          {"delta_check_value", json_number(b.delta_check_value)},
          {"kappa_check", b.kappa_check},
          {"delta_check", b.delta_check}};
}

}  // namespace detail

inline nlohmann::json result_json(const RunResult& r) {
  using detail::budget_json;
  return {{"config", to_json(r.config)},
          {"completed", r.completed},
          {"blew_up", r.blew_up},
          {"blowup_time", json_number(r.blowup_time)},
          {"blowup_message", r.blowup_message},
          {"steps", r.steps},
          {"t_final", r.t_final},
          {"dt_min", json_number(r.dt_min)},
          {"dt_max", json_number(r.dt_max)},
          {"min_dt_over_cfl", json_number(r.min_dt_over_cfl)},
          {"initial", {{"a0", r.initial.a0}, {"Qv0", r.initial.Qv0}, {"a0_hi", r.initial.a0_hi},
                       {"Xd0", r.initial.Xd0(r.config.params.kappa())}}},
          {"Zd_T", r.Zd_T},
          {"M", r.M},
          {"t_M", r.t_M},
          {"M_saturated", r.M_saturated},
          {"M_2d_bound", json_number(r.M_2d_bound)},
          {"budget", budget_json(r.budget)},
          {"energy_max_drift", json_number(r.energy_max_drift)},
          {"energy_relative", r.energy_relative},
          {"max_rel_div_b", json_number(r.max_rel_div_b)},
          {"max_mean_drift", json_number(r.max_mean_drift)},
          {"min_rho", json_number(r.min_rho)},
          {"dev_u_sup", json_number(r.dev_u_sup)},
          {"dev_b_sup", json_number(r.dev_b_sup)},
          {"lyapunov", {{"min_ratio", json_number(r.lyap_min)}, {"max_ratio", json_number(r.lyap_max)},
                        {"blocks", r.lyap_count}}}};
}

inline void write_run_outputs(const RunResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir = r.config.outputs.directory;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  write_text(dir / "config.json", emit_config(r.config));
  if (r.config.outputs.wants("csv")) write_text(dir / "series.csv", series_csv(r.series));
  if (r.config.outputs.wants("json")) write_text(dir / "report.json", result_json(r).dump(2) + "\n");
  if (r.config.outputs.wants("gnuplot")) write_text(dir / "functionals.gp", gnuplot_series_script());
}

namespace detail {

struct RunLoop {
  const RunConfig& cfg;
  const RunOptions& opt;
  RunResult res;
  DyadicProfile prof;
  ZdTracker z;
  XYTracker xy;
  std::vector<std::pair<double, double>> zd_hist;
  CompressibleState comp;
  IncompressibleState inc;
  double mean_a0 = 0.0;
  std::optional<LinearPropagator> prop;

  RunLoop(const RunConfig& c, const RunOptions& o) : cfg(c), opt(o), prof(c.grid) { res.config = c; }

  const LinearPropagator& propagator(double dt) {
    if (!prop || prop->dt() != dt) prop.emplace(cfg.grid, cfg.params, dt);
    return *prop;
  }

  void sample() {
    const CompSample cs = make_comp_sample(comp, cfg.params);
    const IncSample is = make_inc_sample(inc, cfg.params);
    const IncNorms in = inc_norms(is.state, is.rate, cfg.params, prof);
    const DevNorms dn = dev_norms(cs.state, cs.rate, is.state, is.rate, cfg.params, prof);
    z.push(in, cfg.params);
    xy.push(dn);
    res.series.push_back(make_record(in, dn, z, xy));
    zd_hist.emplace_back(in.t, z.Zd());
    for (const auto& blk : lyapunov_blocks(comp, inc, cfg.params, prof)) {
      if (blk.empty()) continue;
      res.lyap_min = std::min(res.lyap_min, blk.ratio);
      res.lyap_max = std::max(res.lyap_max, blk.ratio);
      ++res.lyap_count;
    }
    if (opt.keep_samples) {
      res.comp_samples.push_back(cs);
      res.inc_samples.push_back(is);
    }
  }

  nlohmann::json sidecar() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res.series) rows.push_back(record_values(r));
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [t, v] : zd_hist) hist.push_back({t, v});
    return {{"step", res.steps},
            {"t", comp.t},
            {"mean_a0", mean_a0},
            {"trackers", trackers_to_json(z, xy)},
            {"series", rows},
            {"zd_history", hist},
            {"lyapunov", {json_number(res.lyap_min), json_number(res.lyap_max), res.lyap_count}},
            {"dt", {json_number(res.dt_min), json_number(res.dt_max), json_number(res.min_dt_over_cfl)}}};
  }

  void restore(const nlohmann::json& j) {
    res.steps = j.at("step").get<long>();
    mean_a0 = j.at("mean_a0").get<double>();
    trackers_from_json(j.at("trackers"), z, xy);
    for (const auto& row : j.at("series")) res.series.push_back(record_from_values(row.get<std::vector<double>>()));
    for (const auto& h : j.at("zd_history")) zd_hist.emplace_back(h.at(0).get<double>(), h.at(1).get<double>());
    res.lyap_min = number_from_json(j.at("lyapunov").at(0));
    res.lyap_max = number_from_json(j.at("lyapunov").at(1));
    res.lyap_count = j.at("lyapunov").at(2).get<long>();
    res.dt_min = number_from_json(j.at("dt").at(0));
    res.dt_max = number_from_json(j.at("dt").at(1));
    res.min_dt_over_cfl = number_from_json(j.at("dt").at(2));
  }

  void write_checkpoint(const std::string& stem) const {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.outputs.directory;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());
    const fs::path p = dir / (stem + ".bmhd");
    checkpoint_write(make_checkpoint(comp, inc), p.string());
    write_text(p.string() + ".json", sidecar().dump() + "\n");
  }

  bool checkpoints_enabled() const {
    return opt.write_outputs && (cfg.outputs.checkpoint_stride > 0 || cfg.outputs.wants("checkpoint"));
  }

  void main_loop() {
    const double t_end = cfg.stepper.t_end;
    const double eps = 1e-12 * std::max(1.0, t_end);
    while (comp.t < t_end - eps) {
      if (opt.max_steps >= 0 && res.steps >= opt.max_steps) return;
      const double cfl_dt = std::min(adaptive_dt(comp, cfg.params, cfg.stepper), adaptive_dt(inc, cfg.stepper));
      const double dt = std::min(cfl_dt, t_end - comp.t);
      const bool last = dt >= t_end - comp.t - eps;
      const LinearPropagator& pr = propagator(dt);
      comp = step(comp, cfg.params, pr, mean_a0);
      inc = step(inc, cfg.params, pr);
      if (last) comp.t = inc.t = t_end;
      ++res.steps;
      if (!last) {
        res.dt_min = std::min(res.dt_min, dt);
        res.min_dt_over_cfl = std::min(res.min_dt_over_cfl, dt / cfl_dt);
      }
      res.dt_max = std::max(res.dt_max, dt);
      if (last || res.steps % cfg.stepper.norm_stride == 0) {
        try {
          sample();
        } catch (const SingularDensity& e) {
          throw BlowUp(e.what(), comp.t);
        }
      }
      if (checkpoints_enabled() && cfg.outputs.checkpoint_stride > 0 && res.steps % cfg.outputs.checkpoint_stride == 0)
        write_checkpoint("checkpoint_" + std::to_string(res.steps));
    }
    res.completed = true;
  }

  /// Extends the incompressible run alone until Z_d saturates or m_horizon is reached.
  void estimate_M() {
    ZdTracker zm = z;
    auto hist = zd_hist;
    IncompressibleState s = inc;
    StepperConfig sc = cfg.stepper;
    if (cfg.diagnostics.m_dt > 0.0) sc.dt = cfg.diagnostics.m_dt;
    std::optional<LinearPropagator> pm;
    long k = 0;
    bool sat = zd_saturated(hist);
    while (!sat && s.t < cfg.diagnostics.m_horizon) {
      const double dt = std::min(adaptive_dt(s, sc), std::max(cfg.diagnostics.m_horizon - s.t, kMinTimeStep));
      if (!pm || pm->dt() != dt) pm.emplace(cfg.grid, cfg.params, dt);
      s = step(s, cfg.params, *pm);
      if (++k % cfg.stepper.norm_stride == 0 || s.t >= cfg.diagnostics.m_horizon) {
        const IncSample is = make_inc_sample(s, cfg.params);
        zm.push(inc_norms(is.state, is.rate, cfg.params, prof), cfg.params);
        hist.emplace_back(s.t, zm.Zd());
        sat = zd_saturated(hist);
      }
    }
    res.M = zm.Zd();
    res.t_M = hist.empty() ? 0.0 : hist.back().first;
    res.M_saturated = sat;
  }

  void finalize() {
    res.t_final = comp.t;
    res.Zd_T = z.Zd();
    res.energy_max_drift = z.max_drift;
    res.energy_relative = z.energy0 > 0.0;
    res.max_rel_div_b = xy.max_rel_div_b;
    res.max_mean_drift = xy.max_mean_drift;
    res.min_rho = xy.min_rho;
    res.dev_u_sup = xy.dev_u.linf;
    res.dev_b_sup = xy.dev_b.linf;
  }
};

}  // namespace detail

/// Runs both solvers from the configured initial data (or a checkpoint) to t_end.
/// Blow-up is reported in the result, not thrown; configuration and I/O errors throw.
inline RunResult run_single(const RunConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  detail::RunLoop loop(cfg, opt);
  const InitialStates init = make_initial_data(cfg);
  loop.res.initial = initial_data_norms(init.comp, init.inc);
  loop.res.M_2d_bound =
      compute_M_2d_bound(init.inc.U, init.inc.B, cfg.params, cfg.diagnostics.c_universal);
  if (opt.resume_from.empty()) {
    loop.comp = init.comp;
    loop.inc = init.inc;
    loop.mean_a0 = init.comp.a.mean();
  } else {
    auto [c, i] = states_from_checkpoint(checkpoint_read(opt.resume_from), cfg.grid);
    loop.comp = std::move(c);
    loop.inc = std::move(i);
    nlohmann::json side;
    try {
      side = nlohmann::json::parse(detail::read_text(opt.resume_from + ".json"));
      loop.restore(side);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("checkpoint sidecar " + opt.resume_from + ".json: " + e.what());
    }
  }
  try {
    if (opt.resume_from.empty()) loop.sample();
    loop.main_loop();
    loop.finalize();
    if (loop.res.completed) loop.estimate_M();
  } catch (const BlowUp& e) {
    loop.finalize();
    loop.res.blew_up = true;
    loop.res.blowup_time = e.time();
    loop.res.blowup_message = e.what();
    loop.res.M = loop.res.Zd_T;
  } catch (const SingularDensity& e) {
    loop.finalize();
    loop.res.blew_up = true;
    loop.res.blowup_time = loop.comp.t;
    loop.res.blowup_message = e.what();
    loop.res.M = loop.res.Zd_T;
  }
  RunResult& r = loop.res;
  if (!r.completed && !r.blew_up) r.M = r.Zd_T;
  r.budget = compute_budget(r.initial, cfg.params, r.M, cfg.diagnostics.c_universal, cfg.diagnostics.kappa_threshold);
  if (opt.write_outputs) {
    const bool interrupted = !r.completed && !r.blew_up;
    if ((loop.checkpoints_enabled() || interrupted) && !r.blew_up)
      loop.write_checkpoint(r.completed ? "checkpoint_final" : "checkpoint_" + std::to_string(r.steps));
    write_run_outputs(r);
  }
  return std::move(loop.res);
}

}  // namespace bmhd
