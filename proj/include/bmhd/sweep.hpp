#pragma once

// kappa sweeps: one paired run per kappa, executed concurrently, followed by a
// log-log fit of the deviation against kappa and the budget table.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bmhd/config.hpp"
#include "bmhd/report.hpp"
#include "bmhd/run.hpp"

namespace bmhd {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log y = slope * log x + intercept.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_loglog: need at least two points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_loglog: x values must not all coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

/// Concurrency cap from BMHD_THREADS (unset or invalid: no cap).
inline int thread_cap(int requested) {
  int cap = requested;
  if (const char* env = std::getenv("BMHD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) cap = std::min<long>(cap, v);
  }
  return std::max(1, cap);
}

struct SweepMember {
  double kappa = 0.0;
  std::string directory;
  RunResult result;
  std::string error;  ///< non-empty if the run threw (I/O or configuration)
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepMember> members;
  LineFit fit_u, fit_b;
  bool fit_valid = false;
  bool partial = false;             ///< some member blew up or failed
  bool deviations_decreasing = false;
  bool delta0_decreasing = false;
  bool zd_within_M = false;
  double lyap_min = 0.0, lyap_max = 0.0;
  bool largest_kappa_checks = false;
};

inline RunConfig member_config(const SweepConfig& sc, std::size_t i) {
  RunConfig c = sc.base;
  const double kappa = sc.kappa_values[i];
  c.params.lambda = kappa - 2.0 * c.params.mu;
  char name[64];
  std::snprintf(name, sizeof name, "kappa_%02zu", i);
  c.outputs.directory = (std::filesystem::path(sc.directory) / name).string();
  return c;
}

inline nlohmann::json sweep_json(const SweepReport& r) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : r.members) {
    members.push_back({{"kappa", m.kappa},
                       {"directory", m.directory},
                       {"error", m.error},
                       {"blew_up", m.result.blew_up},
                       {"blowup_time", json_number(m.result.blowup_time)},
                       {"dev_u_sup", json_number(m.result.dev_u_sup)},
                       {"dev_b_sup", json_number(m.result.dev_b_sup)},
                       {"Zd_T", m.result.Zd_T},
                       {"M", m.result.M},
                       {"M_saturated", m.result.M_saturated},
                       {"budget", detail::budget_json(m.result.budget)},
                       {"lyapunov_min", json_number(m.result.lyap_min)},
                       {"lyapunov_max", json_number(m.result.lyap_max)},
                       {"energy_max_drift", json_number(m.result.energy_max_drift)},
                       {"max_rel_div_b", json_number(m.result.max_rel_div_b)},
                       {"max_mean_drift", json_number(m.result.max_mean_drift)},
                       {"min_dt_over_cfl", json_number(m.result.min_dt_over_cfl)}});
  }
  return {{"config", to_json(r.config)},
          {"members", members},
          {"fit_valid", r.fit_valid},
          {"slope_u", r.fit_u.slope},
          {"slope_b", r.fit_b.slope},
          {"r2_u", r.fit_u.r2},
          {"partial", r.partial},
          {"deviations_decreasing", r.deviations_decreasing},
          {"delta0_decreasing", r.delta0_decreasing},
          {"zd_within_M", r.zd_within_M},
          {"lyapunov_min", json_number(r.lyap_min)},
          {"lyapunov_max", json_number(r.lyap_max)},
          {"largest_kappa_checks", r.largest_kappa_checks}};
}

inline std::string sweep_csv(const SweepReport& r) {
  std::string out = "kappa,dev_u_sup,dev_b_sup,delta0,D0,kappa_check,delta_check,Zd_T,M\n";
  for (const auto& m : r.members) {
    const auto& b = m.result.budget;
    out += format_double(m.kappa) + "," + format_double(m.result.dev_u_sup) + "," +
           format_double(m.result.dev_b_sup) + "," + format_double(b.delta0) + "," + format_double(b.D0) + "," +
           (b.kappa_check ? "1" : "0") + "," + (b.delta_check ? "1" : "0") + "," + format_double(m.result.Zd_T) +
           "," + format_double(m.result.M) + "\n";
  }
  return out;
}

/// Runs every member (up to `parallelism` at once, capped by BMHD_THREADS) and aggregates.
inline SweepReport run_sweep(const SweepConfig& sc, bool write_outputs = true) {
  sc.validate();
  SweepReport rep;
  rep.config = sc;
  const std::size_t n = sc.kappa_values.size();
  rep.members.resize(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      SweepMember& m = rep.members[i];
      m.kappa = sc.kappa_values[i];
      const RunConfig c = member_config(sc, i);
      m.directory = c.outputs.directory;
      try {
        RunOptions o;
        o.write_outputs = write_outputs;
        m.result = run_single(c, o);
      } catch (const std::exception& e) {
        m.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(thread_cap(sc.parallelism), static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> ks, du, db;
  rep.partial = false;
  rep.zd_within_M = true;
  rep.lyap_min = std::numeric_limits<double>::infinity();
  rep.lyap_max = -std::numeric_limits<double>::infinity();
  for (const auto& m : rep.members) {
    if (!m.error.empty() || m.result.blew_up || !m.result.completed) {
      rep.partial = true;
      continue;
    }
    ks.push_back(m.kappa);
    du.push_back(m.result.dev_u_sup);
    db.push_back(m.result.dev_b_sup);
    rep.zd_within_M = rep.zd_within_M && m.result.Zd_T <= m.result.M;
    rep.lyap_min = std::min(rep.lyap_min, m.result.lyap_min);
    rep.lyap_max = std::max(rep.lyap_max, m.result.lyap_max);
  }
  rep.deviations_decreasing = !rep.partial;
  rep.delta0_decreasing = !rep.partial;
  for (std::size_t i = 1; i < rep.members.size() && !rep.partial; ++i) {
    const auto& a = rep.members[i - 1].result;
    const auto& b = rep.members[i].result;
    rep.deviations_decreasing = rep.deviations_decreasing && b.dev_u_sup < a.dev_u_sup;
    rep.delta0_decreasing = rep.delta0_decreasing && b.budget.log_delta0 < a.budget.log_delta0;
  }
  try {
    if (ks.size() >= 2) {
      rep.fit_u = fit_loglog(ks, du);
      rep.fit_b = fit_loglog(ks, db);
      rep.fit_valid = true;
    }
  } catch (const InvalidArgument&) {
    rep.fit_valid = false;
  }
  if (!rep.partial) rep.largest_kappa_checks = rep.members.back().result.budget.pass();

  if (write_outputs) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(sc.directory, ec);
    if (ec) throw IoError("cannot create directory " + sc.directory);
    write_text(fs::path(sc.directory) / "sweep_report.json", sweep_json(rep).dump(2) + "\n");
    write_text(fs::path(sc.directory) / "sweep.csv", sweep_csv(rep));
    write_text(fs::path(sc.directory) / "sweep.gp", gnuplot_sweep_script());
  }
  return rep;
}

}  // namespace bmhd
