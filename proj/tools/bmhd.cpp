// Command-line front end: property suite, single runs, kappa sweeps, reports.
//
// Exit codes: 0 success, 1 failed property check, 2 configuration error,
// 3 blow-up, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmhd/config.hpp"
#include "bmhd/properties.hpp"
#include "bmhd/report.hpp"
#include "bmhd/run.hpp"
#include "bmhd/sweep.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kBlowUp = 3, kIo = 4 };

int cmd_check_lp(double fault_scale, std::uint64_t seed, const std::string& json_out) {
  bmhd::PropertyOptions opt;
  opt.fault_scale = fault_scale;
  opt.seed = seed;
  const auto results = bmhd::run_property_suite(opt);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) {
    if (r.relation == "in")
      std::printf("%s  %-45s [%.6g, %.6g] in [%.6g, %.6g]\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value,
                  r.value_hi, r.threshold, r.upper);
    else
      std::printf("%s  %-45s %.6g <= %.6g\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value, r.threshold);
    j.push_back({{"name", r.name},
                 {"value", r.value},
                 {"value_hi", r.value_hi},
                 {"relation", r.relation},
                 {"threshold", r.threshold},
                 {"upper", r.upper},
                 {"pass", r.pass}});
  }
  if (!json_out.empty()) bmhd::write_text(json_out, j.dump(2) + "\n");
  const bool ok = bmhd::all_pass(results);
  std::printf("%s\n", ok ? "all properties pass" : "property suite FAILED");
  return ok ? kOk : kCheckFailed;
}

int cmd_run(const std::string& path, const std::string& resume, long max_steps) {
  const bmhd::RunConfig cfg = bmhd::load_config(path);
  bmhd::RunOptions opt;
  opt.resume_from = resume;
  opt.max_steps = max_steps;
  const bmhd::RunResult r = bmhd::run_single(cfg, opt);
  std::printf("steps %ld  t %.6g  Zd %.6g  M %.6g%s  dev_u %.6g  dev_b %.6g  energy drift %.3g\n", r.steps,
              r.t_final, r.Zd_T, r.M, r.M_saturated ? "" : " (not saturated)", r.dev_u_sup, r.dev_b_sup,
              r.energy_max_drift);
  std::printf("budget: D0/kappa = %.4g (%s), delta0 factor = %.4g (%s)\n", r.budget.kappa_check_value,
              r.budget.kappa_check ? "pass" : "fail", r.budget.delta_check_value,
              r.budget.delta_check ? "pass" : "fail");
  std::printf("outputs in %s\n", cfg.outputs.directory.c_str());
  if (r.blew_up) {
    std::fprintf(stderr, "blow-up at t = %.9g: %s\n", r.blowup_time, r.blowup_message.c_str());
    return kBlowUp;
  }
  return kOk;
}

int cmd_sweep(const std::string& path) {
  const bmhd::SweepConfig sc = bmhd::load_sweep_config(path);
  const bmhd::SweepReport r = bmhd::run_sweep(sc);
  std::printf("%12s %14s %14s %12s %8s %8s\n", "kappa", "sup|u-U|", "sup|b-B|", "log delta0", "D0/k", "delta");
  for (const auto& m : r.members) {
    if (!m.error.empty()) {
      std::printf("%12.4g  error: %s\n", m.kappa, m.error.c_str());
      continue;
    }
    std::printf("%12.4g %14.6g %14.6g %12.4g %8s %8s%s\n", m.kappa, m.result.dev_u_sup, m.result.dev_b_sup,
                m.result.budget.log_delta0, m.result.budget.kappa_check ? "pass" : "fail",
                m.result.budget.delta_check ? "pass" : "fail", m.result.blew_up ? "  BLOW-UP" : "");
  }
  if (r.fit_valid) std::printf("log-log slope: u %.4f  b %.4f\n", r.fit_u.slope, r.fit_b.slope);
  std::printf("report in %s\n", sc.directory.c_str());
  if (r.partial) {
    std::fprintf(stderr, "sweep incomplete: at least one member failed\n");
    for (const auto& m : r.members)
      if (!m.error.empty()) return kIo;
    return kBlowUp;
  }
  return kOk;
}

int cmd_report(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path d = dir;
  if (fs::exists(d / "sweep_report.json")) {
    const auto j = nlohmann::json::parse(bmhd::detail::read_text((d / "sweep_report.json").string()));
    std::printf("%12s %14s %14s\n", "kappa", "sup|u-U|", "sup|b-B|");
    for (const auto& m : j.at("members"))
      std::printf("%12.4g %14.6g %14.6g\n", m.at("kappa").get<double>(), bmhd::number_from_json(m.at("dev_u_sup")),
                  bmhd::number_from_json(m.at("dev_b_sup")));
    std::printf("slope u %.4f  b %.4f  partial %s\n", j.at("slope_u").get<double>(), j.at("slope_b").get<double>(),
                j.at("partial").get<bool>() ? "yes" : "no");
    bmhd::write_text(d / "sweep.gp", bmhd::gnuplot_sweep_script());
    std::printf("wrote %s\n", (d / "sweep.gp").string().c_str());
    return kOk;
  }
  if (!fs::exists(d / "series.csv")) throw bmhd::IoError("no series.csv or sweep_report.json in " + dir);
  const auto series = bmhd::read_series_csv(d / "series.csv");
  if (series.empty()) throw bmhd::IoError(dir + "/series.csv has no rows");
  const auto& last = series.back();
  std::printf("samples %zu  t %.6g\n", series.size(), last.t);
  std::printf("Xd %.6g  Yd %.6g (Yd1 %.6g, Yd2 %.6g)  Zd %.6g\n", last.Xd, last.Yd, last.Yd1, last.Yd2, last.Zd);
  std::printf("E_kin %.6g  E_mag %.6g  dev_u %.6g  dev_b %.6g\n", last.E_kin, last.E_mag, last.dev_u, last.dev_b);
  if (fs::exists(d / "report.json")) {
    const auto j = nlohmann::json::parse(bmhd::detail::read_text((d / "report.json").string()));
    std::printf("M %.6g  energy drift %.3g  blew_up %s\n", j.at("M").get<double>(),
                bmhd::number_from_json(j.at("energy_max_drift")), j.at("blew_up").get<bool>() ? "yes" : "no");
  }
  bmhd::write_text(d / "functionals.gp", bmhd::gnuplot_series_script());
  std::printf("wrote %s\n", (d / "functionals.gp").string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barotropic compressible MHD: incompressible-limit simulator and Besov diagnostics"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 property failure, 2 configuration error, 3 blow-up, 4 I/O error.\n"
             "BMHD_THREADS caps the number of concurrent sweep members.\n\n" +
             bmhd::config_defaults_help());

  double fault = 1.0;
  std::uint64_t seed = 20240601;
  std::string json_out;
  auto* check = app.add_subcommand("check-lp", "Run the property suite (Littlewood-Paley, projectors, RHS, propagator)");
  check->add_option("--fault-scale", fault, "Multiply phi by this factor (fault injection)");
  check->add_option("--seed", seed, "Seed for the random fields");
  check->add_option("--json", json_out, "Also write the results to this JSON file");

  std::string config, resume, dir;
  long max_steps = -1;
  auto* run = app.add_subcommand("run", "Run the compressible and incompressible solvers side by side");
  run->add_option("--config", config, "Run configuration (JSON)")->required();
  run->add_option("--resume", resume, "Resume from a checkpoint written by an earlier run");
  run->add_option("--max-steps", max_steps, "Stop after this many steps and write a checkpoint");

  auto* sweep = app.add_subcommand("sweep", "Run a kappa sweep");
  sweep->add_option("--config", config, "Sweep configuration (JSON)")->required();

  auto* report = app.add_subcommand("report", "Summarize a run or sweep directory and write gnuplot scripts");
  report->add_option("--dir", dir, "Run or sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*check) return cmd_check_lp(fault, seed, json_out);
    if (*run) return cmd_run(config, resume, max_steps);
    if (*sweep) return cmd_sweep(config);
    if (*report) return cmd_report(dir);
  } catch (const bmhd::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const bmhd::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const bmhd::BlowUp& e) {
    std::fprintf(stderr, "blow-up at t = %.9g: %s\n", e.time(), e.what());
    return kBlowUp;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "I/O error: malformed JSON: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
  return kOk;
}
