#pragma once

// Series CSV, JSON helpers and gnuplot script emission.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmhd/diagnostics.hpp"
#include "bmhd/error.hpp"

namespace bmhd {

inline const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {"t",     "Xd",    "Yd",     "Yd1",    "Yd2",       "Zd",      "E_kin",
                                                "E_mag", "diss_U", "diss_B", "div_b_max", "min_rho", "dev_u", "dev_b"};
  return cols;
}

inline std::vector<double> record_values(const FunctionalRecord& r) {
  return {r.t,     r.Xd,     r.Yd,     r.Yd1,       r.Yd2,     r.Zd,    r.E_kin,
          r.E_mag, r.diss_U, r.diss_B, r.div_b_max, r.min_rho, r.dev_u, r.dev_b};
}

inline FunctionalRecord record_from_values(const std::vector<double>& v) {
  if (v.size() != series_columns().size()) throw IoError("series row has the wrong number of columns");
  FunctionalRecord r;
  r.t = v[0];
  r.Xd = v[1];
  r.Yd = v[2];
  r.Yd1 = v[3];
  r.Yd2 = v[4];
  r.Zd = v[5];
  r.E_kin = v[6];
  r.E_mag = v[7];
  r.diss_U = v[8];
  r.diss_B = v[9];
  r.div_b_max = v[10];
  r.min_rho = v[11];
  r.dev_u = v[12];
  r.dev_b = v[13];
  return r;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string series_csv(const FunctionalSeries& s) {
  std::string out;
  const auto& cols = series_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : s) {
    const auto v = record_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += format_double(v[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

inline FunctionalSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty series file");
  std::string expected;
  for (std::size_t i = 0; i < series_columns().size(); ++i) expected += (i ? "," : "") + series_columns()[i];
  if (line != expected) throw IoError(path.string() + ": unexpected header");
  FunctionalSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      v.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) throw IoError(path.string() + ": malformed number '" + cell + "'");
    }
    s.push_back(record_from_values(v));
  }
  return s;
}

/// JSON value of a double; non-finite values become strings.
inline nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double number_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
  }
  throw IoError("expected a number in report JSON");
}

inline std::string gnuplot_series_script(const std::string& csv = "series.csv") {
  std::ostringstream os;
  os << "# gnuplot -p functionals.gp\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead outside\n"
     << "set xlabel 't'\n"
     << "set terminal pngcairo size 1200,900\n"
     << "set output 'functionals.png'\n"
     << "set multiplot layout 2,2\n"
     << "set title 'functionals'\n"
     << "plot '" << csv << "' using 1:2 with lines, '' using 1:3 with lines, '' using 1:6 with lines\n"
     << "set title 'energies'\n"
     << "plot '" << csv << "' using 1:7 with lines, '' using 1:8 with lines, '' using 1:9 with lines, '' using 1:10 with lines\n"
     << "set title 'deviation'\n"
     << "set logscale y\n"
     << "plot '" << csv << "' using 1:13 with lines, '' using 1:14 with lines\n"
     << "unset logscale y\n"
     << "set title 'constraints'\n"
     << "plot '" << csv << "' using 1:11 with lines, '' using 1:12 with lines\n"
     << "unset multiplot\n";
  return os.str();
}

inline std::string gnuplot_sweep_script(const std::string& csv = "sweep.csv") {
  std::ostringstream os;
  os << "# gnuplot -p sweep.gp\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set logscale xy\n"
     << "set xlabel 'kappa'\n"
     << "set ylabel 'sup_t deviation'\n"
     << "set terminal pngcairo size 900,700\n"
     << "set output 'sweep.png'\n"
     << "plot '" << csv << "' using 1:2 with linespoints, '' using 1:3 with linespoints\n";
  return os.str();
}

}  // namespace bmhd
