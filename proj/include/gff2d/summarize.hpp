#pragma once
// Post-processing: flattens a JSONL record file into CSV tables and fits
// log-log slopes across box sizes for every estimate series.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gff2d/errors.hpp"
#include "gff2d/records.hpp"
#include "gff2d/stats.hpp"

namespace gff2d {

namespace detail {

inline std::string csv_num(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
  return buf;
}

inline std::ofstream open_csv(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  return out;
}

}  // namespace detail

// One row per record, in input order. p_sqrtlog = p_hat sqrt(log N) is
// the scale on which near-critical arm probabilities are expected to
// flatten, precomputed here so plots need no arithmetic.
inline void write_estimates_csv(const std::vector<Json>& records,
                                const std::filesystem::path& path) {
  std::ofstream out = detail::open_csv(path);
  out << "experiment,subcommand,event,mode,h,N,kappa,seed,replicas,successes,"
         "p_hat,se,wilson_lo,wilson_hi,p_sqrtlog,value\n";
  for (const Json& j : records) {
    std::string p_sqrtlog;
    if (!j.at("p_hat").is_null() && !j.at("N").is_null()) {
      const double n = double(j.at("N").get<std::int64_t>());
      if (n > 1.0) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g",
                      j.at("p_hat").get<double>() * std::sqrt(std::log(n)));
        p_sqrtlog = buf;
      }
    }
    out << j.at("experiment").get<std::string>() << ','
        << j.at("subcommand").get<std::string>() << ','
        << j.at("event").get<std::string>() << ','
        << j.at("mode").get<std::string>() << ','
        << detail::csv_num(j.at("h")) << ',' << detail::csv_num(j.at("N"))
        << ',' << detail::csv_num(j.at("kappa")) << ','
        << j.at("seed").get<std::uint64_t>() << ','
        << detail::csv_num(j.at("replicas")) << ','
        << detail::csv_num(j.at("successes")) << ','
        << detail::csv_num(j.at("p_hat")) << ',' << detail::csv_num(j.at("se"))
        << ',' << detail::csv_num(j.at("wilson_lo")) << ','
        << detail::csv_num(j.at("wilson_hi")) << ',' << p_sqrtlog << ','
        << detail::csv_num(j.at("value")) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// Least-squares fit of log p_hat against log N within each
// (experiment, subcommand, event, mode, h, kappa) series. Zero-success
// cells carry no usable log value and are dropped; repeated N within a
// series keeps the last record, matching resume semantics.
inline void write_slopes_csv(const std::vector<Json>& records,
                             const std::filesystem::path& path) {
  struct Point {
    double p_hat, se;
  };
  struct Series {
    Json head;
    std::map<std::int64_t, Point> by_n;
  };
  std::vector<std::string> order;
  std::map<std::string, Series> groups;
  for (const Json& j : records) {
    if (j.at("p_hat").is_null() || j.at("N").is_null()) continue;
    const Json key_arr = {j.at("experiment"), j.at("subcommand"),
                          j.at("event"),      j.at("mode"),
                          j.at("h"),          j.at("kappa")};
    const std::string key = key_arr.dump();
    auto it = groups.find(key);
    if (it == groups.end()) {
      order.push_back(key);
      it = groups.emplace(key, Series{j, {}}).first;
    }
    if (j.at("successes").get<std::int64_t>() < 1) continue;
    it->second.by_n[j.at("N").get<std::int64_t>()] =
        Point{j.at("p_hat").get<double>(), j.at("se").get<double>()};
  }

  std::ofstream out = detail::open_csv(path);
  out << "experiment,subcommand,event,mode,h,kappa,npoints,slope,slope_se,"
         "intercept\n";
  for (const std::string& key : order) {
    const Series& s = groups.at(key);
    if (s.by_n.size() < 2) continue;
    std::vector<double> x, y, sigma;
    for (const auto& [n, pt] : s.by_n) {
      x.push_back(std::log(double(n)));
      y.push_back(std::log(pt.p_hat));
      sigma.push_back(pt.se > 0.0 ? pt.se / pt.p_hat : 0.0);
    }
    const LeastSquaresFit fit = least_squares(x, y, sigma);
    char slope[40], slope_se[40], intercept[40];
    std::snprintf(slope, sizeof slope, "%.17g", fit.slope);
    std::snprintf(slope_se, sizeof slope_se, "%.17g", fit.slope_se);
    std::snprintf(intercept, sizeof intercept, "%.17g", fit.intercept);
    out << s.head.at("experiment").get<std::string>() << ','
        << s.head.at("subcommand").get<std::string>() << ','
        << s.head.at("event").get<std::string>() << ','
        << s.head.at("mode").get<std::string>() << ','
        << detail::csv_num(s.head.at("h")) << ','
        << detail::csv_num(s.head.at("kappa")) << ',' << s.by_n.size() << ','
        << slope << ',' << slope_se << ',' << intercept << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

inline int run_summarize(const std::string& in_path,
                         const std::string& out_dir, std::ostream& log) {
  const std::vector<Json> records = load_records(in_path);
  if (records.empty()) {
    log << "summarize: no records in " << in_path
        << "; writing header-only tables\n";
  }
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
  write_estimates_csv(records, dir / "estimates.csv");
  write_slopes_csv(records, dir / "slopes.csv");
  log << "summarize: " << records.size() << " records -> "
      << (dir / "estimates.csv").string() << ", "
      << (dir / "slopes.csv").string() << "\n";
  return 0;
}

}  // namespace gff2d