#pragma once
// JSON Lines result records. Every record carries the same keys in the
// same order, so identical runs serialize to identical bytes; fields
// that do not apply hold null. Two shapes share the schema: estimate
// records fill successes/p_hat/se/wilson_*, derived-statistic records
// fill value (and reuse se for that statistic's standard error).
//
// A record is self-describing: the echoed config plus the top-level seed
// regenerate it exactly. Wall-clock timing goes to stderr, never into
// records, because records must not depend on the machine.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gff2d/errors.hpp"
#include "gff2d/stats.hpp"
#include "json.hpp"

namespace gff2d {

inline constexpr const char* kArtifactVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct RecordFields {
  std::string experiment;
  std::string subcommand;
  std::string event;
  std::optional<std::int64_t> N;
  std::optional<double> h;
  std::string mode;  // adjacency the event was evaluated under
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::int64_t replicas = 0;
  std::optional<std::int64_t> successes;
  std::optional<double> value;
  std::optional<double> value_se;
  Json extra = Json::object();
  Json config = Json::object();
};

inline Json record_json(const RecordFields& f) {
  Json j;
  j["version"] = kArtifactVersion;
  j["experiment"] = f.experiment;
  j["subcommand"] = f.subcommand;
  j["event"] = f.event;
  j["N"] = f.N ? Json(*f.N) : Json(nullptr);
  j["h"] = f.h ? Json(*f.h) : Json(nullptr);
  j["mode"] = f.mode;
  j["kappa"] = f.kappa;
  j["seed"] = f.seed;
  j["replicas"] = f.replicas;
  if (f.successes) {
    const std::int64_t s = *f.successes;
    const double p = f.replicas > 0 ? double(s) / double(f.replicas) : 0.0;
    const auto ci = wilson_interval(std::uint64_t(s), std::uint64_t(f.replicas));
    j["successes"] = s;
    j["p_hat"] = p;
    j["se"] = binomial_se(p, std::uint64_t(f.replicas));
    j["wilson_lo"] = ci.lo;
    j["wilson_hi"] = ci.hi;
  } else {
    j["successes"] = nullptr;
    j["p_hat"] = nullptr;
    j["se"] = f.value_se ? Json(*f.value_se) : Json(nullptr);
    j["wilson_lo"] = nullptr;
    j["wilson_hi"] = nullptr;
  }
  j["value"] = f.value ? Json(*f.value) : Json(nullptr);
  j["extra"] = f.extra;
  j["config"] = f.config;
  return j;
}

// The fields that make a record unique within an output file; resuming a
// run skips cells whose identities are already present.
inline std::string record_identity(const Json& j) {
  Json key = Json::array();
  for (const char* k :
       {"experiment", "subcommand", "event", "N", "h", "mode", "kappa", "seed",
        "replicas"})
    key.push_back(j.at(k));
  return key.dump();
}

inline Json parse_record_line(const std::string& line, const std::string& path,
                              std::int64_t lineno) {
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw IoError(path + ":" + std::to_string(lineno) +
                  ": malformed record line");
  for (const char* k :
       {"version", "experiment", "subcommand", "event", "N", "h", "mode",
        "kappa", "seed", "replicas", "successes", "p_hat", "se", "wilson_lo",
        "wilson_hi", "value", "extra", "config"})
    if (!j.contains(k))
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": record missing key '" + std::string(k) + "'");
  return j;
}

// Reads every record in a JSONL file. A malformed final line without a
// trailing newline is an interrupted append: it is dropped and the file
// rewritten without it. Malformed lines anywhere else are refused.
inline std::vector<Json> load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("records: cannot open " + path);
  std::vector<Json> out;
  std::string line;
  std::int64_t lineno = 0;
  bool dropped_tail = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const bool at_eof = in.peek() == std::ifstream::traits_type::eof();
    try {
      out.push_back(parse_record_line(line, path, lineno));
    } catch (const IoError&) {
      if (!at_eof) throw;
      dropped_tail = true;  // torn write from an interrupted run
    }
  }
  if (in.bad()) throw IoError("records: read failed on " + path);
  if (dropped_tail) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream rw(tmp, std::ios::binary | std::ios::trunc);
      if (!rw) throw IoError("records: cannot rewrite " + path);
      for (const Json& j : out) rw << j.dump() << '\n';
      rw.flush();
      if (!rw) throw IoError("records: rewrite failed for " + path);
    }
    std::filesystem::rename(tmp, path);
  }
  return out;
}

// Append-mode writer: one line per record, flushed eagerly so a crash
// can tear at most the final line. The file opens on the first append,
// so a run that fails config validation leaves no empty artifact.
class RecordWriter {
 public:
  // Empty path means stdout.
  explicit RecordWriter(const std::string& path) : path_(path) {
    if (path_.empty()) return;
    if (std::filesystem::exists(path_))
      for (const Json& j : load_records(path_))
        existing_.insert(record_identity(j));
  }

  bool already_written(const Json& j) const {
    return existing_.count(record_identity(j)) != 0;
  }

  // Skips records whose identity is already in the file. Returns whether
  // the record was actually appended.
  bool write(const Json& j) {
    const std::string id = record_identity(j);
    if (existing_.count(id)) return false;
    existing_.insert(id);
    if (path_.empty()) {
      std::fputs((j.dump() + '\n').c_str(), stdout);
      std::fflush(stdout);
      return true;
    }
    if (!file_.is_open()) {
      const auto parent = std::filesystem::path(path_).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      file_.open(path_, std::ios::binary | std::ios::app);
      if (!file_) throw IoError("records: cannot open for append: " + path_);
    }
    file_ << j.dump() << '\n';
    file_.flush();
    if (!file_) throw IoError("records: write failed for " + path_);
    return true;
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::set<std::string> existing_;
};

}  // namespace gff2d