#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/error.hpp"
#include "fraclab/simsys.hpp"
#include "fraclab/version.hpp"

namespace fraclab::cli {

using nlohmann::json;

/// One experiment outcome; a line of the JSONL record stream.
struct ExperimentRecord {
  std::string id;
  std::string operation;
  std::string family;
  double lambda = 0.0;
  int depth = 0;
  int d = 2;
  double s = 0.0;
  std::optional<double> delta;
  double delta_c = 0.0;
  int resolution = 0;
  std::map<std::string, double> outputs;
  std::map<std::string, double> tolerances;
  std::string verdict;  // empty unless the operation classifies a trend
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::string version = kVersion;

  bool operator==(const ExperimentRecord&) const = default;
};

inline json to_json(const ExperimentRecord& r) {
  json j;
  j["id"] = r.id;
  j["operation"] = r.operation;
  j["family"] = r.family;
  j["lambda"] = r.lambda;
  j["depth"] = r.depth;
  j["d"] = r.d;
  j["s"] = r.s;
  j["delta"] = r.delta ? json(*r.delta) : json(nullptr);
  j["delta_c"] = r.delta_c;
  j["resolution"] = r.resolution;
  j["outputs"] = r.outputs;
  j["tolerances"] = r.tolerances;
  j["verdict"] = r.verdict;
  j["seed"] = r.seed;
  j["wall_time"] = r.wall_time;
  j["version"] = r.version;
  return j;
}

/// s and delta_c of a named family, as stored in every record.
inline std::pair<double, double> family_exponents(const std::string& family, double lambda, int d) {
  const double s = similarity_dimension(family_system(family_from_string(family), lambda, d));
  return {s, critical_delta(s, d)};
}

/// Parses one record and re-derives s and delta_c; a mismatch beyond 1e-9
/// means the stream came from different code or was edited.
inline ExperimentRecord from_json(const json& j) {
  ExperimentRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.operation = j.at("operation").get<std::string>();
    r.family = j.at("family").get<std::string>();
    r.lambda = j.at("lambda").get<double>();
    r.depth = j.at("depth").get<int>();
    r.d = j.at("d").get<int>();
    r.s = j.at("s").get<double>();
    if (!j.at("delta").is_null()) r.delta = j.at("delta").get<double>();
    r.delta_c = j.at("delta_c").get<double>();
    r.resolution = j.at("resolution").get<int>();
    r.outputs = j.at("outputs").get<std::map<std::string, double>>();
    r.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    r.verdict = j.at("verdict").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time = j.at("wall_time").get<double>();
    r.version = j.at("version").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("malformed record: ") + e.what());
  }
  if (r.version.empty()) fail(ErrorKind::ConfigError, "record " + r.id + " carries no version tag");
  const auto [s, dc] = family_exponents(r.family, r.lambda, r.d);
  if (std::abs(s - r.s) > 1e-9 || std::abs(dc - r.delta_c) > 1e-9)
    fail(ErrorKind::ConfigError, "record " + r.id + ": stored s or delta_c disagrees with the recomputed value");
  return r;
}

/// Reads a record stream. A trailing partial line (interrupted write) is
/// dropped, and when `repair` is set the file is truncated to the last
/// complete record so later appends stay well-formed.
inline std::vector<ExperimentRecord> read_records(const std::string& path, bool repair = false) {
  std::vector<ExperimentRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open record stream " + path);
  std::string line;
  std::streamoff good_end = 0;
  bool torn = false;
  while (std::getline(in, line)) {
    const bool complete = !in.eof();
    if (line.empty()) {
      good_end = in.tellg();
      continue;
    }
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !complete) {
      if (!complete) {
        torn = true;
        break;
      }
      fail(ErrorKind::ConfigError, "unparseable record line in " + path);
    }
    out.push_back(from_json(j));
    good_end = in.tellg();
  }
  in.close();
  if (torn && repair) std::filesystem::resize_file(path, static_cast<std::uintmax_t>(good_end));
  return out;
}

inline void append_record(std::ostream& os, const ExperimentRecord& r) {
  os << to_json(r).dump() << '\n';
  os.flush();
}

}  // namespace fraclab::cli
