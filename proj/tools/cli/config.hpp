#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fraclab/error.hpp"

namespace fraclab::cli {

using nlohmann::json;

/// Every knob of every subcommand. A JSON config file sets any subset of the
/// keys below; command-line flags override the file.
struct RunConfig {
  // geometry and grid
  std::string family = "koch";
  double lambda = 1.0 / 3.0;
  int d = 2;
  std::optional<int> depth;      // default: smallest depth with approx_error <= h/10
  int resolution = 256;
  std::optional<double> margin;  // default: 0 for koch, 0.25 for box families
  double delta = 0.5;
  std::uint64_t seed = 1;
  std::string out;               // JSONL record stream to append to
  std::string id;                // explicit record id

  // capacity
  std::optional<double> eps;     // physical collar width; default eps_h * h
  double eps_h = 4.0;
  double cg_tol = 1e-8;
  std::string average = "arithmetic";

  // hardy and collar
  std::vector<double> z;         // default: first vertex of the boundary realization
  double r = 0.2;
  double hardy_tol = 1e-8;
  double rho = 0.25;
  double tau_min_h = 8.0;
  double tau_max_h = 64.0;
  int tau_points = 8;

  // walk
  std::vector<double> start;     // default: center of the bounding box
  double horizon = 1.0;
  int trials = 1000;
  std::optional<double> absorb_eps;  // default 4h

  // dimension
  bool fit = false;
  double r_min_h = 4.0;
  double r_max_h = 64.0;
  int fit_points = 16;
  int ahlfors_centers = 0;

  // fractal exports
  std::string geometry_out;
  std::string field_out;
  std::string csv_out;

  // sweep
  std::string lambdas;           // "lo:hi:n"
  std::string deltas;            // "lo:hi:n"
  double trend_threshold = 0.85;

  // report
  std::string in;
  std::string svg_out;
  std::string csv_table;
};

namespace detail {

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

template <class T>
void take(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

}  // namespace detail

inline void apply_json(RunConfig& c, const json& j) {
  static const std::set<std::string> known{
      "family", "lambda", "d", "depth", "resolution", "margin", "delta", "seed", "out", "id",
      "eps", "eps_h", "cg_tol", "average", "z", "r", "hardy_tol", "rho", "tau_min_h", "tau_max_h",
      "tau_points", "start", "horizon", "trials", "absorb_eps", "fit", "r_min_h", "r_max_h", "fit_points",
      "ahlfors_centers", "geometry_out", "field_out", "csv_out", "lambdas", "deltas", "trend_threshold",
      "in", "svg_out", "csv_table"};
  if (!j.is_object()) fail(ErrorKind::ConfigError, "config root must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
  try {
    using detail::take;
    take(j, "family", c.family);
    take(j, "lambda", c.lambda);
    take(j, "d", c.d);
    take(j, "depth", c.depth);
    take(j, "resolution", c.resolution);
    take(j, "margin", c.margin);
    take(j, "delta", c.delta);
    take(j, "seed", c.seed);
    take(j, "out", c.out);
    take(j, "id", c.id);
    take(j, "eps", c.eps);
    take(j, "eps_h", c.eps_h);
    take(j, "cg_tol", c.cg_tol);
    take(j, "average", c.average);
    take(j, "z", c.z);
    take(j, "r", c.r);
    take(j, "hardy_tol", c.hardy_tol);
    take(j, "rho", c.rho);
    take(j, "tau_min_h", c.tau_min_h);
    take(j, "tau_max_h", c.tau_max_h);
    take(j, "tau_points", c.tau_points);
    take(j, "start", c.start);
    take(j, "horizon", c.horizon);
    take(j, "trials", c.trials);
    take(j, "absorb_eps", c.absorb_eps);
    take(j, "fit", c.fit);
    take(j, "r_min_h", c.r_min_h);
    take(j, "r_max_h", c.r_max_h);
    take(j, "fit_points", c.fit_points);
    take(j, "ahlfors_centers", c.ahlfors_centers);
    take(j, "geometry_out", c.geometry_out);
    take(j, "field_out", c.field_out);
    take(j, "csv_out", c.csv_out);
    take(j, "lambdas", c.lambdas);
    take(j, "deltas", c.deltas);
    take(j, "trend_threshold", c.trend_threshold);
    take(j, "in", c.in);
    take(j, "svg_out", c.svg_out);
    take(j, "csv_table", c.csv_table);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("config value has the wrong type: ") + e.what());
  }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open config file " + path);
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::ConfigError, "config file " + path + " is not valid JSON");
  apply_json(c, j);
}

/// "lo:hi:n" -> n evenly spaced values from lo to hi inclusive.
inline std::vector<double> parse_range(const std::string& text) {
  double lo = 0, hi = 0;
  int n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || !(is >> std::ws).eof())
    fail(ErrorKind::ConfigError, "range '" + text + "' must look like lo:hi:n");
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace fraclab::cli
