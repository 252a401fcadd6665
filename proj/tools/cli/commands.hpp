#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "fraclab/fraclab.hpp"

#include "cli/config.hpp"
#include "cli/record.hpp"
#include "cli/report.hpp"

namespace fraclab::cli {

// ---------------------------------------------------------------------------
// Shared setup

/// Per-experiment seed: FNV-1a of the id mixed with the top-level seed.
inline std::uint64_t derive_seed(std::uint64_t top, const std::string& id) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return trial_seed(top, h);
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline bool box_family(const std::string& family) { return family_from_string(family) != Family::Koch; }

inline double default_margin(const RunConfig& c) { return c.margin.value_or(box_family(c.family) ? 0.25 : 0.0); }

template <class F>
decltype(auto) with_dim(int d, F&& f) {
  switch (d) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    default: fail(ErrorKind::ConfigError, "d must be 1, 2 or 3 for grid operations");
  }
}

template <int Dim>
BoundaryGeometry<Dim> make_geometry(const RunConfig& c, int depth) {
  switch (family_from_string(c.family)) {
    case Family::Koch:
      if constexpr (Dim == 2) return koch_snowflake(c.lambda, depth);
      fail(ErrorKind::ConfigError, "the Koch family lives in d = 2");
    case Family::Vicsek:
      if constexpr (Dim == 2 || Dim == 3) return vicsek<Dim>(c.lambda, depth);
      fail(ErrorKind::ConfigError, "Vicsek realizations exist for d = 2 and d = 3");
    case Family::CantorDust: return cantor_dust<Dim>(c.lambda, depth);
    case Family::Custom: break;
  }
  fail(ErrorKind::ConfigError, "custom families cannot be built from a config");
}

template <int Dim>
struct Setup {
  BoundaryGeometry<Dim> geom;
  DistanceField<Dim> df;
};

/// Depth from the config, or the smallest depth resolving the grid. The
/// spacing estimate uses the depth-0 bounds, which never exceed the final
/// bounds, so the chosen depth is conservative.
template <int Dim>
int choose_depth(const RunConfig& c, int resolution) {
  if (c.depth) return *c.depth;
  const auto b = make_geometry<Dim>(c, 0).bounds();
  double extent = 0.0;
  for (int k = 0; k < Dim; ++k) extent = std::max(extent, b.hi[k] - b.lo[k] + 2.0 * default_margin(c));
  return depth_for_spacing(family_from_string(c.family), c.lambda, Dim, extent / resolution);
}

template <int Dim>
Setup<Dim> prepare(const RunConfig& c, int resolution) {
  Setup<Dim> s;
  s.geom = make_geometry<Dim>(c, choose_depth<Dim>(c, resolution));
  s.df = distance_field(s.geom, build_grid(s.geom, resolution, default_margin(c)));
  return s;
}

inline EdgeAverage parse_average(const std::string& a) {
  if (a == "arithmetic") return EdgeAverage::Arithmetic;
  if (a == "harmonic") return EdgeAverage::Harmonic;
  fail(ErrorKind::ConfigError, "average must be 'arithmetic' or 'harmonic'");
}

template <int Dim>
Vec<Dim> to_point(const std::vector<double>& v, const char* what) {
  if (v.size() != Dim) fail(ErrorKind::ConfigError, std::string(what) + " must have d coordinates");
  Vec<Dim> p{};
  for (int k = 0; k < Dim; ++k) p[k] = v[static_cast<std::size_t>(k)];
  return p;
}

template <int Dim>
Vec<Dim> first_vertex(const BoundaryGeometry<Dim>& g) {
  if (!g.segments.empty()) return g.segments.front().a;
  return g.boxes.front().lo;
}

inline ExperimentRecord base_record(const RunConfig& c, const std::string& op, int depth, int resolution,
                                    std::optional<double> delta) {
  ExperimentRecord r;
  r.operation = op;
  r.family = std::string(to_string(family_from_string(c.family)));
  r.lambda = c.lambda;
  r.depth = depth;
  r.d = c.d;
  std::tie(r.s, r.delta_c) = family_exponents(r.family, c.lambda, c.d);
  r.delta = delta;
  r.resolution = resolution;
  r.id = !c.id.empty() ? c.id
                       : r.family + "-d" + std::to_string(c.d) + "-lam" + fmt(c.lambda) +
                             (delta ? "-delta" + fmt(*delta) : std::string()) +
                             (resolution > 0 ? "-n" + std::to_string(resolution) : std::string()) + "-" + op;
  r.seed = derive_seed(c.seed, r.id);
  return r;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// Operations

inline ExperimentRecord op_dimension(const RunConfig& c) {
  Stopwatch clock;
  const bool grid = c.fit || c.ahlfors_centers > 0;
  auto r = base_record(c, "dimension", 0, grid && c.fit ? c.resolution : 0, std::nullopt);
  r.outputs["s"] = r.s;
  r.outputs["delta_c"] = r.delta_c;
  if (grid) {
    with_dim(c.d, [&](auto dim) {
      constexpr int Dim = decltype(dim)::value;
      const int depth = choose_depth<Dim>(c, c.resolution);
      const auto geom = make_geometry<Dim>(c, depth);
      r.depth = depth;
      if (c.fit) {
        const auto df = distance_field(geom, build_grid(geom, c.resolution, default_margin(c)));
        const double h = df.grid.h;
        const auto fit = minkowski_dimension(df, c.r_min_h * h, c.r_max_h * h, c.fit_points);
        r.outputs["minkowski"] = fit.exponent;
        r.outputs["volume_slope"] = fit.slope;
        r.outputs["fit_residual"] = fit.residual;
        r.tolerances["r_min"] = fit.r_range.first;
        r.tolerances["r_max"] = fit.r_range.second;
      }
      if (c.ahlfors_centers > 0) {
        const auto b = ahlfors_check(geom, r.s, c.ahlfors_centers, {0.01, 0.2}, r.seed);
        r.outputs["ahlfors_lo"] = b.c_lo;
        r.outputs["ahlfors_hi"] = b.c_hi;
        r.outputs["ahlfors_ratio"] = b.ratio();
      }
    });
  }
  r.wall_time = clock.seconds();
  return r;
}

inline ExperimentRecord op_fractal(const RunConfig& c) {
  Stopwatch clock;
  return with_dim(c.d, [&](auto dim) {
    constexpr int Dim = decltype(dim)::value;
    const auto s = prepare<Dim>(c, c.resolution);
    auto r = base_record(c, "fractal", s.geom.depth, c.resolution, std::nullopt);
    r.outputs["primitives"] = static_cast<double>(s.geom.size());
    r.outputs["approx_error"] = s.geom.approx_error;
    r.outputs["h"] = s.df.grid.h;
    r.outputs["masked_cells"] = static_cast<double>(s.df.grid.masked_count());
    r.outputs["masked_volume"] = s.df.grid.masked_count() * s.df.grid.cell_volume();
    auto open = [](const std::string& path, std::ios::openmode mode) {
      std::ofstream f(path, mode);
      if (!f) fail(ErrorKind::IoError, "cannot write " + path);
      return f;
    };
    if (!c.geometry_out.empty()) {
      auto f = open(c.geometry_out, std::ios::out);
      write_geometry(f, s.geom);
    }
    if (!c.field_out.empty()) {
      auto f = open(c.field_out, std::ios::out | std::ios::binary);
      write_distance_binary(f, s.df);
    }
    if (!c.csv_out.empty()) {
      auto f = open(c.csv_out, std::ios::out);
      write_distance_csv(f, s.df);
    }
    r.wall_time = clock.seconds();
    return r;
  });
}

inline ExperimentRecord op_capacity(const RunConfig& c) {
  Stopwatch clock;
  return with_dim(c.d, [&](auto dim) {
    constexpr int Dim = decltype(dim)::value;
    const auto s = prepare<Dim>(c, c.resolution);
    auto r = base_record(c, "capacity", s.geom.depth, c.resolution, c.delta);
    const double eps = c.eps.value_or(c.eps_h * s.df.grid.h);
    SolverOptions opt;
    opt.average = parse_average(c.average);
    const auto cap = capacity_relaxed(s.df, c.delta, s.df, eps, c.cg_tol, opt);
    r.outputs["capacity"] = cap.value;
    r.outputs["eps"] = eps;
    r.outputs["solver_iters"] = cap.solver_iters;
    r.outputs["residual"] = cap.residual;
    r.outputs["psi_min"] = cap.psi_min;
    r.outputs["psi_max"] = cap.psi_max;
    r.outputs["collar_cells"] = static_cast<double>(cap.collar_cells);
    r.tolerances["cg_tol"] = c.cg_tol;
    r.wall_time = clock.seconds();
    return r;
  });
}

inline ExperimentRecord op_hardy(const RunConfig& c) {
  Stopwatch clock;
  return with_dim(c.d, [&](auto dim) {
    constexpr int Dim = decltype(dim)::value;
    const auto s = prepare<Dim>(c, c.resolution);
    auto r = base_record(c, "hardy", s.geom.depth, c.resolution, c.delta);
    const auto z = c.z.empty() ? first_vertex(s.geom) : to_point<Dim>(c.z, "z");
    SolverOptions opt;
    opt.average = parse_average(c.average);
    const auto res = hardy_quotient<Dim>(s.df, c.delta, z, c.r, c.hardy_tol, opt);
    r.outputs["hardy_quotient"] = res.value;
    r.outputs["outer_iters"] = res.outer_iters;
    r.outputs["inner_iters"] = res.inner_iters;
    r.outputs["support_cells"] = static_cast<double>(res.support_cells);
    r.tolerances["hardy_tol"] = c.hardy_tol;
    r.wall_time = clock.seconds();
    return r;
  });
}

inline ExperimentRecord op_collar(const RunConfig& c) {
  Stopwatch clock;
  return with_dim(c.d, [&](auto dim) {
    constexpr int Dim = decltype(dim)::value;
    const auto s = prepare<Dim>(c, c.resolution);
    auto r = base_record(c, "collar", s.geom.depth, c.resolution, c.delta);
    const auto z = c.z.empty() ? first_vertex(s.geom) : to_point<Dim>(c.z, "z");
    const double h = s.df.grid.h;
    const auto taus = geometric_points(c.tau_min_h * h, c.tau_max_h * h, c.tau_points);
    std::vector<double> trunc, collar;
    for (double t : taus) {
      trunc.push_back(truncated_integral<Dim>(s.df, c.delta, z, c.rho, t));
      collar.push_back(collar_integral<Dim>(s.df, c.delta, z, c.rho, t));
    }
    r.outputs["truncated_slope"] = loglog_fit(taus, trunc).slope;
    r.outputs["collar_slope"] = loglog_fit(taus, collar).slope;
    r.outputs["truncated_at_tau_min"] = trunc.front();
    r.outputs["collar_at_tau_max"] = collar.back();
    r.outputs["predicted_slope"] = -(2.0 + r.s - c.d - c.delta);
    r.tolerances["tau_min"] = taus.front();
    r.tolerances["tau_max"] = taus.back();
    r.wall_time = clock.seconds();
    return r;
  });
}

/// Nearest cell in Omega at distance >= eps from Gamma.
template <int Dim>
std::size_t nearest_free_cell(const DistanceField<Dim>& df, const std::type_identity_t<Vec<Dim>>& p, double eps) {
  std::size_t best = df.size();
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < df.size(); ++i) {
    if (!df.grid.mask[i] || df.values[i] < eps) continue;
    const double d2 = dist2<Dim>(df.grid.center(i), p);
    if (d2 < bd) {
      bd = d2;
      best = i;
    }
  }
  if (best == df.size()) fail(ErrorKind::EmptyRegion, "no cell of Omega lies outside the absorbing collar");
  return best;
}

inline ExperimentRecord op_walk(const RunConfig& c) {
  Stopwatch clock;
  return with_dim(c.d, [&](auto dim) {
    constexpr int Dim = decltype(dim)::value;
    const auto s = prepare<Dim>(c, c.resolution);
    auto r = base_record(c, "walk", s.geom.depth, c.resolution, c.delta);
    const double eps = c.absorb_eps.value_or(4.0 * s.df.grid.h);
    Vec<Dim> p{};
    if (c.start.empty()) {
      const auto b = s.geom.bounds();
      for (int k = 0; k < Dim; ++k) p[k] = 0.5 * (b.lo[k] + b.hi[k]);
    } else {
      p = to_point<Dim>(c.start, "start");
    }
    WalkConfig w;
    w.start = nearest_free_cell<Dim>(s.df, p, eps);
    w.horizon = c.horizon;
    w.trials = c.trials;
    w.seed = r.seed;
    w.absorb_eps = eps;
    const auto res = walk_absorption(assemble_form(s.df, c.delta, parse_average(c.average)), s.df, w);
    r.outputs["p_hat"] = res.p_hat;
    r.outputs["std_error"] = res.std_error;
    r.outputs["hits"] = static_cast<double>(res.hits);
    r.outputs["jumps"] = static_cast<double>(res.jumps);
    r.outputs["clamp_events"] = static_cast<double>(res.clamp_events);
    r.outputs["absorb_eps"] = eps;
    r.outputs["horizon"] = c.horizon;
    r.outputs["trials"] = c.trials;
    r.wall_time = clock.seconds();
    return r;
  });
}

/// Capacity at resolution/2 and resolution for one (lambda, delta) cell.
/// trend_ratio = fine / coarse; the verdict is "vanishing" when the ratio
/// drops below the threshold, "positive" otherwise.
inline ExperimentRecord op_capacity_trend(const RunConfig& c) {
  Stopwatch clock;
  require(c.resolution >= 16, "sweep resolution must be at least 16");
  return with_dim(c.d, [&](auto dim) {
    constexpr int Dim = decltype(dim)::value;
    const auto coarse = prepare<Dim>(c, c.resolution / 2);
    const auto fine = prepare<Dim>(c, c.resolution);
    auto r = base_record(c, "capacity_trend", fine.geom.depth, c.resolution, c.delta);
    SolverOptions opt;
    opt.average = parse_average(c.average);
    const double eps_c = c.eps.value_or(c.eps_h * coarse.df.grid.h);
    const double eps_f = c.eps.value_or(c.eps_h * fine.df.grid.h);
    const auto a = capacity_relaxed(coarse.df, c.delta, coarse.df, eps_c, c.cg_tol, opt);
    const auto b = capacity_relaxed(fine.df, c.delta, fine.df, eps_f, c.cg_tol, opt);
    r.outputs["capacity_coarse"] = a.value;
    r.outputs["capacity_fine"] = b.value;
    r.outputs["eps_coarse"] = eps_c;
    r.outputs["eps_fine"] = eps_f;
    r.outputs["trend_ratio"] = b.value / a.value;
    r.verdict = b.value / a.value < c.trend_threshold ? "vanishing" : "positive";
    r.tolerances["cg_tol"] = c.cg_tol;
    r.tolerances["trend_threshold"] = c.trend_threshold;
    r.wall_time = clock.seconds();
    return r;
  });
}

// ---------------------------------------------------------------------------
// Record emission

inline void emit(const RunConfig& c, const ExperimentRecord& r, std::ostream& out) {
  append_record(out, r);
  if (!c.out.empty()) {
    std::ofstream f(c.out, std::ios::app);
    if (!f) fail(ErrorKind::IoError, "cannot append to " + c.out);
    append_record(f, r);
  }
}

/// Runs every (lambda, delta) cell not already present in the output stream.
/// Cells run in parallel; a single writer appends finished records in cell
/// order, so an interrupted sweep leaves a prefix and a rerun completes it.
inline std::size_t run_sweep(const RunConfig& base, std::ostream& log) {
  if (base.lambdas.empty() || base.deltas.empty())
    fail(ErrorKind::ConfigError, "sweep needs both lambdas and deltas");
  if (base.out.empty()) fail(ErrorKind::ConfigError, "sweep needs an output stream (--out)");
  if (!base.id.empty()) fail(ErrorKind::ConfigError, "sweep ids are derived per cell; drop --id");
  const auto lambdas = parse_range(base.lambdas), deltas = parse_range(base.deltas);

  std::vector<RunConfig> cells;
  for (double lam : lambdas)
    for (double del : deltas) {
      RunConfig c = base;
      c.lambda = lam;
      c.delta = del;
      cells.push_back(c);
    }
  for (const auto& c : cells) family_exponents(c.family, c.lambda, c.d);  // validate before any work

  std::set<std::string> done;
  if (std::filesystem::exists(base.out))
    for (const auto& r : read_records(base.out, true)) done.insert(r.id);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!done.count(base_record(cells[i], "capacity_trend", 0, cells[i].resolution, cells[i].delta).id))
      todo.push_back(i);
  log << "sweep: " << cells.size() << " cells, " << todo.size() << " to run\n";

  std::ofstream file(base.out, std::ios::app);
  if (!file) fail(ErrorKind::IoError, "cannot append to " + base.out);
  std::vector<std::optional<ExperimentRecord>> results(todo.size());
  std::size_t next_write = 0;
  std::mutex mu;
  std::atomic<std::size_t> next_job{0};
  std::exception_ptr err;
  auto worker = [&] {
    SerialScope serial;
    while (true) {
      const std::size_t k = next_job++;
      if (k >= todo.size()) return;
      try {
        auto rec = op_capacity_trend(cells[todo[k]]);
        std::lock_guard lock(mu);
        results[k] = std::move(rec);
        while (next_write < results.size() && results[next_write]) {
          append_record(file, *results[next_write]);
          results[next_write].reset();
          ++next_write;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
        next_job = todo.size();
        return;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(thread_count(), static_cast<unsigned>(todo.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return todo.size();
}

// ---------------------------------------------------------------------------
// Entry point

/// Machine-readable error line for stderr.
inline std::string error_json(const std::string& kind, const std::string& message, int code) {
  return json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump();
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DepthOverflow:
    case ErrorKind::NoSolutionInRange:
    case ErrorKind::IoError: return 2;
    default: return 3;
  }
}

namespace detail {

// Registers a flag and copies it into the JSON override object when given.
class Flags {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& name, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *holder, desc);
    if constexpr (std::is_same_v<T, std::vector<double>>) opt->expected(1, 3)->delimiter(',');
    commits_.push_back([this, holder, opt, key] {
      if (opt->count() > 0) overrides_[key] = *holder;
    });
  }
  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(name, *holder, desc);
    commits_.push_back([this, holder, opt, key] {
      if (opt->count() > 0) overrides_[key] = *holder;
    });
  }
  const json& collect() {
    for (auto& f : commits_) f();
    return overrides_;
  }

 private:
  json overrides_ = json::object();
  std::vector<std::function<void()>> commits_;
};

inline void add_common(CLI::App* app, Flags& f) {
  f.add<std::string>(app, "--family", "family", "koch | vicsek | cantor");
  f.add<double>(app, "--lambda", "lambda", "family parameter");
  f.add<int>(app, "--d", "d", "ambient dimension");
  f.add<int>(app, "--depth", "depth", "generation depth (default: resolves the grid)");
  f.add<int>(app, "--resolution", "resolution", "cells along the longest axis");
  f.add<double>(app, "--margin", "margin", "bounding-box margin");
  f.add<double>(app, "--delta", "delta", "degeneracy exponent");
  f.add<std::uint64_t>(app, "--seed", "seed", "top-level seed");
  f.add<std::string>(app, "--id", "id", "explicit record id");
  f.add<double>(app, "--eps", "eps", "physical collar width");
  f.add<double>(app, "--eps-h", "eps_h", "collar width in cells");
  f.add<double>(app, "--cg-tol", "cg_tol", "CG relative residual");
  f.add<std::string>(app, "--average", "average", "arithmetic | harmonic");
  f.add<std::vector<double>>(app, "--z", "z", "boundary point, comma separated");
  f.add<double>(app, "--r", "r", "Hardy support radius");
  f.add<double>(app, "--hardy-tol", "hardy_tol", "inverse-iteration tolerance");
  f.add<double>(app, "--rho", "rho", "collar region radius");
  f.add<double>(app, "--tau-min-h", "tau_min_h", "smallest tau in cells");
  f.add<double>(app, "--tau-max-h", "tau_max_h", "largest tau in cells");
  f.add<int>(app, "--tau-points", "tau_points", "number of tau values");
  f.add<std::vector<double>>(app, "--start", "start", "walk start point, comma separated");
  f.add<double>(app, "--horizon", "horizon", "walk time horizon T");
  f.add<int>(app, "--trials", "trials", "walk trials");
  f.add<double>(app, "--absorb-eps", "absorb_eps", "absorbing collar width");
  f.flag(app, "--fit", "fit", "fit the Minkowski dimension on the grid");
  f.add<double>(app, "--r-min-h", "r_min_h", "fit range start in cells");
  f.add<double>(app, "--r-max-h", "r_max_h", "fit range end in cells");
  f.add<int>(app, "--fit-points", "fit_points", "radii in the fit");
  f.add<int>(app, "--ahlfors-centers", "ahlfors_centers", "centers for the Ahlfors check");
  f.add<std::string>(app, "--geometry-out", "geometry_out", "geometry text file");
  f.add<std::string>(app, "--field-out", "field_out", "distance field binary file");
  f.add<std::string>(app, "--csv-out", "csv_out", "distance field CSV file");
  f.add<std::string>(app, "--lambdas", "lambdas", "sweep range lo:hi:n");
  f.add<std::string>(app, "--deltas", "deltas", "sweep range lo:hi:n");
  f.add<double>(app, "--trend-threshold", "trend_threshold", "ratio below which capacity counts as vanishing");
  f.add<std::string>(app, "--in", "in", "record stream to read");
  f.add<std::string>(app, "--csv", "csv_table", "CSV table written by report");
}

}  // namespace detail

inline int run_subcommand(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Degenerate elliptic forms on fractal boundaries"};
  app.require_subcommand(1);
  detail::Flags flags;
  std::string config_path;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"fractal", "generate a boundary realization, grid and distance field"},
      {"dimension", "similarity dimension, critical exponent and optional grid fits"},
      {"capacity", "relaxed capacity of the boundary collar"},
      {"hardy", "local weighted Hardy quotient"},
      {"collar", "collar and truncated integrals of d^(delta-2)"},
      {"walk", "absorption probability of the generator's random walk"},
      {"sweep", "capacity-trend sweep over the (lambda, delta) plane"},
      {"report", "CSV tables and an SVG phase diagram from a record stream"}};
  std::map<std::string, CLI::App*> apps;
  for (const auto& [name, desc] : subs) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "JSON config file");
    flags.add<std::string>(sub, "--out", "out", name == "report" ? "SVG output" : "JSONL record stream");
    detail::add_common(sub, flags);
    apps[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("ConfigError", e.what(), 2) << '\n';
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    apply_json(cfg, flags.collect());
    std::string name;
    for (const auto& [n, sub] : apps)
      if (sub->parsed()) name = n;

    if (name == "report") {
      if (cfg.in.empty()) fail(ErrorKind::ConfigError, "report needs --in");
      const auto recs = read_records(cfg.in);
      const std::string svg = !cfg.svg_out.empty() ? cfg.svg_out : cfg.out;
      const auto summary = write_report(recs, svg, cfg.csv_table);
      out << summary.dump() << '\n';
      return 0;
    }
    if (name == "sweep") {
      const auto ran = run_sweep(cfg, err);
      out << json{{"ran", ran}, {"out", cfg.out}}.dump() << '\n';
      return 0;
    }
    ExperimentRecord rec;
    if (name == "fractal") rec = op_fractal(cfg);
    else if (name == "dimension") rec = op_dimension(cfg);
    else if (name == "capacity") rec = op_capacity(cfg);
    else if (name == "hardy") rec = op_hardy(cfg);
    else if (name == "collar") rec = op_collar(cfg);
    else if (name == "walk") rec = op_walk(cfg);
    emit(cfg, rec, out);
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << error_json(std::string(to_string(e.kind())), e.what(), code) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what(), 3) << '\n';
    return 3;
  }
}

}  // namespace fraclab::cli
