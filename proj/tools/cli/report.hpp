#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/record.hpp"

namespace fraclab::cli {

/// CSV table of a record stream: fixed columns, then one column per output
/// key seen anywhere in the stream (blank where a record lacks it).
inline void write_csv_table(std::ostream& os, const std::vector<ExperimentRecord>& recs) {
  std::set<std::string> keys;
  for (const auto& r : recs)
    for (const auto& [k, v] : r.outputs) keys.insert(k);
  os << "id,operation,family,d,lambda,depth,resolution,delta,s,delta_c,verdict,seed,wall_time";
  for (const auto& k : keys) os << ',' << k;
  os << '\n';
  os.precision(17);
  for (const auto& r : recs) {
    os << r.id << ',' << r.operation << ',' << r.family << ',' << r.d << ',' << r.lambda << ',' << r.depth << ','
       << r.resolution << ',';
    if (r.delta) os << *r.delta;
    os << ',' << r.s << ',' << r.delta_c << ',' << r.verdict << ',' << r.seed << ',' << r.wall_time;
    for (const auto& k : keys) {
      os << ',';
      if (auto it = r.outputs.find(k); it != r.outputs.end()) os << it->second;
    }
    os << '\n';
  }
}

/// Affine map from the (lambda, delta) rectangle to SVG pixels. Cells are
/// centered on the sampled values, so the data range is padded by half a
/// cell on each side.
struct PlotFrame {
  double lam_lo, lam_hi, del_lo, del_hi;  // padded data range
  double left = 70, top = 30, width = 480, height = 360;

  double x(double lam) const { return left + (lam - lam_lo) / (lam_hi - lam_lo) * width; }
  double y(double del) const { return top + height - (del - del_lo) / (del_hi - del_lo) * height; }
};

namespace detail {

inline double half_step(const std::vector<double>& v) {
  if (v.size() < 2) return 0.05;
  double m = v.back() - v.front();
  for (std::size_t i = 1; i < v.size(); ++i) m = std::min(m, v[i] - v[i - 1]);
  return 0.5 * m;
}

inline std::vector<double> distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), v.end());
  return v;
}

}  // namespace detail

inline PlotFrame frame_for(const std::vector<ExperimentRecord>& cells) {
  std::vector<double> lams, dels;
  for (const auto& r : cells) {
    lams.push_back(r.lambda);
    dels.push_back(*r.delta);
  }
  lams = detail::distinct(lams);
  dels = detail::distinct(dels);
  const double hl = detail::half_step(lams), hd = detail::half_step(dels);
  return PlotFrame{lams.front() - hl, lams.back() + hl, dels.front() - hd, dels.back() + hd};
}

/// SVG heatmap of trend verdicts in the (lambda, delta) plane with the
/// critical curve delta_c(lambda) of the stream's family overlaid.
inline std::string phase_svg(const std::vector<ExperimentRecord>& cells) {
  const auto f = frame_for(cells);
  std::vector<double> lams, dels;
  for (const auto& r : cells) {
    lams.push_back(r.lambda);
    dels.push_back(*r.delta);
  }
  const double cw = 2 * detail::half_step(detail::distinct(lams)) / (f.lam_hi - f.lam_lo) * f.width;
  const double ch = 2 * detail::half_step(detail::distinct(dels)) / (f.del_hi - f.del_lo) * f.height;

  std::ostringstream s;
  s.precision(6);
  s << std::fixed;
  const double W = f.left + f.width + 150, H = f.top + f.height + 60;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<clipPath id=\"plot\"><rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width
    << "\" height=\"" << f.height << "\"/></clipPath>\n";
  for (const auto& r : cells) {
    const char* color = r.verdict == "vanishing" ? "#3b6fb6" : r.verdict == "positive" ? "#d1603d" : "#bbbbbb";
    const double ratio = r.outputs.count("trend_ratio") ? r.outputs.at("trend_ratio") : 1.0;
    s << "<rect class=\"cell\" x=\"" << f.x(r.lambda) - cw / 2 << "\" y=\"" << f.y(*r.delta) - ch / 2 << "\" width=\""
      << cw << "\" height=\"" << ch << "\" fill=\"" << color << "\"><title>lambda=" << r.lambda
      << " delta=" << *r.delta << " ratio=" << ratio << " " << r.verdict << "</title></rect>\n";
  }
  // critical curve
  const auto& ref = cells.front();
  s << "<polyline class=\"critical\" clip-path=\"url(#plot)\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
  const int n = 400;
  const double lo = std::max(f.lam_lo, 1e-6), hi = f.lam_hi;
  for (int i = 0; i <= n; ++i) {
    const double lam = lo + (hi - lo) * i / n;
    try {
      const auto [sd, dc] = family_exponents(ref.family, lam, ref.d);
      (void)sd;
      s << f.x(lam) << ',' << f.y(dc) << ' ';
    } catch (const Error&) {
      // lambda outside the family's admissible range
    }
  }
  s << "\"/>\n";
  // axes
  s << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double lam : detail::distinct(lams))
    s << "<text x=\"" << f.x(lam) << "\" y=\"" << f.top + f.height + 16 << "\" text-anchor=\"middle\">"
      << std::setprecision(3) << std::defaultfloat << lam << std::fixed << std::setprecision(6) << "</text>\n";
  for (double del : detail::distinct(dels))
    s << "<text x=\"" << f.left - 6 << "\" y=\"" << f.y(del) + 4 << "\" text-anchor=\"end\">" << std::setprecision(3)
      << std::defaultfloat << del << std::fixed << std::setprecision(6) << "</text>\n";
  s << "<text x=\"" << f.left + f.width / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">lambda</text>\n";
  s << "<text x=\"16\" y=\"" << f.top + f.height / 2 << "\" transform=\"rotate(-90 16 " << f.top + f.height / 2
    << ")\" text-anchor=\"middle\">delta</text>\n";
  const double lx = f.left + f.width + 14;
  s << "<rect x=\"" << lx << "\" y=\"" << f.top << "\" width=\"14\" height=\"14\" fill=\"#3b6fb6\"/><text x=\"" << lx + 20
    << "\" y=\"" << f.top + 12 << "\">capacity vanishing</text>\n";
  s << "<rect x=\"" << lx << "\" y=\"" << f.top + 22 << "\" width=\"14\" height=\"14\" fill=\"#d1603d\"/><text x=\""
    << lx + 20 << "\" y=\"" << f.top + 34 << "\">capacity positive</text>\n";
  s << "<line x1=\"" << lx << "\" y1=\"" << f.top + 51 << "\" x2=\"" << lx + 14 << "\" y2=\"" << f.top + 51
    << "\" stroke=\"black\" stroke-width=\"2\"/><text x=\"" << lx + 20 << "\" y=\"" << f.top + 55
    << "\">delta_c(lambda)</text>\n";
  s << "<text x=\"" << f.left << "\" y=\"18\">" << ref.family << ", d = " << ref.d << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

/// Writes the CSV table (when csv_path is set) and the phase SVG (when
/// svg_path is set and the stream holds trend records). Returns a summary.
inline json write_report(const std::vector<ExperimentRecord>& recs, const std::string& svg_path,
                         const std::string& csv_path) {
  if (recs.empty()) fail(ErrorKind::ConfigError, "record stream is empty");
  json summary{{"records", recs.size()}};
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) fail(ErrorKind::IoError, "cannot write " + csv_path);
    write_csv_table(f, recs);
    summary["csv"] = csv_path;
  }
  std::vector<ExperimentRecord> cells;
  for (const auto& r : recs)
    if (!r.verdict.empty() && r.delta) cells.push_back(r);
  if (!svg_path.empty()) {
    if (cells.empty()) fail(ErrorKind::ConfigError, "no trend records to plot; run sweep first");
    for (const auto& r : cells)
      if (r.family != cells.front().family || r.d != cells.front().d)
        fail(ErrorKind::ConfigError, "phase plot needs a single family and dimension");
    std::ofstream f(svg_path);
    if (!f) fail(ErrorKind::IoError, "cannot write " + svg_path);
    f << phase_svg(cells);
    summary["svg"] = svg_path;
    summary["cells"] = cells.size();
  }
  return summary;
}

}  // namespace fraclab::cli
