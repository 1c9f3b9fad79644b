// Run artifacts: CSV tables, raw float64 parameter dumps and two small
// self-contained SVG renderers (learning curves, sweep with error bars).
// Every number is written with %.17g so files round-trip exactly and are
// byte-identical for identical inputs.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "wnpg/estimator.hpp"
#include "wnpg/train.hpp"

namespace wnpg {

inline std::string fmt_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string record_csv(const RunRecord& rec) {
  std::ostringstream out;
  out << "k,J_hat,J_det,grad_norm,zeta,wallclock_ms\n";
  for (const RunRow& r : rec.rows) {
    out << r.k << ',' << fmt_num(r.J_hat) << ',' << (r.J_det ? fmt_num(*r.J_det) : "") << ','
        << fmt_num(r.grad_norm) << ',' << fmt_num(r.zeta) << ',' << (r.wallclock_ms ? fmt_num(*r.wallclock_ms) : "")
        << '\n';
  }
  return out.str();
}

inline std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "sigma_sq,seed,J_hat_final,J_det_final,status\n";
  for (const SweepRow& r : sweep.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << fmt_num(r.sigma_sq) << ',' << r.seed << ',' << fmt_num(r.J_hat_final) << ',' << fmt_num(r.J_det_final)
        << ',' << status << '\n';
  }
  return out.str();
}

inline std::string variance_csv(std::span<const VarianceRow> rows, double sigma, Algo algo, const std::string& env) {
  std::ostringstream out;
  out << "N,trace_variance,reps,sigma,algo,env\n";
  for (const auto& r : rows) {
    out << r.n << ',' << fmt_num(r.trace_variance) << ',' << r.reps << ',' << fmt_num(sigma) << ','
        << to_string(algo) << ',' << env << '\n';
  }
  return out.str();
}

// ------------------------------------------------------- float64 files ----

namespace detail {
inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}
}  // namespace detail

inline std::string encode_f64(std::span<const double> xs) {
  std::string bytes(xs.size() * 8, '\0');
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::uint64_t le = detail::to_little_endian(std::bit_cast<std::uint64_t>(xs[i]));
    std::memcpy(bytes.data() + 8 * i, &le, 8);
  }
  return bytes;
}

inline Vec decode_f64(const std::string& bytes) {
  require(bytes.size() % 8 == 0, "f64 file: size is not a multiple of 8 bytes");
  Vec out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t le;
    std::memcpy(&le, bytes.data() + 8 * i, 8);
    out[i] = std::bit_cast<double>(detail::to_little_endian(le));
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), path + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  require(static_cast<bool>(out), path + ": write failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ----------------------------------------------------------------- SVG ----

namespace detail {

struct Frame {
  double x0, x1, y0, y1;  // data range
  static constexpr double W = 640, H = 400, L = 80, R = 20, T = 30, B = 50;

  double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

inline void pad_range(double& lo, double& hi) {
  if (!(lo < hi)) {
    const double m = std::isfinite(lo) ? lo : 0.0;
    lo = m - 1.0;
    hi = m + 1.0;
    return;
  }
  const double p = 0.05 * (hi - lo);
  lo -= p;
  hi += p;
}

inline std::string svg_open(const Frame& f, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::W << "\" height=\"" << Frame::H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << Frame::W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
  s << "<line x1=\"" << Frame::L << "\" y1=\"" << Frame::H - Frame::B << "\" x2=\"" << Frame::W - Frame::R
    << "\" y2=\"" << Frame::H - Frame::B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << Frame::L << "\" y1=\"" << Frame::T << "\" x2=\"" << Frame::L << "\" y2=\""
    << Frame::H - Frame::B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << Frame::W / 2 << "\" y=\"" << Frame::H - 10 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  s << "<text x=\"16\" y=\"" << Frame::H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << Frame::H / 2 << ")\">" << ylabel << "</text>\n";
  // Range labels at the axis ends.
  s << "<text x=\"" << Frame::L << "\" y=\"" << Frame::H - Frame::B + 16 << "\" text-anchor=\"middle\">"
    << fmt_short(f.x0) << "</text>\n";
  s << "<text x=\"" << Frame::W - Frame::R << "\" y=\"" << Frame::H - Frame::B + 16 << "\" text-anchor=\"middle\">"
    << fmt_short(f.x1) << "</text>\n";
  s << "<text x=\"" << Frame::L - 4 << "\" y=\"" << Frame::H - Frame::B << "\" text-anchor=\"end\">"
    << fmt_short(f.y0) << "</text>\n";
  s << "<text x=\"" << Frame::L - 4 << "\" y=\"" << Frame::T + 4 << "\" text-anchor=\"end\">" << fmt_short(f.y1)
    << "</text>\n";
  return s.str();
}

inline std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts,
                            const std::string& color) {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s << ' ';
    s << fmt_short(f.px(pts[i].first)) << ',' << fmt_short(f.py(pts[i].second));
  }
  s << "\"/>\n";
  return s.str();
}

}  // namespace detail

/// J_hat and J_det against k as two polylines.
inline std::string curves_svg(const RunRecord& rec, const std::string& title) {
  std::vector<std::pair<double, double>> hat, det;
  for (const RunRow& r : rec.rows) {
    if (std::isfinite(r.J_hat)) hat.emplace_back(static_cast<double>(r.k), r.J_hat);
    if (r.J_det && std::isfinite(*r.J_det)) det.emplace_back(static_cast<double>(r.k), *r.J_det);
  }
  detail::Frame f{1.0, std::max<double>(2.0, static_cast<double>(rec.rows.size())),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto* series : {&hat, &det}) {
    for (const auto& p : *series) {
      f.y0 = std::min(f.y0, p.second);
      f.y1 = std::max(f.y1, p.second);
    }
  }
  detail::pad_range(f.y0, f.y1);
  std::string s = detail::svg_open(f, title, "iteration k", "return");
  s += detail::polyline(f, hat, "#1f77b4");
  s += detail::polyline(f, det, "#d62728");
  s += "<text x=\"" + fmt_short(detail::Frame::W - 150) + "\" y=\"45\" fill=\"#1f77b4\">J_hat (stochastic)</text>\n";
  s += "<text x=\"" + fmt_short(detail::Frame::W - 150) + "\" y=\"60\" fill=\"#d62728\">J_det (deployed)</text>\n";
  s += "</svg>\n";
  return s;
}

/// Seed-aggregated J_det against sigma^2 on a log10 x axis with 95% error bars.
inline std::string sweep_svg(const SweepResult& sweep, const std::string& title) {
  struct P {
    double lx, m, h;
  };
  std::vector<P> pts;
  for (const auto& a : sweep.aggregates) {
    if (a.runs_ok == 0 || !std::isfinite(a.J_det_mean)) continue;
    pts.push_back({std::log10(a.sigma_sq), a.J_det_mean, std::isfinite(a.J_det_halfwidth) ? a.J_det_halfwidth : 0.0});
  }
  detail::Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& a : sweep.aggregates) {
    f.x0 = std::min(f.x0, std::log10(a.sigma_sq));
    f.x1 = std::max(f.x1, std::log10(a.sigma_sq));
  }
  for (const auto& p : pts) {
    f.y0 = std::min(f.y0, p.m - p.h);
    f.y1 = std::max(f.y1, p.m + p.h);
  }
  detail::pad_range(f.x0, f.x1);
  detail::pad_range(f.y0, f.y1);
  std::string s = detail::svg_open(f, title, "log10 sigma^2", "deployed J_det (mean, 95% CI)");
  std::vector<std::pair<double, double>> line;
  for (const auto& p : pts) {
    line.emplace_back(p.lx, p.m);
    const double x = f.px(p.lx);
    s += "<line x1=\"" + fmt_short(x) + "\" y1=\"" + fmt_short(f.py(p.m - p.h)) + "\" x2=\"" + fmt_short(x) +
         "\" y2=\"" + fmt_short(f.py(p.m + p.h)) + "\" stroke=\"#d62728\"/>\n";
    for (double y : {p.m - p.h, p.m + p.h}) {
      s += "<line x1=\"" + fmt_short(x - 4) + "\" y1=\"" + fmt_short(f.py(y)) + "\" x2=\"" + fmt_short(x + 4) +
           "\" y2=\"" + fmt_short(f.py(y)) + "\" stroke=\"#d62728\"/>\n";
    }
    s += "<circle cx=\"" + fmt_short(x) + "\" cy=\"" + fmt_short(f.py(p.m)) + "\" r=\"3\" fill=\"#d62728\"/>\n";
  }
  s += detail::polyline(f, line, "#d62728");
  s += "</svg>\n";
  return s;
}

}  // namespace wnpg
