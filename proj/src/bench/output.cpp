#include "stdd/bench/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stdd/error.hpp"

namespace stdd::bench {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string trace_csv(const IterationTrace& trace) {
  std::ostringstream out;
  out << "iteration,increment_norm,residual_norm,e_e\r\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << trace.n[i] << ',' << format_double(trace.increment[i]) << ',' << format_double(trace.residual[i]) << ','
        << (i < trace.e_e.size() ? format_double(trace.e_e[i]) : std::string()) << "\r\n";
  }
  return out.str();
}

std::string summary_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method,plateau_e_e,fitted_L,iterations_to_plateau,converged,iterations\r\n";
  for (const auto& m : report.methods) {
    const auto& t = m.result.trace;
    out << csv_field(m.spec.label) << ',' << format_double(m.plateau_ee) << ',' << format_optional(t.fitted_L) << ','
        << (m.plateau ? std::to_string(*m.plateau) : std::string()) << ',' << (t.converged ? "true" : "false") << ','
        << t.size() << "\r\n";
  }
  out << "Monolithic," << format_double(report.monolithic_ee) << ",,,true,\r\n";
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "method,phi,s,converged,diverged,iterations,fitted_L\r\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << format_double(r.phi) << ',' << format_double(r.s) << ','
        << (r.converged ? "true" : "false") << ',' << (r.diverged ? "true" : "false") << ',' << r.iterations << ','
        << format_optional(r.fitted_L) << "\r\n";
  }
  return out.str();
}

std::string error_svg(const ExperimentReport& report) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 130, kTop = 20, kBottom = 50;
  constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t max_n = 1;
  auto include = [&](double v) {
    if (v > 0.0 && std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  for (const auto& m : report.methods) {
    for (double v : m.result.trace.e_e) include(v);
    max_n = std::max(max_n, m.result.trace.e_e.size());
  }
  include(report.monolithic_ee);
  if (!(hi > 0.0)) {
    lo = 1e-3;
    hi = 1.0;
  }
  const double ylo = std::floor(std::log10(lo));
  const double yhi = std::max(ylo + 1.0, std::ceil(std::log10(hi)));
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double n) { return kLeft + (max_n > 1 ? (n - 1.0) / (static_cast<double>(max_n) - 1.0) : 0.5) * pw; };
  auto py = [&](double v) { return kTop + (yhi - std::log10(v)) / (yhi - ylo) * ph; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(ylo); d <= static_cast<int>(yhi); ++d) {
    const double y = py(std::pow(10.0, d));
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" font-size=\"12\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, max_n / 10);
  for (std::size_t n = 1; n <= max_n; n += step) {
    out << "<text x=\"" << px(static_cast<double>(n)) << "\" y=\"" << kTop + ph + 18
        << "\" font-size=\"12\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">iteration</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\">e_e</text>\n";
  if (report.monolithic_ee > 0.0) {
    const double y = py(report.monolithic_ee);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    const auto& m = report.methods[i];
    const char* color = kColors[i % kColors.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t n = 0; n < m.result.trace.e_e.size(); ++n) {
      const double v = m.result.trace.e_e[n];
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      out << (first ? "" : " ") << px(static_cast<double>(n + 1)) << ',' << py(std::clamp(v, lo, hi));
      first = false;
    }
    out << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(i + 1);
    out << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 30 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << kLeft + pw + 36 << "\" y=\"" << ly << "\" font-size=\"12\">" << xml_escape(m.spec.label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string field_csv(const SpaceTimeField& field) {
  std::ostringstream out;
  out << "a,k,value\r\n";
  for (int a = 0; a < field.temporal_dim; ++a) {
    for (int k = 0; k < field.spatial_dim; ++k) {
      out << a << ',' << k << ',' << format_double(field.at(a, k)) << "\r\n";
    }
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidParameter, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::InvalidParameter, "write failed for '" + path + "'");
}

}  // namespace stdd::bench
