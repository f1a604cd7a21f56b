#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace sim {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char ch : cell) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string escape_xml(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += ch;
    }
  }
  return o;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Round tick spacing covering [lo, hi] with about five ticks.
double tick_step(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  if (!(raw > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

constexpr double kW = 720, kH = 440, kL = 80, kR = 20, kT = 40, kB = 60;

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void axes(std::ostringstream& o, const Frame& f, const std::string& title, const std::string& xl, const std::string& yl,
          bool y_ticks = true) {
  o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\"" << kH - kT - kB
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double sx = tick_step(f.x0, f.x1);
  for (double t = std::ceil(f.x0 / sx) * sx; t <= f.x1 + 1e-9 * sx; t += sx) {
    o << "<line x1=\"" << num(f.px(t)) << "\" y1=\"" << kH - kB << "\" x2=\"" << num(f.px(t)) << "\" y2=\""
      << kH - kB + 5 << "\" stroke=\"black\"/><text x=\"" << num(f.px(t)) << "\" y=\"" << kH - kB + 18
      << "\" text-anchor=\"middle\">" << tick_label(std::abs(t) < 1e-12 * sx ? 0.0 : t) << "</text>\n";
  }
  const double sy = tick_step(f.y0, f.y1);
  for (double t = std::ceil(f.y0 / sy) * sy; y_ticks && t <= f.y1 + 1e-9 * sy; t += sy) {
    o << "<line x1=\"" << kL - 5 << "\" y1=\"" << num(f.py(t)) << "\" x2=\"" << kL << "\" y2=\"" << num(f.py(t))
      << "\" stroke=\"black\"/><text x=\"" << kL - 8 << "\" y=\"" << num(f.py(t) + 4)
      << "\" text-anchor=\"end\">" << tick_label(std::abs(t) < 1e-12 * sy ? 0.0 : t) << "</text>\n";
  }
  o << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
    << "</text>\n<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">"
    << escape_xml(xl) << "</text>\n<text transform=\"translate(18," << (kT + kH - kB) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(yl) << "</text>\n";
}

std::string header() {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return o.str();
}

}  // namespace

void CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::logic_error("csv: row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt17(v));
  row(std::move(cells));
}

std::string CsvTable::str() const {
  std::string s;
  for (const auto& m : meta_) s += "# " + m + "\r\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + quote(cells[i]);
    s += "\r\n";
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return s;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp.string() + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::filesystem::remove(tmp);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, const std::vector<Marker>& markers) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);
  const Frame f{x0, x1, y0, y1};
  std::ostringstream o;
  o << header();
  axes(o, f, title, x_label, y_label);
  for (const auto& m : markers) {
    if (m.x < x0 || m.x > x1) continue;
    o << "<line x1=\"" << num(f.px(m.x)) << "\" y1=\"" << kT << "\" x2=\"" << num(f.px(m.x)) << "\" y2=\"" << kH - kB
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/><text x=\"" << num(f.px(m.x) + 3) << "\" y=\"" << kT + 14
      << "\" fill=\"#555\">" << escape_xml(m.label) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << num(f.px(s.x[i])) << "," << num(f.py(s.y[i])) << " ";
    o << "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        o << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i])) << "\" r=\"2.5\" fill=\""
          << s.color << "\"/>\n";
      }
    }
    const double ly = kT + 16 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << kW - kR - 170 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kW - kR - 150 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/><text x=\"" << kW - kR - 145 << "\" y=\"" << ly << "\">"
      << escape_xml(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string svg_heat_map(const std::string& title, const std::string& x_label, const std::string& y_label, double x0,
                         double x1, double y0, double y1, const std::vector<std::vector<double>>& values) {
  double peak = 0.0;
  for (const auto& r : values) {
    for (double v : r) peak = std::max(peak, v);
  }
  const Frame f{x0, x1, y0, y1};
  std::ostringstream o;
  o << header();
  const std::size_t rows = values.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t cols = values[r].size();
    const double ya = f.py(y0 + (y1 - y0) * static_cast<double>(r + 1) / static_cast<double>(rows));
    const double yb = f.py(y0 + (y1 - y0) * static_cast<double>(r) / static_cast<double>(rows));
    for (std::size_t c = 0; c < cols; ++c) {
      const double xa = f.px(x0 + (x1 - x0) * static_cast<double>(c) / static_cast<double>(cols));
      const double xb = f.px(x0 + (x1 - x0) * static_cast<double>(c + 1) / static_cast<double>(cols));
      const int g = peak > 0.0 ? static_cast<int>(std::lround(255.0 * std::clamp(values[r][c] / peak, 0.0, 1.0))) : 0;
      o << "<rect x=\"" << num(xa) << "\" y=\"" << num(ya) << "\" width=\"" << num(xb - xa + 0.3) << "\" height=\""
        << num(yb - ya + 0.3) << "\" fill=\"rgb(" << g << "," << g << "," << g << ")\"/>\n";
    }
  }
  axes(o, f, title, x_label, y_label);
  o << "</svg>\n";
  return o.str();
}

}  // namespace sim
