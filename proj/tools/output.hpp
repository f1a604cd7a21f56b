#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sim {

/// Output directory or file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v);

/// RFC 4180 table with '#'-prefixed metadata lines ahead of the header row. Numbers
/// are written with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void meta(const std::string& line) { meta_.push_back(line); }
  void meta(const std::string& key, const std::string& value) { meta_.push_back(key + " = " + value); }
  void meta(const std::string& key, double value) { meta(key, fmt17(value)); }

  /// Cells must match the column count.
  void row(std::vector<std::string> cells);
  void row(const std::vector<double>& values);

  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> meta_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Creates the directory (and parents) or throws IoError.
void ensure_directory(const std::filesystem::path& dir);

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct Marker {
  double x = 0.0;
  std::string label;
};

/// Minimal SVG line chart.
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, const std::vector<Marker>& markers = {});

/// Heat map of rows (y) by columns (x); values scaled to the array maximum.
std::string svg_heat_map(const std::string& title, const std::string& x_label, const std::string& y_label,
                         double x0, double x1, double y0, double y1, const std::vector<std::vector<double>>& values);

}  // namespace sim
