#pragma once

// CSV tables and SVG plots written by the experiment runner.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gwspeed::harness {

/// Round-trip formatting (%.17g) so reruns give byte-identical files.
std::string num(double x);
std::string num(std::uint64_t x);
std::string num(std::int64_t x);
inline std::string num(int x) { return num(static_cast<std::int64_t>(x)); }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // empty: no error bars
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  bool zero_line = false;
};

/// Scatter-and-line plot with optional symmetric error bars.
void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace gwspeed::harness
