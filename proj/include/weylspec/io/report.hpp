#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace weylspec::io {

/// Shortest round-trip text for a finite double; throws std::domain_error otherwise.
std::string format_number(double x, const std::string& context = "value");

using Cell = std::variant<std::string, double, std::int64_t>;

/// CSV file written row by row; every row is flushed so that a failing run
/// leaves the rows produced so far on disk.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<Cell>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
};

/// Throws std::domain_error naming the JSON pointer of the first non-finite number.
void require_finite(const nlohmann::json& doc);

/// Pretty-printed JSON with a trailing newline, after require_finite.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Static SVG line chart; non-positive values are dropped on log axes.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace weylspec::io
