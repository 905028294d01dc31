#include "weylspec/io/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace weylspec::io {

namespace {

std::string escape_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void check_finite(const nlohmann::json& node, const std::string& pointer) {
  if (node.is_number_float()) {
    if (!std::isfinite(node.get<double>())) throw std::domain_error("non-finite number in report at " + pointer);
  } else if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) check_finite(it.value(), pointer + "/" + it.key());
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) check_finite(node[i], pointer + "/" + std::to_string(i));
  }
}

// Short tick label.
std::string tick(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 3);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_number(double x, const std::string& context) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite " + context + " in report");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), header_(std::move(header)), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << escape_csv(header_[i]);
  out_ << '\n';
  out_.flush();
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != header_.size()) {
    throw std::invalid_argument("CsvWriter: row has " + std::to_string(cells.size()) + " cells, header has " +
                                std::to_string(header_.size()));
  }
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    if (const auto* s = std::get_if<std::string>(&cells[i])) {
      line += escape_csv(*s);
    } else if (const auto* d = std::get_if<double>(&cells[i])) {
      line += format_number(*d, "'" + header_[i] + "' in " + path_.filename().string());
    } else {
      line += std::to_string(std::get<std::int64_t>(cells[i]));
    }
  }
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write to '" + path_.string() + "' failed");
}

void require_finite(const nlohmann::json& doc) { check_finite(doc, ""); }

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  require_finite(doc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 50;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](const std::pair<double, double>& p) {
    return std::isfinite(p.first) && std::isfinite(p.second) && (!spec.log_x || p.first > 0) &&
           (!spec.log_y || p.second > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!usable(p)) continue;
      x0 = std::min(x0, tx(p.first));
      x1 = std::max(x1, tx(p.first));
      y0 = std::min(y0, ty(p.second));
      y1 = std::max(y1, ty(p.second));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(spec.title)
      << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
    const double gx = left + pw * i / 4, gy = top + ph - ph * i / 4;
    svg << "<text x=\"" << gx << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << tick(spec.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << tick(spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape_xml(spec.x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << escape_xml(spec.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % 6];
    std::string pts;
    for (const auto& p : series[k].points) {
      if (!usable(p)) continue;
      pts += tick(px(p.first)) + "," + tick(py(p.second)) + " ";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
        << escape_xml(series[k].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << svg_line_plot(spec, series);
}

}  // namespace weylspec::io
