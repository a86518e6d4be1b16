#pragma once

// Deterministic report emission: RFC-4180 CSV with a schema/config-hash header
// line, and self-contained SVG line plots (no plotting dependency, identical
// bytes for identical inputs).

#include <cstdint>
#include <string>
#include <vector>

namespace semiscore {

// FNV-1a over the canonical config text; printed as 16 hex digits.
std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(std::uint64_t h);

// Shortest round-trip decimal form (to_chars); locale-independent.
std::string format_double(double v);

// Quotes a field per RFC 4180 when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

class CsvWriter {
 public:
  // Writes "#schema=1 config=<hash>" followed by the header row.
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            std::uint64_t config_hash);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& fields);
  void row_values(const std::vector<double>& values);
  void close();

 private:
  void* out_;  // FILE*
  std::size_t columns_;
};

struct SvgSeries {
  std::string label;
  std::string color;  // e.g. "#1f6f8b"
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPlot {
  int width = 800;
  int height = 520;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<double> vertical_marks;  // data-space x positions
  std::vector<SvgSeries> series;
};

// Renders axes, ticks, polylines, and markers. Coordinates use fixed %.2f
// formatting so reruns emit identical bytes.
void write_svg_plot(const std::string& path, const SvgPlot& plot);

}  // namespace semiscore
