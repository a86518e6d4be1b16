#include "semiscore/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "semiscore/errors.hpp"

namespace semiscore {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     std::uint64_t config_hash)
    : columns_(columns.size()) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw input_error("csv: cannot open " + path);
  out_ = f;
  std::fprintf(f, "#schema=1 config=%s\n", hash_hex(config_hash).c_str());
  std::vector<std::string> hdr = columns;
  row(hdr);
}

CsvWriter::~CsvWriter() { close(); }

void CsvWriter::close() {
  if (out_) {
    std::fclose(static_cast<FILE*>(out_));
    out_ = nullptr;
  }
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw input_error("csv: wrong field count");
  FILE* f = static_cast<FILE*>(out_);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string esc = csv_escape(fields[i]);
    std::fwrite(esc.data(), 1, esc.size(), f);
    std::fputc(i + 1 < fields.size() ? ',' : '\n', f);
  }
}

void CsvWriter::row_values(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_double(v));
  row(fields);
}

namespace {

struct Mapper {
  double lo, hi;
  double px0, px1;
  bool logscale;
  double to_px(double v) const {
    double t = logscale ? std::log10(v) : v;
    double a = logscale ? std::log10(lo) : lo;
    double b = logscale ? std::log10(hi) : hi;
    if (b == a) return 0.5 * (px0 + px1);
    return px0 + (t - a) / (b - a) * (px1 - px0);
  }
};

void pxf(std::string& out, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  out += buf;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<double> linear_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double span = hi - lo;
  const double step0 = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  double step = step0;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (span / (step0 * m) <= 7.0) {
      step = step0 * m;
      break;
    }
  }
  std::vector<double> ticks;
  const double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 1e-9 * span; v += step) ticks.push_back(v);
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int lo_e = static_cast<int>(std::floor(std::log10(lo)));
  const int hi_e = static_cast<int>(std::ceil(std::log10(hi)));
  for (int e = lo_e; e <= hi_e; ++e) {
    const double v = std::pow(10.0, e);
    if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) ticks.push_back(v);
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

}  // namespace

void write_svg_plot(const std::string& path, const SvgPlot& plot) {
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  bool any = false;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xv = s.x[i], yv = s.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if (plot.log_x && !(xv > 0)) continue;
      if (plot.log_y && !(yv > 0)) continue;
      if (!any) {
        xlo = xhi = xv;
        ylo = yhi = yv;
        any = true;
      } else {
        xlo = std::min(xlo, xv);
        xhi = std::max(xhi, xv);
        ylo = std::min(ylo, yv);
        yhi = std::max(yhi, yv);
      }
    }
  }
  for (double m : plot.vertical_marks) {
    if (!any) continue;
    xlo = std::min(xlo, m);
    xhi = std::max(xhi, m);
  }
  if (!any) throw input_error("svg: no finite points to plot");
  if (xhi == xlo) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi == ylo) {
    ylo -= 0.5;
    yhi += 0.5;
  }
  if (!plot.log_y) {
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;
  }

  const double ml = 70, mr = 20, mt = 20, mb = 50;
  const Mapper mx{xlo, xhi, ml, plot.width - mr, plot.log_x};
  const Mapper my{ylo, yhi, plot.height - mb, mt, plot.log_y};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) +
         "\" height=\"" + std::to_string(plot.height) + "\" viewBox=\"0 0 " +
         std::to_string(plot.width) + " " + std::to_string(plot.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n<rect x=\"";
  pxf(svg, ml);
  svg += "\" y=\"";
  pxf(svg, mt);
  svg += "\" width=\"";
  pxf(svg, plot.width - ml - mr);
  svg += "\" height=\"";
  pxf(svg, plot.height - mt - mb);
  svg += "\"/>\n</g>\n";

  const auto xticks = plot.log_x ? log_ticks(xlo, xhi) : linear_ticks(xlo, xhi);
  const auto yticks = plot.log_y ? log_ticks(ylo, yhi) : linear_ticks(ylo, yhi);
  svg += "<g stroke=\"#999\" stroke-width=\"0.5\">\n";
  for (double v : xticks) {
    const double px = mx.to_px(v);
    svg += "<line x1=\"";
    pxf(svg, px);
    svg += "\" y1=\"";
    pxf(svg, mt);
    svg += "\" x2=\"";
    pxf(svg, px);
    svg += "\" y2=\"";
    pxf(svg, plot.height - mb);
    svg += "\"/>\n";
  }
  for (double v : yticks) {
    const double py = my.to_px(v);
    svg += "<line x1=\"";
    pxf(svg, ml);
    svg += "\" y1=\"";
    pxf(svg, py);
    svg += "\" x2=\"";
    pxf(svg, plot.width - mr);
    svg += "\" y2=\"";
    pxf(svg, py);
    svg += "\"/>\n";
  }
  svg += "</g>\n<g font-family=\"monospace\" font-size=\"11\" fill=\"#222\">\n";
  for (double v : xticks) {
    svg += "<text text-anchor=\"middle\" x=\"";
    pxf(svg, mx.to_px(v));
    svg += "\" y=\"";
    pxf(svg, plot.height - mb + 16);
    svg += "\">" + tick_label(v) + "</text>\n";
  }
  for (double v : yticks) {
    svg += "<text text-anchor=\"end\" x=\"";
    pxf(svg, ml - 6);
    svg += "\" y=\"";
    pxf(svg, my.to_px(v) + 4);
    svg += "\">" + tick_label(v) + "</text>\n";
  }
  svg += "<text text-anchor=\"middle\" x=\"";
  pxf(svg, 0.5 * (ml + plot.width - mr));
  svg += "\" y=\"";
  pxf(svg, plot.height - 12);
  svg += "\">" + plot.x_label + "</text>\n";
  svg += "<text text-anchor=\"middle\" transform=\"translate(16,";
  pxf(svg, 0.5 * (mt + plot.height - mb));
  svg += ") rotate(-90)\">" + plot.y_label + "</text>\n</g>\n";

  svg += "<g stroke=\"#b5542e\" stroke-width=\"1\" stroke-dasharray=\"5,4\">\n";
  for (double m : plot.vertical_marks) {
    const double px = mx.to_px(m);
    svg += "<line x1=\"";
    pxf(svg, px);
    svg += "\" y1=\"";
    pxf(svg, mt);
    svg += "\" x2=\"";
    pxf(svg, px);
    svg += "\" y2=\"";
    pxf(svg, plot.height - mb);
    svg += "\"/>\n";
  }
  svg += "</g>\n";

  int legend_y = static_cast<int>(mt) + 16;
  for (const auto& s : plot.series) {
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xv = s.x[i], yv = s.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if (plot.log_x && !(xv > 0)) continue;
      if (plot.log_y && !(yv > 0)) continue;
      if (!first) svg += ' ';
      pxf(svg, mx.to_px(xv));
      svg += ',';
      pxf(svg, my.to_px(yv));
      first = false;
    }
    svg += "\"/>\n";
    if (!s.label.empty()) {
      svg += "<text font-family=\"monospace\" font-size=\"11\" fill=\"" + s.color + "\" x=\"";
      pxf(svg, ml + 10);
      svg += "\" y=\"" + std::to_string(legend_y) + "\">" + s.label + "</text>\n";
      legend_y += 14;
    }
  }
  svg += "</svg>\n";

  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw input_error("svg: cannot open " + path);
  std::fwrite(svg.data(), 1, svg.size(), f);
  std::fclose(f);
}

}  // namespace semiscore
