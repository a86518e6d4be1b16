#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "semiscore/errors.hpp"
#include "semiscore/report.hpp"

using namespace semiscore;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string tmp_path(const char* name) {
  return std::string("report_test_") + name;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("config hash matches the published FNV-1a vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(hash_hex(0xcbf29ce484222325ull) == "cbf29ce484222325");
  CHECK(hash_hex(0x1ull) == "0000000000000001");
}

TEST_CASE("shortest decimal form survives a parse round trip") {
  for (double v : {0.1, 1.0, -2.5, 13.0, 6.25e-4, 1e300, -7.1e-12, 3.141592653589793}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("field quoting follows RFC 4180") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("") == "");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("csv files carry the schema header and exact formatting") {
  const std::string path = tmp_path("basic.csv");
  {
    CsvWriter w(path, {"gamma", "w2", "note"}, 0xdeadbeefcafef00dull);
    w.row({"0.01", "0.5", "plain"});
    w.row_values({0.25, 1e-3, 13.0});
    w.row({"0.02", "0.125", "with,comma"});
  }
  const std::string text = slurp(path);
  CHECK(text ==
        "#schema=1 config=deadbeefcafef00d\n"
        "gamma,w2,note\n"
        "0.01,0.5,plain\n"
        "0.25,0.001,13\n"
        "0.02,0.125,\"with,comma\"\n");
  std::remove(path.c_str());
}

TEST_CASE("csv row width is enforced") {
  const std::string path = tmp_path("width.csv");
  CsvWriter w(path, {"a", "b"}, 1);
  CHECK_THROWS_AS(w.row({"only-one"}), input_error);
  w.close();
  std::remove(path.c_str());
}

TEST_CASE("svg output is byte-stable and self-contained") {
  const std::string p1 = tmp_path("plot1.svg");
  const std::string p2 = tmp_path("plot2.svg");
  SvgPlot plot;
  plot.x_label = "step size";
  plot.y_label = "distance";
  plot.log_x = true;
  plot.log_y = true;
  plot.vertical_marks = {0.01};
  SvgSeries s;
  s.label = "measured";
  s.color = "#1f6f8b";
  s.x = {0.002, 0.005, 0.01, 0.02};
  s.y = {0.05, 0.08, 0.11, 0.16};
  plot.series = {s};
  write_svg_plot(p1, plot);
  write_svg_plot(p2, plot);
  const std::string t1 = slurp(p1);
  CHECK(t1 == slurp(p2));
  CHECK(t1.find("<svg") != std::string::npos);
  CHECK(t1.find("polyline") != std::string::npos);
  CHECK(t1.find("measured") != std::string::npos);
  CHECK(t1.find("stroke-dasharray") != std::string::npos);  // the vertical mark
  CHECK(t1.rfind("</svg>\n") == t1.size() - 7);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("svg rejects series with nothing to draw") {
  SvgPlot plot;
  SvgSeries s;
  s.label = "empty";
  s.color = "#000000";
  s.x = {1.0, 2.0};
  s.y = {std::nan(""), std::nan("")};
  plot.series = {s};
  CHECK_THROWS_AS(write_svg_plot(tmp_path("bad.svg"), plot), input_error);

  // log scale with nonpositive data only is just as undrawable
  SvgPlot lp;
  lp.log_y = true;
  SvgSeries ls;
  ls.label = "nonpos";
  ls.color = "#000000";
  ls.x = {1.0, 2.0};
  ls.y = {-1.0, 0.0};
  lp.series = {ls};
  CHECK_THROWS_AS(write_svg_plot(tmp_path("bad2.svg"), lp), input_error);
}

}  // TEST_SUITE
