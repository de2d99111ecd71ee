#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace qbeat {

// Provenance stamp carried at the top of every output file.
struct Provenance {
  std::string config_hash;
  uint64_t seed = 0;
  std::string version;
};

// CSV writer: '#'-prefixed provenance header block, then a column header and
// rows. '.' decimal separator, LF line endings, UTF-8.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Provenance& prov,
            const std::string& columns);
  ~CsvWriter();

  void row(const std::vector<double>& values, int precision = 10);
  void raw_row(const std::string& line);
  void comment(const std::string& text);
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

std::string format_double(double v, int precision = 10);

// Minimal self-contained SVG line/scatter plots with error bars.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);

  void add_curve(const std::vector<double>& x, const std::vector<double>& y,
                 const std::string& color, const std::string& label = "");
  void add_points(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& yerr, const std::string& color,
                  const std::string& label = "");
  void write(const std::string& path, const Provenance& prov) const;

 private:
  struct Series {
    std::vector<double> x, y, yerr;
    std::string color, label;
    bool points;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
};

}  // namespace qbeat
