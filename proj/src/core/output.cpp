#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace qbeat {

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const Provenance& prov,
                     const std::string& columns)
    : out_(path, std::ios::binary) {
  out_ << "# config_hash=" << prov.config_hash << "\n";
  out_ << "# seed=" << prov.seed << "\n";
  out_ << "# version=" << prov.version << "\n";
  out_ << columns << "\n";
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<double>& values, int precision) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ",";
    out_ << format_double(values[i], precision);
  }
  out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)),
      ylabel_(std::move(ylabel)) {}

void SvgPlot::add_curve(const std::vector<double>& x,
                        const std::vector<double>& y, const std::string& color,
                        const std::string& label) {
  series_.push_back({x, y, {}, color, label, false});
}

void SvgPlot::add_points(const std::vector<double>& x,
                         const std::vector<double>& y,
                         const std::vector<double>& yerr,
                         const std::string& color, const std::string& label) {
  series_.push_back({x, y, yerr, color, label, true});
}

void SvgPlot::write(const std::string& path, const Provenance& prov) const {
  const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 55;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series_)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double e = s.points && i < s.yerr.size() ? s.yerr[i] : 0.0;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  if (!(xmax > xmin)) {
    xmin = 0;
    xmax = 1;
  }
  if (!(ymax > ymin)) {
    ymin = 0;
    ymax = 1;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  o << "<!-- config_hash=" << prov.config_hash << " seed=" << prov.seed
    << " version=" << prov.version << " -->\n";
  o << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       "font-size=\"15\" font-family=\"sans-serif\">" << title_ << "</text>\n";

  // axes box and ticks
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
    << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << H - mb << "\" x2=\"" << px(xv)
      << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
      << "\" text-anchor=\"middle\" font-size=\"11\" "
         "font-family=\"sans-serif\">" << format_double(xv, 4) << "</text>\n";
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml
      << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
      << format_double(yv, 4) << "</text>\n";
  }
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"13\" "
       "font-family=\"sans-serif\">" << xlabel_ << "</text>\n";
  o << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
    << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
       "transform=\"rotate(-90 16 " << (mt + H - mb) / 2 << ")\">" << ylabel_
    << "</text>\n";

  double legend_y = mt + 16;
  for (const auto& s : series_) {
    if (s.points) {
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        if (i < s.yerr.size() && s.yerr[i] > 0.0) {
          o << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y[i] - s.yerr[i])
            << "\" x2=\"" << px(s.x[i]) << "\" y2=\"" << py(s.y[i] + s.yerr[i])
            << "\" stroke=\"" << s.color << "\"/>\n";
        }
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.2\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        o << px(s.x[i]) << "," << py(s.y[i]) << " ";
      }
      o << "\"/>\n";
    }
    if (!s.label.empty()) {
      o << "<line x1=\"" << W - mr - 120 << "\" y1=\"" << legend_y << "\" x2=\""
        << W - mr - 100 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
      o << "<text x=\"" << W - mr - 94 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label
        << "</text>\n";
      legend_y += 16;
    }
  }
  o << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  f << o.str();
}

}  // namespace qbeat
