#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace scorescope::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Plot area in pixels; data x and y both start at 0.
struct Frame {
  double left, top, width, height;
  double y_max;

  double x(double data) const { return left + data * width; }
  double y(double data) const {
    return top + height - (y_max > 0.0 ? data / y_max : 0.0) * height;
  }
};

void axes(std::ostringstream& os, const Frame& f, const std::string& label) {
  os << "  <rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
     << num(f.width) << "\" height=\"" << num(f.height)
     << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "  <line x1=\"" << num(f.x(t)) << "\" y1=\"" << num(f.top + f.height)
       << "\" x2=\"" << num(f.x(t)) << "\" y2=\"" << num(f.top + f.height + 4)
       << "\" stroke=\"#444\"/>\n";
    os << "  <text x=\"" << num(f.x(t)) << "\" y=\"" << num(f.top + f.height + 16)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  os << "  <text x=\"" << num(f.left) << "\" y=\"" << num(f.top - 6)
     << "\" font-size=\"12\">" << xml_escape(label) << "</text>\n";
  os << "  <text x=\"" << num(f.left - 4) << "\" y=\"" << num(f.top + 4)
     << "\" font-size=\"10\" text-anchor=\"end\">" << num(f.y_max) << "</text>\n";
}

void panel(std::ostringstream& os, const Frame& f, const Rdc& rdc,
           std::span<const double> values, const RdcDiagnosis* diagnosis,
           const std::string& label) {
  if (diagnosis && diagnosis->threshold_band) {
    const auto& band = *diagnosis->threshold_band;
    os << "  <rect class=\"band\" x=\"" << num(f.x(band.lower)) << "\" y=\""
       << num(f.top) << "\" width=\"" << num(f.x(band.upper) - f.x(band.lower))
       << "\" height=\"" << num(f.height)
       << "\" fill=\"#2a9d8f\" fill-opacity=\"0.25\"/>\n";
  }
  for (std::size_t i = 0; i < rdc.bin_count(); ++i) {
    if (values[i] <= 0.0) continue;
    const double x0 = f.x(rdc.edges[i]);
    const double x1 = f.x(rdc.edges[i + 1]);
    const double y = f.y(values[i]);
    os << "  <rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\""
       << num(x1 - x0) << "\" height=\"" << num(f.top + f.height - y)
       << "\" fill=\"#457b9d\"/>\n";
  }
  if (diagnosis) {
    for (const auto& m : diagnosis->evidence.modes.modes) {
      os << "  <line class=\"mode\" x1=\"" << num(f.x(m.location)) << "\" y1=\""
         << num(f.top) << "\" x2=\"" << num(f.x(m.location)) << "\" y2=\""
         << num(f.top + f.height)
         << "\" stroke=\"#e63946\" stroke-dasharray=\"4 3\"/>\n";
    }
  }
  axes(os, f, label);
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string rdc_svg(const Rdc& rdc, const RdcDiagnosis* diagnosis,
                    const std::string& title) {
  const auto freq = rdc.frequencies();
  const auto logs = log_view(rdc);
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kSvgWidth
     << "\" height=\"" << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << ' '
     << kSvgHeight << "\">\n"
     << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string heading = title;
  if (diagnosis) heading += "  [" + std::string(to_string(diagnosis->pattern)) + "]";
  os << "  <text x=\"400\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
     << xml_escape(heading) << "</text>\n";

  const double fmax = freq.empty() ? 0.0 : *std::max_element(freq.begin(), freq.end());
  const double lmax = logs.empty() ? 0.0 : *std::max_element(logs.begin(), logs.end());
  panel(os, Frame{50, 50, 320, 310, fmax}, rdc, freq, diagnosis, "frequency");
  panel(os, Frame{450, 50, 320, 310, lmax}, rdc, logs, diagnosis, "log(1 + count)");
  os << "</svg>\n";
  return os.str();
}

std::string curve_svg(double baseline, std::span<const CurvePoint> points) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kSvgWidth
     << "\" height=\"" << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << ' '
     << kSvgHeight << "\">\n"
     << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "  <text x=\"400\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
     << "impacted traffic upper bound, baseline accuracy " << num(baseline)
     << "</text>\n";

  // x spans [0, 1] in accuracy; y spans [0, 1] in disagreement.
  const Frame f{60, 50, 700, 310, 1.0};
  if (!points.empty()) {
    os << "  <polyline fill=\"none\" stroke=\"#457b9d\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i) os << ' ';
      os << num(f.x(points[i].accuracy)) << ',' << num(f.y(points[i].upper_bound));
    }
    os << "\"/>\n";
    for (const auto& p : points) {
      os << "  <circle cx=\"" << num(f.x(p.accuracy)) << "\" cy=\""
         << num(f.y(p.upper_bound)) << "\" r=\"2.5\" fill=\"#1d3557\"/>\n";
    }
  }
  axes(os, f, "max disagreement vs new-model accuracy");
  os << "</svg>\n";
  return os.str();
}

}  // namespace scorescope::cli
