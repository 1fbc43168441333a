#include "phaselab/svg.hpp"


#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phaselab::svg {

const std::vector<std::string> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

namespace {

// Six significant digits are plenty for drawing coordinates.
std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Frame {
  double left = 70, right = 20, top = 40, bottom = 55;
  double width, height;
  double x0, x1, y0, y1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

void axes(Document& doc, const Frame& f, const std::string& title, const std::string& xlabel,
          const std::string& ylabel, bool x_ticks = true) {
  doc.rect(f.left, f.top, f.width - f.left - f.right, f.height - f.top - f.bottom, "white");
  doc.text(f.width / 2, 22, title, 15);
  doc.text(f.width / 2, f.height - 12, xlabel, 12);
  doc.text(18, f.height / 2, ylabel, 12, "middle", -90);
  for (int i = 0; i <= 5; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    doc.line(f.left - 4, f.py(yv), f.left, f.py(yv), "black");
    doc.text(f.left - 6, f.py(yv) + 4, tick_label(yv), 10, "end");
    if (x_ticks) {
      const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
      doc.line(f.px(xv), f.height - f.bottom, f.px(xv), f.height - f.bottom + 4, "black");
      doc.text(f.px(xv), f.height - f.bottom + 16, tick_label(xv), 10);
    }
  }
}

}  // namespace

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                    const std::string& dash) {
  std::string e = "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
                  "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"";
  if (!dash.empty()) e += " stroke-dasharray=\"" + dash + "\"";
  body_.push_back(e + "/>");
}

void Document::polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& stroke,
                        double width, const std::string& dash, bool closed) {
  if (xs.size() != ys.size()) throw std::invalid_argument("polyline coordinate lengths differ");
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) pts += ' ';
    pts += num(xs[i]) + "," + num(ys[i]);
  }
  std::string e = std::string(closed ? "<polygon" : "<polyline") + " points=\"" + pts +
                  "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"";
  if (!dash.empty()) e += " stroke-dasharray=\"" + dash + "\"";
  body_.push_back(e + "/>");
}

void Document::circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke) {
  body_.push_back("<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + fill +
                  "\" stroke=\"" + stroke + "\"/>");
}

void Document::rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke) {
  body_.push_back("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
                  "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>");
}

void Document::text(double x, double y, const std::string& content, double size, const std::string& anchor,
                    double rotate) {
  std::string e = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
                  num(size) + "\" text-anchor=\"" + anchor + "\"";
  if (rotate != 0.0) e += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
  body_.push_back(e + ">" + escape(content) + "</text>");
}

std::string Document::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width_) + "\" height=\"" +
         num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n";
  for (const auto& e : body_) out += "  " + e + "\n";
  out += "</svg>\n";
  return out;
}

void Document::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << str();
}

Document line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                    const std::vector<Series>& series) {
  Frame f;
  f.width = 640;
  f.height = 420;
  f.x0 = f.y0 = 1e300;
  f.x1 = f.y1 = -1e300;
  for (const auto& s : series) {
    for (double x : s.x) f.x0 = std::min(f.x0, x), f.x1 = std::max(f.x1, x);
    for (double y : s.y) {
      if (!std::isfinite(y)) continue;
      f.y0 = std::min(f.y0, y);
      f.y1 = std::max(f.y1, y);
    }
  }
  if (f.x0 > f.x1) f.x0 = 0, f.x1 = 1, f.y0 = 0, f.y1 = 1;
  f.y0 = std::min(f.y0, 0.0);
  widen(f.x0, f.x1);
  widen(f.y0, f.y1);
  f.y1 *= 1.05;
  Document doc(f.width, f.height);
  axes(doc, f, title, xlabel, ylabel);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& color = kPalette[s % kPalette.size()];
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      xs.push_back(f.px(series[s].x[i]));
      ys.push_back(f.py(series[s].y[i]));
    }
    doc.polyline(xs, ys, color);
    for (std::size_t i = 0; i < xs.size(); ++i) doc.circle(xs[i], ys[i], 3, color);
    doc.text(f.width - f.right - 8, f.top + 16 + 14 * static_cast<double>(s), series[s].name, 11, "end");
    doc.line(f.width - f.right - 130, f.top + 12 + 14 * static_cast<double>(s), f.width - f.right - 110,
             f.top + 12 + 14 * static_cast<double>(s), color, 2);
  }
  return doc;
}

Document box_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                   const std::vector<std::string>& categories, const std::vector<std::string>& series_names,
                   const std::vector<std::vector<std::vector<double>>>& groups) {
  Frame f;
  f.width = 720;
  f.height = 440;
  f.x0 = 0;
  f.x1 = static_cast<double>(categories.size());
  f.y0 = 0;
  f.y1 = 1;
  for (const auto& cat : groups)
    for (const auto& g : cat)
      for (double v : g) f.y1 = std::max(f.y1, v);
  f.y1 *= 1.05;
  Document doc(f.width, f.height);
  axes(doc, f, title, xlabel, ylabel, false);
  const double slot = (f.px(1) - f.px(0));
  const std::size_t ns = std::max<std::size_t>(series_names.size(), 1);
  const double box_w = slot * 0.7 / static_cast<double>(ns);
  for (std::size_t c = 0; c < categories.size(); ++c) {
    doc.text(f.px(static_cast<double>(c) + 0.5), f.height - f.bottom + 16, categories[c], 10);
    for (std::size_t s = 0; s < groups[c].size(); ++s) {
      std::vector<double> v = groups[c][s];
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      auto q = [&v](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
      };
      const double x = f.px(static_cast<double>(c)) + slot * 0.15 + box_w * static_cast<double>(s);
      const auto& color = kPalette[s % kPalette.size()];
      const double cx = x + box_w / 2;
      doc.line(cx, f.py(v.front()), cx, f.py(q(0.25)), "black");
      doc.line(cx, f.py(q(0.75)), cx, f.py(v.back()), "black");
      doc.rect(x + 2, f.py(q(0.75)), box_w - 4, f.py(q(0.25)) - f.py(q(0.75)), color);
      doc.line(x + 2, f.py(q(0.5)), x + box_w - 2, f.py(q(0.5)), "red", 2);
    }
  }
  for (std::size_t s = 0; s < series_names.size(); ++s) {
    const double y = f.top + 14 + 14 * static_cast<double>(s);
    doc.rect(f.width - f.right - 120, y - 8, 10, 10, kPalette[s % kPalette.size()]);
    doc.text(f.width - f.right - 105, y + 1, series_names[s], 11, "start");
  }
  return doc;
}

Document histogram_chart(const std::string& title, const std::string& xlabel, const std::vector<double>& edges,
                         const std::vector<int>& counts) {
  Frame f;
  f.width = 640;
  f.height = 420;
  f.x0 = edges.empty() ? 0.0 : edges.front();
  f.x1 = edges.empty() ? 1.0 : edges.back();
  widen(f.x0, f.x1);
  f.y0 = 0;
  f.y1 = 1;
  for (int c : counts) f.y1 = std::max(f.y1, static_cast<double>(c));
  f.y1 *= 1.05;
  Document doc(f.width, f.height);
  axes(doc, f, title, xlabel, "count");
  for (std::size_t b = 0; b < counts.size() && b + 1 < edges.size(); ++b) {
    const double x = f.px(edges[b]);
    const double w = f.px(edges[b + 1]) - x;
    doc.rect(x, f.py(counts[b]), w, f.py(0) - f.py(counts[b]), kPalette[0], "white");
  }
  return doc;
}

}  // namespace phaselab::svg
