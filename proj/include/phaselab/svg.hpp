#pragma once

#include <string>
#include <vector>

namespace phaselab::svg {

/// Minimal SVG 1.1 document builder. Coordinates are user units.
class Document {
public:
  Document(double width, double height);

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
            const std::string& dash = "");
  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& stroke,
                double width = 1.5, const std::string& dash = "", bool closed = false);
  void circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke = "none");
  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "black");
  void text(double x, double y, const std::string& content, double size = 12.0,
            const std::string& anchor = "middle", double rotate = 0.0);

  std::string str() const;
  void save(const std::string& path) const;

private:
  double width_, height_;
  std::vector<std::string> body_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

/// Line plot with markers, axes, tick labels and a legend.
Document line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                    const std::vector<Series>& series);

/// Box plots (median, quartiles, min/max whiskers), one box per group, grouped by `category`.
/// `groups[c][s]` is series s at category c.
Document box_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                   const std::vector<std::string>& categories, const std::vector<std::string>& series_names,
                   const std::vector<std::vector<std::vector<double>>>& groups);

Document histogram_chart(const std::string& title, const std::string& xlabel, const std::vector<double>& edges,
                         const std::vector<int>& counts);

/// Escapes &, <, >, and quotes for text nodes and attributes.
std::string escape(const std::string& s);

extern const std::vector<std::string> kPalette;

}  // namespace phaselab::svg
