#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace bayeshead::svg {

/// Fixed-precision number formatting used for every coordinate, so output is
/// byte-stable for identical input.
std::string num(double v, int decimals = 2);

/// Escapes &, <, >, " for text and attribute content.
std::string escape(const std::string& text);

/// Minimal SVG 1.1 document builder.
class Document {
 public:
  Document(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none",
            double opacity = 1.0, const std::string& id = "");
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
            const std::string& dash = "");
  void circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke = "none",
              double stroke_width = 1.0, const std::string& id = "");
  void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke, double width = 1.5,
                const std::string& dash = "");
  void path(const std::string& d, const std::string& fill, const std::string& stroke, double width = 1.0,
            const std::string& id = "");
  void text(double x, double y, const std::string& content, double size = 12.0, const std::string& anchor = "middle",
            double rotate = 0.0);
  void comment(const std::string& content);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  double width_;
  double height_;
  std::string body_;
};

/// Linear data-to-pixel mapping for a rectangular plot area with axes.
class Frame {
 public:
  Frame(double left, double top, double width, double height, double x_min, double x_max, double y_min, double y_max);

  double x(double v) const;
  double y(double v) const;
  double left() const { return left_; }
  double top() const { return top_; }
  double right() const { return left_ + width_; }
  double bottom() const { return top_ + height_; }

  /// Box, ticks, tick labels and axis titles.
  void draw_axes(Document& doc, const std::string& x_label, const std::string& y_label, int n_ticks = 5) const;

 private:
  double left_, top_, width_, height_;
  double x_min_, x_max_, y_min_, y_max_;
};

/// Writes `rows` (already formatted) under `header` to a CSV file.
void write_csv(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& rows);

}  // namespace bayeshead::svg
