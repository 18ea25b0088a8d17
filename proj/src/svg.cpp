#include "bayeshead/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bayeshead/error.hpp"

namespace bayeshead::svg {

std::string num(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) return "0";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

namespace {

std::string id_attr(const std::string& id) { return id.empty() ? "" : " id=\"" + escape(id) + "\""; }

std::string dash_attr(const std::string& dash) { return dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\""; }

}  // namespace

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke,
                    double opacity, const std::string& id) {
  body_ += "<rect" + id_attr(id) + " x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"";
  if (opacity < 1.0) body_ += " fill-opacity=\"" + num(opacity, 3) + "\"";
  body_ += "/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                    const std::string& dash) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"" + dash_attr(dash) + "/>\n";
}

void Document::circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke,
                      double stroke_width, const std::string& id) {
  body_ += "<circle" + id_attr(id) + " cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
           fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
}

void Document::polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke, double width,
                        const std::string& dash) {
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"" + dash_attr(dash) +
           " points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    body_ += (i ? " " : "") + num(points[i].first) + "," + num(points[i].second);
  }
  body_ += "\"/>\n";
}

void Document::path(const std::string& d, const std::string& fill, const std::string& stroke, double width,
                    const std::string& id) {
  body_ += "<path" + id_attr(id) + " d=\"" + d + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void Document::text(double x, double y, const std::string& content, double size, const std::string& anchor,
                    double rotate) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size, 1) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\"";
  if (rotate != 0.0) body_ += " transform=\"rotate(" + num(rotate, 1) + " " + num(x) + " " + num(y) + ")\"";
  body_ += ">" + escape(content) + "</text>\n";
}

void Document::comment(const std::string& content) {
  std::string safe = content;
  for (std::size_t pos = safe.find("--"); pos != std::string::npos; pos = safe.find("--")) safe.replace(pos, 2, "- ");
  body_ += "<!-- " + safe + " -->\n";
}

std::string Document::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(width_, 0) + "\" height=\"" + num(height_, 0) + "\" viewBox=\"0 0 " + num(width_, 0) + " " +
         num(height_, 0) + "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(width_, 0) + "\" height=\"" + num(height_, 0) +
         "\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

void Document::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << str();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Frame::Frame(double left, double top, double width, double height, double x_min, double x_max, double y_min,
             double y_max)
    : left_(left), top_(top), width_(width), height_(height), x_min_(x_min), x_max_(x_max), y_min_(y_min),
      y_max_(y_max) {
  if (!(x_max_ > x_min_)) x_max_ = x_min_ + 1.0;
  if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
}

double Frame::x(double v) const { return left_ + (v - x_min_) / (x_max_ - x_min_) * width_; }

double Frame::y(double v) const { return top_ + height_ - (v - y_min_) / (y_max_ - y_min_) * height_; }

void Frame::draw_axes(Document& doc, const std::string& x_label, const std::string& y_label, int n_ticks) const {
  doc.rect(left_, top_, width_, height_, "none", "black");
  char buf[32];
  for (int k = 0; k <= n_ticks; ++k) {
    const double fx = x_min_ + (x_max_ - x_min_) * k / n_ticks;
    const double px = x(fx);
    doc.line(px, bottom(), px, bottom() + 5, "black");
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(fx) < 1e-12 ? 0.0 : fx);
    doc.text(px, bottom() + 18, buf, 10);
    const double fy = y_min_ + (y_max_ - y_min_) * k / n_ticks;
    const double py = y(fy);
    doc.line(left_ - 5, py, left_, py, "black");
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(fy) < 1e-12 ? 0.0 : fy);
    doc.text(left_ - 8, py + 4, buf, 10, "end");
  }
  doc.text(left_ + width_ / 2, bottom() + 38, x_label, 12);
  doc.text(left_ - 45, top_ + height_ / 2, y_label, 12, "middle", -90.0);
}

void write_csv(const std::filesystem::path& path, const std::string& header, const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace bayeshead::svg
