#include "bayeshead/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "bayeshead/error.hpp"
#include "bayeshead/svg.hpp"

namespace bayeshead {

namespace {

constexpr std::size_t kMaxSvgBytes = 2u * 1024u * 1024u;
const std::array<const char*, 4> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto p = path;
  p.replace_extension(".csv");
  return p;
}

void save_checked(const svg::Document& doc, const std::filesystem::path& path) {
  if (doc.str().size() > kMaxSvgBytes) throw Error("rendered SVG exceeds 2 MB: " + path.string());
  doc.save(path);
}

std::pair<double, double> padded_range(const Eigen::VectorXd& v, double pad_fraction) {
  double lo = v.minCoeff();
  double hi = v.maxCoeff();
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = (hi - lo) * pad_fraction;
  return {lo - pad, hi + pad};
}

Index bin_of(double v, double lo, double hi, Index n) {
  if (v < lo || v > hi) return -1;
  auto b = static_cast<Index>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
  return std::min(b, n - 1);
}

}  // namespace

double prior_density(double x, double prior_std) {
  const double z = x / prior_std;
  return std::exp(-0.5 * z * z) / (prior_std * std::sqrt(2.0 * std::numbers::pi));
}

Marginal1D marginal_1d(const SampleChain& chain, const std::string& name, const Prior& prior, int n_bins) {
  if (chain.n_draws() < 1) throw Error("marginal_1d needs at least one draw");
  if (n_bins < 1) throw Error("n_bins must be positive");
  const Index col = chain.layout.resolve(name);
  const Eigen::VectorXd v = chain.draws.col(col);
  const auto [lo, hi] = padded_range(v, 0.0);

  Marginal1D out;
  out.name = name;
  out.prior_std = prior.std_dev;
  out.n_samples = v.size();
  const double width = (hi - lo) / n_bins;
  for (int b = 0; b <= n_bins; ++b) out.edges.push_back(lo + width * b);
  std::vector<Index> counts(static_cast<std::size_t>(n_bins), 0);
  for (Index i = 0; i < v.size(); ++i) ++counts[static_cast<std::size_t>(bin_of(v(i), lo, hi, n_bins))];
  for (Index c : counts) out.density.push_back(static_cast<double>(c) / (static_cast<double>(v.size()) * width));

  const double curve_lo = std::min(lo, -4.0 * prior.std_dev);
  const double curve_hi = std::max(hi, 4.0 * prior.std_dev);
  constexpr int kCurvePoints = 201;
  for (int k = 0; k < kCurvePoints; ++k) {
    const double x = curve_lo + (curve_hi - curve_lo) * k / (kCurvePoints - 1);
    out.curve_x.push_back(x);
    out.curve_y.push_back(prior_density(x, prior.std_dev));
  }
  return out;
}

double Histogram2D::density(Index i, Index j) const {
  const double area = (x_edges[1] - x_edges[0]) * (y_edges[1] - y_edges[0]);
  return counts(i, j) / (static_cast<double>(n_samples) * area);
}

std::pair<Index, Index> Histogram2D::locate(double x, double y) const {
  const Index i = bin_of(x, x_edges.front(), x_edges.back(), counts.rows());
  const Index j = bin_of(y, y_edges.front(), y_edges.back(), counts.cols());
  if (i < 0 || j < 0) return {-1, -1};
  return {i, j};
}

bool Histogram2D::inside(int level, double x, double y) const {
  const auto [i, j] = locate(x, y);
  if (i < 0) return false;
  return counts(i, j) > 0 && density(i, j) >= density_thresholds[static_cast<std::size_t>(level)];
}

Histogram2D marginal_2d(const SampleChain& chain, const std::string& name_x, const std::string& name_y, int n_bins) {
  if (name_x == name_y) throw Error("marginal_2d needs two distinct parameters, got '" + name_x + "' twice");
  if (chain.n_draws() < 1) throw Error("marginal_2d needs at least one draw");
  const Index cx = chain.layout.resolve(name_x);
  const Index cy = chain.layout.resolve(name_y);
  const Eigen::VectorXd xs = chain.draws.col(cx);
  const Eigen::VectorXd ys = chain.draws.col(cy);
  const auto [x_lo, x_hi] = padded_range(xs, 0.1);
  const auto [y_lo, y_hi] = padded_range(ys, 0.1);

  Histogram2D h;
  h.name_x = name_x;
  h.name_y = name_y;
  h.n_samples = xs.size();
  h.correlation = sample_correlation(chain, cx, cy);
  for (int b = 0; b <= n_bins; ++b) {
    h.x_edges.push_back(x_lo + (x_hi - x_lo) * b / n_bins);
    h.y_edges.push_back(y_lo + (y_hi - y_lo) * b / n_bins);
  }
  h.counts = Eigen::MatrixXd::Zero(n_bins, n_bins);
  for (Index k = 0; k < xs.size(); ++k) {
    const auto [i, j] = h.locate(xs(k), ys(k));
    h.counts(i, j) += 1.0;
  }

  std::vector<double> sorted(h.counts.data(), h.counts.data() + h.counts.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = static_cast<double>(h.n_samples);
  for (std::size_t level = 0; level < kCredibleMasses.size(); ++level) {
    double cumulative = 0.0;
    double threshold_count = sorted.front();
    for (double c : sorted) {
      if (c == 0.0) break;
      cumulative += c;
      threshold_count = c;
      if (cumulative >= kCredibleMasses[level] * total) break;
    }
    const double area = (h.x_edges[1] - h.x_edges[0]) * (h.y_edges[1] - h.y_edges[0]);
    h.density_thresholds[level] = threshold_count / (total * area);
    h.enclosed_mass[level] = (h.counts.array() >= threshold_count).select(h.counts.array(), 0.0).sum() / total;
  }
  return h;
}

double sample_correlation(const SampleChain& chain, Index a, Index b) {
  const Eigen::VectorXd x = chain.draws.col(a).array() - chain.draws.col(a).mean();
  const Eigen::VectorXd y = chain.draws.col(b).array() - chain.draws.col(b).mean();
  const double denom = std::sqrt(x.squaredNorm() * y.squaredNorm());
  return denom > 0.0 ? x.dot(y) / denom : 0.0;
}

PairSelection select_pairs(const SampleChain& chain,
                           const std::vector<std::pair<std::string, std::string>>& candidates) {
  if (candidates.empty()) throw Error("pair selection needs at least one candidate pair");
  PairSelection out;
  double best_low = 2.0;
  double best_high = -1.0;
  for (const auto& [nx, ny] : candidates) {
    const double r = sample_correlation(chain, chain.layout.resolve(nx), chain.layout.resolve(ny));
    if (std::abs(r) < best_low) {
      best_low = std::abs(r);
      out.independent = {nx, ny};
      out.independent_corr = r;
    }
    if (std::abs(r) > best_high) {
      best_high = std::abs(r);
      out.correlated = {nx, ny};
      out.correlated_corr = r;
    }
  }
  return out;
}

void render_marginal_1d(const Marginal1D& m, const std::filesystem::path& path) {
  if (m.density.empty()) throw Error("empty marginal");
  double y_max = 0.0;
  for (double d : m.density) y_max = std::max(y_max, d);
  for (double d : m.curve_y) y_max = std::max(y_max, d);
  const double x_lo = std::min(m.edges.front(), m.curve_x.front());
  const double x_hi = std::max(m.edges.back(), m.curve_x.back());

  svg::Document doc(480, 360);
  svg::Frame frame(70, 40, 380, 250, x_lo, x_hi, 0.0, y_max * 1.1);
  doc.text(260, 24, "Prior vs. posterior for " + m.name, 14);
  std::vector<std::string> rows;
  for (std::size_t b = 0; b < m.density.size(); ++b) {
    const double x0 = frame.x(m.edges[b]);
    const double x1 = frame.x(m.edges[b + 1]);
    const double y0 = frame.y(m.density[b]);
    doc.rect(x0, y0, x1 - x0, frame.bottom() - y0, "black", "none", 0.85);
    rows.push_back("posterior," + fmt(0.5 * (m.edges[b] + m.edges[b + 1])) + "," + fmt(m.density[b]));
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < m.curve_x.size(); ++k) {
    pts.emplace_back(frame.x(m.curve_x[k]), frame.y(m.curve_y[k]));
    rows.push_back("prior," + fmt(m.curve_x[k]) + "," + fmt(m.curve_y[k]));
  }
  doc.polyline(pts, "#888888", 2.0);
  frame.draw_axes(doc, m.name, "density");
  doc.text(frame.right() - 6, frame.top() + 16, "prior N(0, " + fmt(m.prior_std) + "^2)", 10, "end");
  doc.text(frame.right() - 6, frame.top() + 30, "posterior (" + std::to_string(m.n_samples) + " draws)", 10, "end");
  save_checked(doc, path);
  svg::write_csv(sidecar(path), "series,x,density", rows);
}

void render_marginal_2d(const Histogram2D& h, const std::filesystem::path& path) {
  static const std::array<const char*, 3> shades{"#08306b", "#4292c6", "#c6dbef"};
  svg::Document doc(480, 480);
  svg::Frame frame(80, 40, 370, 370, h.x_edges.front(), h.x_edges.back(), h.y_edges.front(), h.y_edges.back());
  char title[160];
  std::snprintf(title, sizeof title, "%s vs. %s (corr %.3f)", h.name_x.c_str(), h.name_y.c_str(), h.correlation);
  doc.text(265, 24, title, 14);
  doc.comment(std::string("contours: ") + kContourMethod);

  const Index nx = h.counts.rows();
  const Index ny = h.counts.cols();
  auto region = [&](Index i, Index j) -> int {
    if (i < 0 || j < 0 || i >= nx || j >= ny || h.counts(i, j) == 0.0) return 3;
    for (int level = 0; level < 3; ++level) {
      if (h.density(i, j) >= h.density_thresholds[static_cast<std::size_t>(level)]) return level;
    }
    return 3;
  };

  std::vector<std::string> rows;
  for (Index i = 0; i < nx; ++i) {
    for (Index j = 0; j < ny; ++j) {
      if (h.counts(i, j) == 0.0) continue;
      const int r = region(i, j);
      const double x0 = frame.x(h.x_edges[static_cast<std::size_t>(i)]);
      const double x1 = frame.x(h.x_edges[static_cast<std::size_t>(i + 1)]);
      const double y0 = frame.y(h.y_edges[static_cast<std::size_t>(j + 1)]);
      const double y1 = frame.y(h.y_edges[static_cast<std::size_t>(j)]);
      doc.rect(x0, y0, x1 - x0, y1 - y0, r < 3 ? shades[static_cast<std::size_t>(r)] : "#eeeeee");
      const char* label = r == 0 ? "68.3" : r == 1 ? "95.4" : r == 2 ? "99.7" : "outside";
      rows.push_back(fmt(h.x_edges[static_cast<std::size_t>(i)]) + "," +
                     fmt(h.x_edges[static_cast<std::size_t>(i + 1)]) + "," +
                     fmt(h.y_edges[static_cast<std::size_t>(j)]) + "," +
                     fmt(h.y_edges[static_cast<std::size_t>(j + 1)]) + "," + fmt(h.counts(i, j)) + "," +
                     fmt(h.density(i, j)) + "," + label);
    }
  }
  // Region outlines: cell edges where membership changes.
  for (int level = 0; level < 3; ++level) {
    auto in = [&](Index i, Index j) { return region(i, j) <= level; };
    std::string d;
    for (Index i = 0; i < nx; ++i) {
      for (Index j = 0; j < ny; ++j) {
        if (!in(i, j)) continue;
        const double x0 = frame.x(h.x_edges[static_cast<std::size_t>(i)]);
        const double x1 = frame.x(h.x_edges[static_cast<std::size_t>(i + 1)]);
        const double ytop = frame.y(h.y_edges[static_cast<std::size_t>(j + 1)]);
        const double ybot = frame.y(h.y_edges[static_cast<std::size_t>(j)]);
        if (!in(i - 1, j)) d += "M" + svg::num(x0) + " " + svg::num(ybot) + "V" + svg::num(ytop);
        if (!in(i + 1, j)) d += "M" + svg::num(x1) + " " + svg::num(ybot) + "V" + svg::num(ytop);
        if (!in(i, j - 1)) d += "M" + svg::num(x0) + " " + svg::num(ybot) + "H" + svg::num(x1);
        if (!in(i, j + 1)) d += "M" + svg::num(x0) + " " + svg::num(ytop) + "H" + svg::num(x1);
      }
    }
    static const std::array<double, 3> widths{1.2, 0.6, 0.3};
    if (!d.empty()) doc.path(d, "none", "#222222", widths[static_cast<std::size_t>(level)], "contour-" + std::to_string(level));
  }
  frame.draw_axes(doc, h.name_x, h.name_y);
  save_checked(doc, path);
  svg::write_csv(sidecar(path), "x_lo,x_hi,y_lo,y_hi,count,density,region", rows);
}

void render_predictive(const PredictiveSummary& s, int truth, const std::string& title,
                       const std::filesystem::path& path) {
  const Index c = s.mean_probs.size();
  if (c < 1) throw Error("empty predictive summary");
  svg::Document doc(420, 340);
  svg::Frame frame(70, 40, 320, 230, -0.5, static_cast<double>(c) - 0.5, 0.0, 1.0);
  doc.text(230, 24, title, 14);
  std::vector<std::string> rows;
  for (Index k = 0; k < c; ++k) {
    const double x = frame.x(static_cast<double>(k));
    const double lo = std::max(0.0, s.mean_probs(k) - s.std_probs(k));
    const double hi = std::min(1.0, s.mean_probs(k) + s.std_probs(k));
    doc.line(x, frame.y(lo), x, frame.y(hi), "black", 1.5);
    doc.line(x - 6, frame.y(lo), x + 6, frame.y(lo), "black", 1.5);
    doc.line(x - 6, frame.y(hi), x + 6, frame.y(hi), "black", 1.5);
    doc.circle(x, frame.y(s.mean_probs(k)), 4, "black");
    doc.text(x, frame.bottom() + 32, "class " + std::to_string(k), 10);
    rows.push_back(std::to_string(k) + "," + fmt(s.mean_probs(k)) + "," + fmt(s.std_probs(k)) + "," +
                   (k == s.predicted ? "1" : "0") + "," + (k == truth ? "1" : "0"));
  }
  const double px = frame.x(static_cast<double>(s.predicted));
  doc.circle(px, frame.y(s.mean_probs(s.predicted)), 9, "none", "#1f77b4", 2.5, "pred");
  if (truth >= 0 && truth < c) {
    const double tx = frame.x(static_cast<double>(truth));
    const double ty = frame.y(s.mean_probs(truth)) - 18;
    std::string d;
    for (int k = 0; k < 10; ++k) {
      const double r = k % 2 == 0 ? 8.0 : 3.5;
      const double a = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
      d += (k == 0 ? "M" : "L") + svg::num(tx + r * std::cos(a)) + " " + svg::num(ty + r * std::sin(a));
    }
    doc.path(d + "Z", "#d62728", "#d62728", 1.0, "truth");
  }
  frame.draw_axes(doc, "", "probability");
  doc.text(frame.right(), frame.bottom() + 48, "blue ring: predicted, red star: true label", 9, "end");
  save_checked(doc, path);
  svg::write_csv(sidecar(path), "class,mean,std,predicted,truth", rows);
}

void render_reliability(const std::vector<NamedBins>& series, const std::filesystem::path& path) {
  if (series.empty()) throw Error("reliability diagram needs at least one series");
  svg::Document doc(440, 440);
  svg::Frame frame(70, 40, 340, 340, 0.0, 1.0, 0.0, 1.0);
  doc.text(240, 24, "Reliability diagram", 14);
  doc.line(frame.x(0), frame.y(0), frame.x(1), frame.y(1), "#999999", 1.0, "4,3");
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& [name, bins] = series[k];
    if (bins.total == 0 || bins.bins.empty()) throw Error("reliability series '" + name + "' is empty");
    const char* color = kPalette[k % kPalette.size()];
    std::vector<std::pair<double, double>> pts;
    for (const auto& b : bins.bins) {
      rows.push_back(name + "," + fmt(b.lo) + "," + fmt(b.hi) + "," + std::to_string(b.count) + "," +
                     fmt(b.mean_confidence) + "," + fmt(b.accuracy));
      if (b.count == 0) continue;
      const double w = frame.x(b.hi) - frame.x(b.lo);
      const double slot = w / static_cast<double>(series.size());
      const double x0 = frame.x(b.lo) + slot * static_cast<double>(k);
      doc.rect(x0, frame.y(b.accuracy), slot, frame.bottom() - frame.y(b.accuracy), color, "none", 0.25);
      pts.emplace_back(frame.x(b.mean_confidence), frame.y(b.accuracy));
    }
    doc.polyline(pts, color, 1.5);
    for (const auto& [x, y] : pts) doc.circle(x, y, 3.5, color);
    doc.text(frame.left() + 10, frame.top() + 16 + 14 * static_cast<double>(k),
             name + " (ECE " + svg::num(ece(bins), 3) + ")", 10, "start");
  }
  frame.draw_axes(doc, "confidence", "accuracy");
  save_checked(doc, path);
  svg::write_csv(sidecar(path), "series,lo,hi,count,mean_confidence,accuracy", rows);
}

void render_coverage(const std::vector<NamedCurve>& series, const std::filesystem::path& path) {
  if (series.empty()) throw Error("coverage plot needs at least one series");
  svg::Document doc(440, 380);
  svg::Frame frame(70, 40, 340, 280, 0.0, 1.0, 0.0, 1.0);
  doc.text(240, 24, "Selective prediction: accuracy vs. coverage", 14);
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& [name, curve] = series[k];
    if (curve.points.empty()) throw Error("coverage curve '" + name + "' is empty");
    const char* color = kPalette[k % kPalette.size()];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve.points) {
      rows.push_back(name + "," + fmt(p.threshold) + "," + fmt(p.coverage) + "," + std::to_string(p.answered) + "," +
                     (p.answered > 0 ? fmt(p.selective_accuracy) : std::string("nan")));
      if (p.answered == 0) continue;
      pts.emplace_back(frame.x(p.coverage), frame.y(p.selective_accuracy));
    }
    doc.polyline(pts, color, 2.0);
    for (const auto& [x, y] : pts) doc.circle(x, y, 2.5, color);
    doc.text(frame.left() + 10, frame.bottom() - 10 - 14 * static_cast<double>(k), name, 10, "start");
  }
  frame.draw_axes(doc, "coverage", "selective accuracy");
  save_checked(doc, path);
  svg::write_csv(sidecar(path), "series,threshold,coverage,answered,selective_accuracy", rows);
}

}  // namespace bayeshead
