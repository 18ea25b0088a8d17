#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bayeshead/eval.hpp"
#include "bayeshead/model.hpp"
#include "bayeshead/predict.hpp"
#include "bayeshead/sampler.hpp"

namespace bayeshead {

/// Prior density curve overlaid on a density-normalised posterior histogram.
struct Marginal1D {
  std::string name;
  double prior_std = 1.0;
  std::vector<double> edges;    // n_bins + 1
  std::vector<double> density;  // n_bins, integrates to 1
  std::vector<double> curve_x;
  std::vector<double> curve_y;
  Index n_samples = 0;
};

double prior_density(double x, double prior_std);

Marginal1D marginal_1d(const SampleChain& chain, const std::string& name, const Prior& prior, int n_bins = 40);

inline constexpr std::array<double, 3> kCredibleMasses{0.683, 0.954, 0.997};

/// 2-D histogram with highest-density credible regions.
struct Histogram2D {
  std::string name_x;
  std::string name_y;
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  Eigen::MatrixXd counts;                      // (x bin, y bin)
  std::array<double, 3> density_thresholds{};  // per credible mass, descending
  std::array<double, 3> enclosed_mass{};       // sample fraction in bins at or above each threshold
  Index n_samples = 0;
  double correlation = 0.0;

  double density(Index i, Index j) const;
  /// Bin of a point, or {-1,-1} when outside the grid.
  std::pair<Index, Index> locate(double x, double y) const;
  /// Whether the point falls in the credible region for kCredibleMasses[level].
  bool inside(int level, double x, double y) const;
};

inline constexpr const char* kContourMethod = "histogram highest-density regions (sorted bin densities, cumulative mass)";

/// 60x60 histogram over the samples' bounding box padded by 10%.
Histogram2D marginal_2d(const SampleChain& chain, const std::string& name_x, const std::string& name_y,
                        int n_bins = 60);

double sample_correlation(const SampleChain& chain, Index a, Index b);

struct PairSelection {
  std::pair<std::string, std::string> independent;  // smallest |correlation|
  std::pair<std::string, std::string> correlated;   // largest |correlation|
  double independent_corr = 0.0;
  double correlated_corr = 0.0;
};

PairSelection select_pairs(const SampleChain& chain, const std::vector<std::pair<std::string, std::string>>& candidates);

// Renderers write `path` (SVG) and `path` with extension `.csv` (plotted series).
void render_marginal_1d(const Marginal1D& marginal, const std::filesystem::path& path);
void render_marginal_2d(const Histogram2D& hist, const std::filesystem::path& path);

/// Mean +/- 1 sigma per class. The predicted class marker has id `pred`, the
/// true-label marker id `truth` (omitted when truth < 0).
void render_predictive(const PredictiveSummary& summary, int truth, const std::string& title,
                       const std::filesystem::path& path);

using NamedBins = std::pair<std::string, ReliabilityBins>;
using NamedCurve = std::pair<std::string, CoverageCurve>;

void render_reliability(const std::vector<NamedBins>& series, const std::filesystem::path& path);
void render_coverage(const std::vector<NamedCurve>& series, const std::filesystem::path& path);

}  // namespace bayeshead
