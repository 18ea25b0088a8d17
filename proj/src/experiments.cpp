#include "bayeshead/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "bayeshead/diagnostics.hpp"
#include "bayeshead/eval.hpp"
#include "bayeshead/laplace.hpp"
#include "bayeshead/predict.hpp"
#include "bayeshead/random.hpp"
#include "bayeshead/report.hpp"
#include "bayeshead/serialize.hpp"
#include "bayeshead/svg.hpp"

namespace bayeshead {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kSplitStream = 1, kInitStream = 2, kLaplaceDrawStream = 3, kOptimizerStream = 4 };
constexpr std::uint64_t kChainStream = 10;

struct Prepared {
  Dataset train;
  Dataset eval;
  std::vector<Index> eval_rows;  // indices into the loaded file
  Architecture arch;
  json data;
};

class Run {
 public:
  Run(const RunConfig& cfg, fs::path out, std::ostream* log) : cfg_(cfg), out_(std::move(out)), log_(log) {}

  void say(const std::string& line) const {
    if (log_) *log_ << line << '\n' << std::flush;
  }

  fs::path file(const std::string& name) {
    fs::path p = out_ / name;
    files_.insert(name);
    if (p.extension() == ".svg") {
      files_.insert(fs::path(name).replace_extension(".csv").string());
    }
    return p;
  }

  RunResult finish(json metrics) {
    const fs::path path = file("metrics.json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << metrics.dump(2) << '\n';
    if (!out) throw Error("write failed: '" + path.string() + "'");
    RunResult result{std::move(metrics), {}};
    for (const auto& f : files_) result.files.emplace_back(f);
    return result;
  }

  const RunConfig& cfg() const { return cfg_; }

 private:
  const RunConfig& cfg_;
  fs::path out_;
  std::ostream* log_;
  std::set<std::string> files_;
};

Dataset with_meta(Dataset ds, const RunConfig& cfg) {
  if (!cfg.qa_text_file) return ds;
  const auto records = load_qa_jsonl(*cfg.qa_text_file);
  if (static_cast<Index>(records.size()) != ds.size()) {
    throw DataError("qa_text '" + cfg.qa_text_file->string() + "' has " + std::to_string(records.size()) +
                    " records but the feature file has " + std::to_string(ds.size()) + " rows");
  }
  ds.meta.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].label != ds.labels[i]) {
      throw DataError("qa_text record " + std::to_string(i + 1) + " has label " + std::to_string(records[i].label) +
                      " but the feature file says " + std::to_string(ds.labels[i]));
    }
    ds.meta[i].question = records[i].question;
    ds.meta[i].options = records[i].options;
    ds.meta[i].source_id = std::to_string(i);
  }
  return ds;
}

Prepared prepare(const RunConfig& cfg, const Run& run) {
  Dataset ds;
  try {
    ds = load_dataset(cfg.data_file, cfg.format);
  } catch (const DataError& e) {
    std::string msg = e.what();
    if (cfg.format == DataFormat::feature_binary) {
      msg += " (feature files are produced by embed-extract; a ready-made fixture ships as data/toyqa_features.bhft)";
    }
    throw DataError(msg);
  }
  ds = with_meta(std::move(ds), cfg);

  const Split parts = split(ds, {cfg.train_fraction, derive_seed(cfg.seed, kSplitStream)});
  Dataset train = parts.train;
  Dataset test = parts.test;
  if (cfg.standardize) {
    auto s = standardize(train, test);
    train = std::move(s.train);
    test = std::move(s.test);
  }
  const bool on_test = cfg.eval_split == EvalSplit::test;

  Architecture arch = cfg.model == ModelKind::mlp ? Architecture::mlp(ds.dim(), cfg.hidden_dim, ds.n_classes)
                                                  : Architecture::head(ds.dim(), ds.n_classes);
  run.say("data: " + std::to_string(ds.size()) + " rows (" + std::to_string(train.size()) + " train, " +
          std::to_string(test.size()) + " test), D=" + std::to_string(ds.dim()) +
          ", C=" + std::to_string(ds.n_classes));
  run.say("model: " + arch.describe() + ", parameters: " + std::to_string(arch.n_params()));

  json data = {{"n_rows", ds.size()},
               {"dim", ds.dim()},
               {"n_classes", ds.n_classes},
               {"n_train", train.size()},
               {"n_test", test.size()},
               {"train_rows", parts.train_rows},
               {"test_rows", parts.test_rows},
               {"standardized", cfg.standardize}};
  Dataset eval = on_test ? test : train;
  std::vector<Index> eval_rows = on_test ? parts.test_rows : parts.train_rows;
  return {std::move(train), std::move(eval), std::move(eval_rows), std::move(arch), std::move(data)};
}

json decisions(const RunConfig& cfg) {
  return {{"confidence_definition", kConfidenceDefinition},
          {"n_bins", cfg.n_bins},
          {"binning", "equal-width bins over [0,1], last bin right-closed"},
          {"coverage_thresholds", "sorted unique confidences of the evaluated examples"},
          {"abstention_rule", "answer when confidence >= threshold"},
          {"threshold", cfg.threshold},
          {"prior", "isotropic Gaussian N(0, prior_std^2 I), normalising constant dropped"},
          {"eval_split", cfg.eval_split == EvalSplit::test ? "test" : "train"},
          {"contour_method", kContourMethod},
          {"credible_masses", kCredibleMasses},
          {"fisher_formula", kLaplacePrecisionFormula},
          {"fisher_definition", "F_jj = (1/N) sum_i (d/dtheta_j log p(y_i | x_i, theta))^2 at the MAP"}};
}

json model_json(const Architecture& arch, const RunConfig& cfg) {
  return {{"kind", arch.kind() == ModelKind::mlp ? "mlp" : "head"},
          {"description", arch.describe()},
          {"n_params", arch.n_params()},
          {"prior_std", cfg.prior_std}};
}

HmcConfig hmc_config(const SamplerSettings& s, std::uint64_t seed) {
  HmcConfig c;
  c.n_warmup = s.n_warmup;
  c.n_samples = s.n_samples;
  c.seed = seed;
  c.target_accept = s.target_accept;
  c.max_tree_depth = s.max_tree_depth;
  c.algorithm = s.algorithm;
  c.mass = s.mass;
  c.n_leapfrog = s.n_leapfrog;
  c.step_size = s.step_size;
  return c;
}

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

struct Sampled {
  SampleChain pooled;
  json metrics;
};

Sampled sample_posterior(const RunConfig& cfg, const Prepared& p, Run& run) {
  const Target target = Target::posterior(p.arch, p.train, Prior{cfg.prior_std});
  std::vector<SampleChain> chains;
  json per_chain = json::array();
  for (int k = 0; k < cfg.sampler.n_chains; ++k) {
    const HmcConfig hc = hmc_config(cfg.sampler, derive_seed(cfg.seed, kChainStream + 2 * k));
    const Eigen::VectorXd init = default_init(p.arch.n_params(), derive_seed(cfg.seed, kChainStream + 2 * k + 1));
    const auto start = std::chrono::steady_clock::now();
    SampleChain chain = sample(target, init, hc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    chain.layout = p.arch.layout();
    const double mean_depth =
        chain.tree_depths.empty()
            ? 0.0
            : std::accumulate(chain.tree_depths.begin(), chain.tree_depths.end(), 0.0) / chain.tree_depths.size();
    char buf[160];
    std::snprintf(buf, sizeof buf, "chain %d: %lld draws, accept %.3f, step %.4g, divergences %lld, %.1f s", k,
                  static_cast<long long>(chain.n_draws()), chain.mean_accept(), chain.step_size_final,
                  static_cast<long long>(chain.divergences), secs);
    run.say(buf);
    per_chain.push_back({{"seed", chain.seed},
                         {"mean_accept", chain.mean_accept()},
                         {"divergences", chain.divergences},
                         {"step_size", chain.step_size_final},
                         {"mean_tree_depth", mean_depth}});
    chains.push_back(std::move(chain));
  }
  const ChainDiagnostics diag = diagnostics(chains);
  double max_rhat = 0.0;
  double min_ess = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < diag.split_rhat.size(); ++j) {
    if (std::isfinite(diag.split_rhat(j))) max_rhat = std::max(max_rhat, diag.split_rhat(j));
    if (std::isfinite(diag.ess(j))) min_ess = std::min(min_ess, diag.ess(j));
  }
  SampleChain pooled = chains.front();
  const Index s = pooled.n_draws();
  pooled.draws.resize(s * static_cast<Index>(chains.size()), pooled.n_params());
  pooled.accept_stats.clear();
  pooled.tree_depths.clear();
  pooled.divergences = 0;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    pooled.draws.middleRows(static_cast<Index>(k) * s, s) = chains[k].draws;
    pooled.accept_stats.insert(pooled.accept_stats.end(), chains[k].accept_stats.begin(), chains[k].accept_stats.end());
    pooled.tree_depths.insert(pooled.tree_depths.end(), chains[k].tree_depths.begin(), chains[k].tree_depths.end());
    pooled.divergences += chains[k].divergences;
  }
  json metrics = {{"algorithm", cfg.sampler.algorithm == SamplerKind::nuts ? "nuts" : "hmc"},
                  {"n_chains", cfg.sampler.n_chains},
                  {"n_draws_total", pooled.n_draws()},
                  {"chains", per_chain},
                  {"mean_accept", diag.mean_accept},
                  {"divergences", diag.divergences},
                  {"max_split_rhat", max_rhat},
                  {"min_ess", finite_or(min_ess, 0.0)}};
  return {std::move(pooled), std::move(metrics)};
}

std::string truth_title(const std::string& prefix, const Prepared& p, Index entry) {
  std::string title = prefix + " entry " + std::to_string(entry) + " (row " + std::to_string(p.eval_rows[entry]) + ")";
  if (!p.eval.meta.empty() && !p.eval.meta[entry].question.empty()) title += ": " + p.eval.meta[entry].question;
  return title;
}

void check_entries(const RunConfig& cfg, const Prepared& p) {
  for (const Index e : cfg.entries) {
    if (e >= p.eval.size()) {
      throw ValidationError({"eval.entries: entry " + std::to_string(e) + " is out of range (evaluation split has " +
                             std::to_string(p.eval.size()) + " rows)"});
    }
  }
}

json entry_json(const PredictiveSummary& s, Index entry, const Prepared& p) {
  json j = {{"entry", entry},
            {"row", p.eval_rows[entry]},
            {"mean", std::vector<double>(s.mean_probs.data(), s.mean_probs.data() + s.mean_probs.size())},
            {"std", std::vector<double>(s.std_probs.data(), s.std_probs.data() + s.std_probs.size())},
            {"predicted", s.predicted},
            {"confidence", s.confidence},
            {"truth", p.eval.labels[entry]}};
  return j;
}

void write_predictions(const std::vector<PredictiveSummary>& summaries, const Prepared& p, const fs::path& path) {
  const Index c = p.eval.n_classes;
  std::string header = "row_id";
  for (Index k = 0; k < c; ++k) header += ",mean_p" + std::to_string(k);
  for (Index k = 0; k < c; ++k) header += ",std_p" + std::to_string(k);
  header += ",predicted,confidence,label";
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    std::string row = std::to_string(p.eval_rows[i]);
    for (Index k = 0; k < c; ++k) row += "," + svg::num(s.mean_probs(k), 9);
    for (Index k = 0; k < c; ++k) row += "," + svg::num(s.std_probs(k), 9);
    row += "," + std::to_string(s.predicted) + "," + svg::num(s.confidence, 9) + "," +
           std::to_string(p.eval.labels[i]);
    rows.push_back(std::move(row));
  }
  svg::write_csv(path, header, rows);
}

json block_with_selective(const EvaluationBlock& block) {
  json j = to_json(block);
  j["selective_accuracy_at_50pct_coverage"] = selective_accuracy_at(block.coverage, 0.5);
  return j;
}

std::vector<std::pair<std::string, std::string>> default_pairs(const Architecture& arch) {
  std::vector<std::string> names;
  for (const auto& t : arch.layout().tensors()) {
    if (t.name != "W1" && t.name != "W2") continue;
    for (Index i = 0; i < t.size(); ++i) names.push_back(arch.layout().coordinate_name(t.offset + i));
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) pairs.emplace_back(names[a], names[b]);
  }
  return pairs;
}

json posterior_plots(const RunConfig& cfg, const Prepared& p, const SampleChain& chain, Run& run) {
  json out = json::object();
  json marginals = json::array();
  for (const auto& name : cfg.marginals) {
    const Marginal1D m = marginal_1d(chain, name, Prior{cfg.prior_std});
    render_marginal_1d(m, run.file("marginal_" + file_stem(name) + ".svg"));
    marginals.push_back({{"name", name}, {"edges", m.edges}, {"density", m.density}});
  }
  out["marginals"] = marginals;

  auto candidates = cfg.pair_candidates;
  if (candidates.empty() && p.arch.kind() == ModelKind::mlp) candidates = default_pairs(p.arch);
  if (!candidates.empty()) {
    const PairSelection sel = select_pairs(chain, candidates);
    json pairs = json::object();
    for (const auto& [label, names, corr] :
         {std::tuple{std::string("independent"), sel.independent, sel.independent_corr},
          std::tuple{std::string("correlated"), sel.correlated, sel.correlated_corr}}) {
      const Histogram2D h = marginal_2d(chain, names.first, names.second);
      render_marginal_2d(h, run.file("pair_" + label + ".svg"));
      pairs[label] = {{"x", names.first},
                      {"y", names.second},
                      {"correlation", corr},
                      {"density_thresholds", h.density_thresholds},
                      {"enclosed_mass", h.enclosed_mass}};
    }
    pairs["n_candidates"] = candidates.size();
    out["pairs"] = pairs;
  }
  return out;
}

RunResult run_sampled(const RunConfig& cfg, Run& run) {
  Prepared p = prepare(cfg, run);
  check_entries(cfg, p);
  Sampled sampled = sample_posterior(cfg, p, run);
  const SampleChain& chain = sampled.pooled;
  save_chain(chain, run.file("chain.bhsc"));
  if (cfg.chain_csv) save_chain_csv(chain, run.file("chain.csv"));

  const auto summaries = batch_predict(p.arch, chain, p.eval);
  const EvaluationBlock block = evaluate(summaries, p.eval.labels, cfg.n_bins);
  write_predictions(summaries, p, run.file("predictions.csv"));
  render_reliability({{"hmc", block.reliability}}, run.file("reliability.svg"));
  render_coverage({{"hmc", block.coverage}}, run.file("coverage.svg"));

  json entries = json::array();
  for (const Index e : cfg.entries) {
    render_predictive(summaries[e], p.eval.labels[e], truth_title("posterior predictive,", p, e),
                      run.file("entry_" + std::to_string(e) + ".svg"));
    entries.push_back(entry_json(summaries[e], e, p));
  }
  const json plots = posterior_plots(cfg, p, chain, run);

  char buf[160];
  std::snprintf(buf, sizeof buf, "accuracy %.4f, ECE %.4f, mean confidence %.4f", block.accuracy, block.ece,
                block.mean_confidence);
  run.say(buf);

  Index answered = 0;
  for (const auto& s : summaries) answered += decide(s, cfg.threshold).abstain ? 0 : 1;
  json metrics = {{"experiment", to_string(cfg.experiment)},
                  {"seed", cfg.seed},
                  {"config", cfg.to_json()},
                  {"decisions", decisions(cfg)},
                  {"data", p.data},
                  {"model", model_json(p.arch, cfg)},
                  {"sampler", sampled.metrics},
                  {"evaluation", block_with_selective(block)},
                  {"abstention", {{"threshold", cfg.threshold},
                                  {"answered", answered},
                                  {"coverage", static_cast<double>(answered) / summaries.size()}}},
                  {"entries", entries}};
  metrics.update(plots);
  return run.finish(std::move(metrics));
}

struct LaplaceFit {
  MapEstimate map;
  GaussianPosterior posterior;
  SampleChain draws;
  json metrics;
};

json summary_stats(const Eigen::VectorXd& v) {
  return {{"min", v.minCoeff()}, {"max", v.maxCoeff()}, {"mean", v.mean()}};
}

LaplaceFit fit_laplace(const RunConfig& cfg, const Prepared& p, Run& run) {
  OptimizerConfig oc;
  oc.learning_rate = cfg.laplace.learning_rate;
  oc.steps = cfg.laplace.steps;
  oc.batch_size = cfg.laplace.batch_size;
  oc.tolerance = cfg.laplace.tolerance;
  oc.seed = derive_seed(cfg.seed, kOptimizerStream);
  const Prior prior{cfg.prior_std};
  const Eigen::VectorXd init = default_init(p.arch.n_params(), derive_seed(cfg.seed, kInitStream));
  MapEstimate map = train_map(p.arch, p.train, prior, oc, init);
  map.theta_map = p.arch.wrap(map.theta_map.values);
  const Eigen::VectorXd fisher = empirical_fisher_diag(p.arch, map.theta_map.values, p.train);
  GaussianPosterior posterior =
      laplace_posterior(map.theta_map, fisher, prior, p.train.size(), cfg.laplace.precision_floor);
  SampleChain draws = sample_gaussian(posterior, cfg.laplace.n_mc_samples, derive_seed(cfg.seed, kLaplaceDrawStream));
  draws.layout = p.arch.layout();

  char buf[160];
  std::snprintf(buf, sizeof buf, "MAP: %lld steps, gradient norm %.3g, %s", static_cast<long long>(map.n_steps),
                map.grad_norm, map.stop == StopReason::converged ? "converged" : "step budget exhausted");
  run.say(buf);

  json metrics = {{"s_mc", cfg.laplace.n_mc_samples},
                  {"precision_floor", cfg.laplace.precision_floor},
                  {"optimizer",
                   {{"learning_rate", oc.learning_rate},
                    {"steps_taken", map.n_steps},
                    {"grad_norm", map.grad_norm},
                    {"stop", map.stop == StopReason::converged ? "converged" : "budget_exhausted"},
                    {"final_objective", map.trace.empty() ? json(nullptr) : json(map.trace.back())}}},
                  {"fisher_diag", summary_stats(fisher)},
                  {"posterior_variance", summary_stats(posterior.variance)}};
  return {std::move(map), std::move(posterior), std::move(draws), std::move(metrics)};
}

std::vector<PredictiveSummary> point_predictions(const Architecture& arch, const Eigen::VectorXd& theta,
                                                 const Dataset& ds) {
  std::vector<PredictiveSummary> out;
  out.reserve(ds.size());
  for (Index i = 0; i < ds.size(); ++i) out.push_back(point_predictive(arch, theta, ds.features.row(i).transpose()));
  return out;
}

RunResult run_laplace(const RunConfig& cfg, Run& run, bool with_hmc) {
  Prepared p = prepare(cfg, run);
  check_entries(cfg, p);
  LaplaceFit fit = fit_laplace(cfg, p, run);
  save_param_vector(fit.map.theta_map, run.file("map.bhpv"));
  save_gaussian(fit.posterior, run.file("posterior.bhgp"));

  const auto map_summaries = point_predictions(p.arch, fit.map.theta_map.values, p.eval);
  const auto lap_summaries = batch_predict(p.arch, fit.draws.draws, p.eval.features);
  const ComparisonReport report = compare(map_summaries, lap_summaries, p.eval.labels, cfg.n_bins);
  write_predictions(map_summaries, p, run.file("predictions_map.csv"));
  write_predictions(lap_summaries, p, run.file("predictions_laplace.csv"));

  std::vector<NamedBins> bins{{"map", report.map.reliability}, {"laplace", report.bayes.reliability}};
  std::vector<NamedCurve> curves{{"map", report.map.coverage}, {"laplace", report.bayes.coverage}};
  json comparison = to_json(report, "laplace");
  comparison["map"]["selective_accuracy_at_50pct_coverage"] = selective_accuracy_at(report.map.coverage, 0.5);
  comparison["laplace"]["selective_accuracy_at_50pct_coverage"] = selective_accuracy_at(report.bayes.coverage, 0.5);

  json sampler_metrics;
  std::vector<PredictiveSummary> hmc_summaries;
  if (with_hmc) {
    Sampled sampled = sample_posterior(cfg, p, run);
    save_chain(sampled.pooled, run.file("chain.bhsc"));
    if (cfg.chain_csv) save_chain_csv(sampled.pooled, run.file("chain.csv"));
    hmc_summaries = batch_predict(p.arch, sampled.pooled, p.eval);
    const EvaluationBlock hmc = evaluate(hmc_summaries, p.eval.labels, cfg.n_bins);
    write_predictions(hmc_summaries, p, run.file("predictions_hmc.csv"));
    bins.emplace_back("hmc", hmc.reliability);
    curves.emplace_back("hmc", hmc.coverage);
    comparison["hmc"] = block_with_selective(hmc);
    sampler_metrics = sampled.metrics;

    // Per-coordinate posterior std: Laplace vs. sampled.
    const Eigen::MatrixXd centered = sampled.pooled.draws.rowwise() - sampled.pooled.draws.colwise().mean();
    const Eigen::VectorXd hmc_std = (centered.colwise().squaredNorm() / centered.rows()).cwiseSqrt().transpose();
    const Eigen::VectorXd ratio = fit.posterior.variance.cwiseSqrt().cwiseQuotient(hmc_std);
    comparison["std_ratio_laplace_over_hmc"] = summary_stats(ratio);
  }
  render_reliability(bins, run.file("reliability.svg"));
  render_coverage(curves, run.file("coverage.svg"));

  json entries = json::array();
  for (const Index e : cfg.entries) {
    const std::string stem = "entry_" + std::to_string(e);
    render_predictive(map_summaries[e], p.eval.labels[e], truth_title("MAP,", p, e), run.file(stem + "_map.svg"));
    render_predictive(lap_summaries[e], p.eval.labels[e], truth_title("Laplace,", p, e),
                      run.file(stem + "_laplace.svg"));
    json j = {{"map", entry_json(map_summaries[e], e, p)}, {"laplace", entry_json(lap_summaries[e], e, p)}};
    if (with_hmc) {
      render_predictive(hmc_summaries[e], p.eval.labels[e], truth_title("HMC,", p, e), run.file(stem + "_hmc.svg"));
      j["hmc"] = entry_json(hmc_summaries[e], e, p);
    }
    entries.push_back(j);
  }

  char buf[200];
  std::snprintf(buf, sizeof buf, "MAP: accuracy %.4f, ECE %.4f, mean confidence %.4f", report.map.accuracy,
                report.map.ece, report.map.mean_confidence);
  run.say(buf);
  std::snprintf(buf, sizeof buf, "Laplace (S_MC=%lld): accuracy %.4f, ECE %.4f, mean confidence %.4f",
                static_cast<long long>(cfg.laplace.n_mc_samples), report.bayes.accuracy, report.bayes.ece,
                report.bayes.mean_confidence);
  run.say(buf);

  json metrics = {{"experiment", to_string(cfg.experiment)},
                  {"seed", cfg.seed},
                  {"config", cfg.to_json()},
                  {"decisions", decisions(cfg)},
                  {"data", p.data},
                  {"model", model_json(p.arch, cfg)},
                  {"laplace", fit.metrics},
                  {"comparison", comparison},
                  {"entries", entries}};
  if (with_hmc) metrics["sampler"] = sampler_metrics;
  return run.finish(std::move(metrics));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return Rng(seed).split(stream).seed(); }

std::string file_stem(const std::string& coordinate) {
  std::string out;
  for (const char c : coordinate) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += c;
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ValidationError({"output: '" + dir.string() + "' exists and is not a directory"});
    if (!fs::is_empty(dir) && !force) {
      throw ValidationError({"output: directory '" + dir.string() + "' is not empty; pass --force to overwrite"});
    }
  }
  fs::create_directories(dir);
}

RunResult run_experiment(const RunConfig& config, const fs::path& out_dir, bool force, std::ostream* log) {
  prepare_output_dir(out_dir, force);
  Run run(config, out_dir, log);
  run.say("experiment " + to_string(config.experiment) + ", seed " + std::to_string(config.seed));
  switch (config.experiment) {
    case Experiment::iris_hmc:
    case Experiment::head_hmc:
      return run_sampled(config, run);
    case Experiment::head_laplace:
      return run_laplace(config, run, false);
    case Experiment::compare:
      return run_laplace(config, run, true);
  }
  throw Error("unknown experiment");
}

}  // namespace bayeshead
