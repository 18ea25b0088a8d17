#include "bayeshead/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace bayeshead {

namespace {

using nlohmann::json;

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid configuration:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

/// Reads fields of one JSON object, recording errors with dotted field paths.
class Section {
 public:
  Section(const json& doc, std::string prefix, std::vector<std::string>& errors)
      : prefix_(std::move(prefix)), errors_(errors) {
    if (doc.is_null()) {
      obj_ = json::object();
    } else if (!doc.is_object()) {
      error("", "must be an object");
      obj_ = json::object();
    } else {
      obj_ = doc;
    }
  }

  ~Section() {
    for (const auto& [key, value] : obj_.items()) {
      if (!known_.count(key)) errors_.push_back(path(key) + ": unknown field");
    }
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  const json* find(const std::string& key) {
    known_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  json child(const std::string& key) {
    const json* v = find(key);
    return v ? *v : json();
  }

  std::string child_prefix(const std::string& key) const { return path(key); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) {
        out = v->get<double>();
      } else {
        error(key, "must be a number");
      }
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (v->is_number_integer()) {
        out = v->get<Int>();
      } else {
        error(key, "must be an integer");
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (v->is_boolean()) {
        out = v->get<bool>();
      } else {
        error(key, "must be true or false");
      }
    }
  }

  bool string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (v->is_string()) {
        out = v->get<std::string>();
        return true;
      }
      error(key, "must be a string");
    }
    return false;
  }

  void error(const std::string& key, const std::string& message) { errors_.push_back(path(key) + ": " + message); }

 private:
  std::string path(const std::string& key) const {
    if (prefix_.empty()) return key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

  json obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

template <typename Enum>
bool parse_enum(Section& s, const std::string& key, const std::vector<std::pair<std::string, Enum>>& choices,
                Enum& out) {
  std::string text;
  if (!s.string(key, text)) return false;
  for (const auto& [name, value] : choices) {
    if (name == text) {
      out = value;
      return true;
    }
  }
  std::string valid;
  for (const auto& [name, value] : choices) valid += (valid.empty() ? "" : ", ") + name;
  s.error(key, "unknown value '" + text + "' (expected one of: " + valid + ")");
  return false;
}

const std::vector<std::pair<std::string, Experiment>> kExperiments{{"iris-hmc", Experiment::iris_hmc},
                                                                   {"head-hmc", Experiment::head_hmc},
                                                                   {"head-laplace", Experiment::head_laplace},
                                                                   {"compare", Experiment::compare}};

}  // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : Error(join_errors(errors)), errors_(std::move(errors)) {}

std::string to_string(Experiment e) {
  for (const auto& [name, value] : kExperiments) {
    if (value == e) return name;
  }
  return "unknown";
}

ConfigResult validate_config(const json& doc, const std::filesystem::path& base_dir) {
  ConfigResult result;
  auto& errors = result.errors;
  RunConfig cfg;
  if (!doc.is_object()) {
    errors.push_back("(root): configuration must be a JSON object");
    return result;
  }
  {
    Section root(doc, "", errors);
    if (!root.find("experiment")) {
      root.error("experiment", "required field is missing");
    } else {
      parse_enum(root, "experiment", kExperiments, cfg.experiment);
    }
    if (const json* seed = root.find("seed")) {
      if (seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0)) {
        cfg.seed = seed->get<std::uint64_t>();
      } else {
        root.error("seed", "must be a non-negative integer");
      }
    } else {
      root.error("seed", "required field is missing (runs never default to a clock-based seed)");
    }

    const bool mlp_default = cfg.experiment == Experiment::iris_hmc;
    cfg.model = mlp_default ? ModelKind::mlp : ModelKind::head;

    {
      Section data(root.child("data"), root.child_prefix("data"), errors);
      if (!data.string("path", cfg.data_path)) {
        if (!data.find("path")) data.error("path", "required field is missing");
      } else {
        cfg.data_file = base_dir / cfg.data_path;
        if (!std::filesystem::is_regular_file(cfg.data_file)) {
          data.error("path", "file not found: " + cfg.data_file.string());
        }
        cfg.format = format_for_path(cfg.data_file);
      }
      parse_enum(data, "format",
                 std::vector<std::pair<std::string, DataFormat>>{{"csv", DataFormat::csv},
                                                                 {"feature-binary", DataFormat::feature_binary}},
                 cfg.format);
      if (data.string("qa_text", cfg.qa_text_path)) {
        cfg.qa_text_file = base_dir / cfg.qa_text_path;
        if (!std::filesystem::is_regular_file(*cfg.qa_text_file)) {
          data.error("qa_text", "file not found: " + cfg.qa_text_file->string());
        }
      }
      data.number("train_fraction", cfg.train_fraction);
      if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        data.error("train_fraction", "must lie in (0,1)");
      }
      cfg.standardize = cfg.format == DataFormat::csv;
      data.boolean("standardize", cfg.standardize);
    }

    {
      Section model(root.child("model"), root.child_prefix("model"), errors);
      parse_enum(model, "kind",
                 std::vector<std::pair<std::string, ModelKind>>{{"mlp", ModelKind::mlp}, {"head", ModelKind::head}},
                 cfg.model);
      model.integer("hidden_dim", cfg.hidden_dim);
      if (cfg.hidden_dim < 1) model.error("hidden_dim", "must be at least 1");
      model.number("prior_std", cfg.prior_std);
      if (!(cfg.prior_std > 0.0)) model.error("prior_std", "must be positive");
    }

    {
      auto& s = cfg.sampler;
      Section sampler(root.child("sampler"), root.child_prefix("sampler"), errors);
      parse_enum(sampler, "algorithm",
                 std::vector<std::pair<std::string, SamplerKind>>{{"nuts", SamplerKind::nuts},
                                                                  {"hmc", SamplerKind::hmc_fixed}},
                 s.algorithm);
      sampler.integer("n_warmup", s.n_warmup);
      if (s.n_warmup < 0) sampler.error("n_warmup", "must be non-negative");
      sampler.integer("n_samples", s.n_samples);
      if (s.n_samples < 4) sampler.error("n_samples", "must be at least 4 (diagnostics need 4 draws)");
      sampler.number("target_accept", s.target_accept);
      if (!(s.target_accept > 0.0 && s.target_accept < 1.0)) sampler.error("target_accept", "must lie in (0,1)");
      sampler.integer("max_tree_depth", s.max_tree_depth);
      if (s.max_tree_depth < 1) sampler.error("max_tree_depth", "must be at least 1");
      parse_enum(sampler, "mass",
                 std::vector<std::pair<std::string, MassKind>>{{"identity", MassKind::identity},
                                                               {"diagonal", MassKind::diagonal}},
                 s.mass);
      sampler.integer("n_leapfrog", s.n_leapfrog);
      if (s.n_leapfrog < 1) sampler.error("n_leapfrog", "must be at least 1");
      sampler.number("step_size", s.step_size);
      if (s.step_size < 0.0) sampler.error("step_size", "must be non-negative (0 selects automatically)");
      sampler.integer("n_chains", s.n_chains);
      if (s.n_chains < 1) sampler.error("n_chains", "must be at least 1");
    }

    {
      auto& l = cfg.laplace;
      Section laplace(root.child("laplace"), root.child_prefix("laplace"), errors);
      laplace.number("learning_rate", l.learning_rate);
      if (!(l.learning_rate > 0.0)) laplace.error("learning_rate", "must be positive");
      laplace.integer("steps", l.steps);
      if (l.steps < 0) laplace.error("steps", "must be non-negative");
      laplace.integer("batch_size", l.batch_size);
      if (l.batch_size < 0) laplace.error("batch_size", "must be non-negative (0 selects automatically)");
      laplace.number("tolerance", l.tolerance);
      if (l.tolerance < 0.0) laplace.error("tolerance", "must be non-negative");
      laplace.integer("n_mc_samples", l.n_mc_samples);
      if (l.n_mc_samples < 1) laplace.error("n_mc_samples", "must be at least 1");
      laplace.number("precision_floor", l.precision_floor);
      if (!(l.precision_floor > 0.0)) laplace.error("precision_floor", "must be positive");
    }

    {
      Section eval(root.child("eval"), root.child_prefix("eval"), errors);
      eval.integer("n_bins", cfg.n_bins);
      if (cfg.n_bins < 1) eval.error("n_bins", "must be at least 1");
      eval.number("threshold", cfg.threshold);
      if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) {
        eval.error("threshold", "must lie in [0,1], got " + nlohmann::json(cfg.threshold).dump());
      }
      parse_enum(eval, "split",
                 std::vector<std::pair<std::string, EvalSplit>>{{"test", EvalSplit::test}, {"train", EvalSplit::train}},
                 cfg.eval_split);
      cfg.entries = cfg.model == ModelKind::mlp ? std::vector<Index>{0, 1} : std::vector<Index>{0, 2, 3};
      if (const json* v = eval.find("entries")) {
        cfg.entries.clear();
        if (!v->is_array()) {
          eval.error("entries", "must be an array of row indices");
        } else {
          for (const auto& e : *v) {
            if (e.is_number_integer() && e.get<long long>() >= 0) {
              cfg.entries.push_back(e.get<Index>());
            } else {
              eval.error("entries", "entries must be non-negative integers");
              break;
            }
          }
        }
      }
      if (cfg.model == ModelKind::mlp) cfg.marginals = {"W1[0,1]", "b2[1]"};
      if (const json* v = eval.find("marginals")) {
        if (v->is_array() && std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_string(); })) {
          cfg.marginals = v->get<std::vector<std::string>>();
        } else {
          eval.error("marginals", "must be an array of parameter names such as \"W1[0,1]\"");
        }
      }
      if (const json* v = eval.find("pairs")) {
        bool ok = v->is_array();
        if (ok) {
          for (const auto& p : *v) {
            if (!(p.is_array() && p.size() == 2 && p[0].is_string() && p[1].is_string())) {
              ok = false;
              break;
            }
            cfg.pair_candidates.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
          }
        }
        if (!ok) eval.error("pairs", "must be an array of [name_x, name_y] pairs");
      }
    }

    {
      Section output(root.child("output"), root.child_prefix("output"), errors);
      output.string("dir", cfg.output_dir);
      output.boolean("chain_csv", cfg.chain_csv);
    }
  }
  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError({"--set " + item + ": expected key=value"});
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object()) *node = json::object();
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = value;
  }
}

ConfigResult validate_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) return {std::nullopt, {"(file): cannot open '" + path.string() + "'"}};
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    return {std::nullopt, {std::string("(file): invalid JSON: ") + e.what()}};
  }
  try {
    apply_overrides(doc, overrides);
  } catch (const ValidationError& e) {
    return {std::nullopt, e.errors()};
  }
  return validate_config(doc, path.parent_path());
}

nlohmann::json RunConfig::to_json() const {
  json pairs = json::array();
  for (const auto& [a, b] : pair_candidates) pairs.push_back({a, b});
  return {
      {"experiment", to_string(experiment)},
      {"seed", seed},
      {"data",
       {{"path", data_path},
        {"format", format == DataFormat::csv ? "csv" : "feature-binary"},
        {"qa_text", qa_text_path.empty() ? json(nullptr) : json(qa_text_path)},
        {"train_fraction", train_fraction},
        {"standardize", standardize}}},
      {"model", {{"kind", model == ModelKind::mlp ? "mlp" : "head"}, {"hidden_dim", hidden_dim}, {"prior_std", prior_std}}},
      {"sampler",
       {{"algorithm", sampler.algorithm == SamplerKind::nuts ? "nuts" : "hmc"},
        {"n_warmup", sampler.n_warmup},
        {"n_samples", sampler.n_samples},
        {"target_accept", sampler.target_accept},
        {"max_tree_depth", sampler.max_tree_depth},
        {"mass", sampler.mass == MassKind::diagonal ? "diagonal" : "identity"},
        {"n_leapfrog", sampler.n_leapfrog},
        {"step_size", sampler.step_size},
        {"n_chains", sampler.n_chains}}},
      {"laplace",
       {{"learning_rate", laplace.learning_rate},
        {"steps", laplace.steps},
        {"batch_size", laplace.batch_size},
        {"tolerance", laplace.tolerance},
        {"n_mc_samples", laplace.n_mc_samples},
        {"precision_floor", laplace.precision_floor}}},
      {"eval",
       {{"n_bins", n_bins},
        {"threshold", threshold},
        {"split", eval_split == EvalSplit::test ? "test" : "train"},
        {"entries", entries},
        {"marginals", marginals},
        {"pairs", pairs}}},
      {"output", {{"chain_csv", chain_csv}}},
  };
}

}  // namespace bayeshead
