#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bayeshead/config.hpp"
#include "bayeshead/data.hpp"
#include "bayeshead/diagnostics.hpp"
#include "bayeshead/error.hpp"
#include "bayeshead/eval.hpp"
#include "bayeshead/experiments.hpp"
#include "bayeshead/laplace.hpp"
#include "bayeshead/model.hpp"
#include "bayeshead/predict.hpp"
#include "bayeshead/random.hpp"
#include "bayeshead/sampler.hpp"
#include "bayeshead/serialize.hpp"

namespace py = pybind11;
using namespace bayeshead;

namespace {

// nlohmann::json -> Python objects through the json module.
py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

SamplerKind parse_algorithm(const std::string& name) {
  if (name == "nuts") return SamplerKind::nuts;
  if (name == "hmc") return SamplerKind::hmc_fixed;
  throw Error("unknown sampler algorithm '" + name + "' (expected nuts or hmc)");
}

HmcConfig make_hmc(Index n_warmup, Index n_samples, std::uint64_t seed, const std::string& algorithm,
                   double target_accept, int max_tree_depth, int n_leapfrog, double step_size) {
  HmcConfig c;
  c.n_warmup = n_warmup;
  c.n_samples = n_samples;
  c.seed = seed;
  c.algorithm = parse_algorithm(algorithm);
  c.target_accept = target_accept;
  c.max_tree_depth = max_tree_depth;
  c.n_leapfrog = n_leapfrog;
  c.step_size = step_size;
  return c;
}

std::vector<int> labels_of(const Dataset& ds) { return ds.labels; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian MLP / multinomial head posteriors: HMC, NUTS, diagonal Laplace, calibration";

  auto base = py::register_exception<Error>(m, "BayesheadError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("uniform", &Rng::uniform)
      .def("uniform_index", &Rng::uniform_index, py::arg("n"))
      .def("normal", &Rng::normal)
      .def("split", &Rng::split, py::arg("stream"))
      .def_property_readonly("seed", &Rng::seed);
  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"));

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](Eigen::MatrixXd features, std::vector<int> labels, int n_classes) {
             Dataset ds;
             ds.features = std::move(features);
             ds.labels = std::move(labels);
             ds.n_classes = n_classes;
             ds.validate();
             return ds;
           }),
           py::arg("features"), py::arg("labels"), py::arg("n_classes"))
      .def_readonly("features", &Dataset::features)
      .def_property_readonly("labels", &labels_of)
      .def_readonly("n_classes", &Dataset::n_classes)
      .def("__len__", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim)
      .def("subset", &Dataset::subset, py::arg("rows"));

  m.def("load_dataset", py::overload_cast<const std::filesystem::path&>(&load_dataset), py::arg("path"),
        "CSV with a trailing label column, or a .bhft feature binary.");
  m.def("save_feature_binary", &save_feature_binary, py::arg("dataset"), py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));

  py::class_<QaRecord>(m, "QaRecord")
      .def(py::init([](std::string q, std::vector<std::string> options, int label) {
             return QaRecord{std::move(q), std::move(options), label};
           }),
           py::arg("question"), py::arg("options"), py::arg("label"))
      .def_readwrite("question", &QaRecord::question)
      .def_readwrite("options", &QaRecord::options)
      .def_readwrite("label", &QaRecord::label);
  m.def("load_qa_jsonl", &load_qa_jsonl, py::arg("path"));
  m.def("save_qa_jsonl", &save_qa_jsonl, py::arg("records"), py::arg("path"));
  m.def("reduce_options", &reduce_options, py::arg("record"), py::arg("seed"));

  py::class_<Architecture>(m, "Architecture")
      .def_static("mlp", &Architecture::mlp, py::arg("input_dim"), py::arg("hidden_dim"), py::arg("n_classes"))
      .def_static("head", &Architecture::head, py::arg("input_dim"), py::arg("n_classes"))
      .def_property_readonly("input_dim", &Architecture::input_dim)
      .def_property_readonly("n_classes", &Architecture::n_classes)
      .def_property_readonly("n_params", &Architecture::n_params)
      .def("coordinate_name", [](const Architecture& a, Index j) { return a.layout().coordinate_name(j); })
      .def("resolve", [](const Architecture& a, const std::string& name) { return a.layout().resolve(name); })
      .def("__repr__", &Architecture::describe);

  m.def("forward", &forward_batch, py::arg("arch"), py::arg("theta"), py::arg("features"),
        "Logits, one row per input row.");
  m.def("log_posterior",
        [](const Architecture& a, const Eigen::VectorXd& theta, const Dataset& ds, double prior_std) {
          return log_posterior(a, theta, ds, Prior{prior_std});
        },
        py::arg("arch"), py::arg("theta"), py::arg("dataset"), py::arg("prior_std") = 1.0);
  m.def("grad_log_posterior",
        [](const Architecture& a, const Eigen::VectorXd& theta, const Dataset& ds, double prior_std) {
          return grad_log_posterior(a, theta, ds, Prior{prior_std});
        },
        py::arg("arch"), py::arg("theta"), py::arg("dataset"), py::arg("prior_std") = 1.0);

  py::class_<SampleChain>(m, "SampleChain")
      .def_readonly("draws", &SampleChain::draws)
      .def_readonly("accept_stats", &SampleChain::accept_stats)
      .def_readonly("tree_depths", &SampleChain::tree_depths)
      .def_readonly("divergences", &SampleChain::divergences)
      .def_readonly("step_size", &SampleChain::step_size_final)
      .def_readonly("inverse_mass", &SampleChain::inverse_mass)
      .def_readonly("seed", &SampleChain::seed)
      .def_property_readonly("mean_accept", &SampleChain::mean_accept)
      .def("__len__", &SampleChain::n_draws);
  m.def("save_chain", &save_chain, py::arg("chain"), py::arg("path"));
  m.def("load_chain", &load_chain, py::arg("path"));

  m.def(
      "sample_posterior",
      [](const Architecture& a, const Dataset& ds, double prior_std, Index n_warmup, Index n_samples,
         std::uint64_t seed, const std::string& algorithm, double target_accept, int max_tree_depth, int n_leapfrog,
         double step_size) {
        const HmcConfig cfg =
            make_hmc(n_warmup, n_samples, seed, algorithm, target_accept, max_tree_depth, n_leapfrog, step_size);
        const Target target = Target::posterior(a, ds, Prior{prior_std});
        SampleChain chain;
        {
          py::gil_scoped_release release;
          chain = sample(target, default_init(a.n_params(), derive_seed(seed, 2)), cfg);
        }
        chain.layout = a.layout();
        return chain;
      },
      py::arg("arch"), py::arg("dataset"), py::arg("prior_std") = 1.0, py::arg("n_warmup") = 1000,
      py::arg("n_samples") = 1000, py::arg("seed"), py::arg("algorithm") = "nuts", py::arg("target_accept") = 0.8,
      py::arg("max_tree_depth") = 10, py::arg("n_leapfrog") = 10, py::arg("step_size") = 0.0);

  m.def(
      "sample",
      [](const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>& logp_and_grad,
         const Eigen::VectorXd& init, Index n_warmup, Index n_samples, std::uint64_t seed, const std::string& algorithm,
         double target_accept, int max_tree_depth, int n_leapfrog, double step_size) {
        const HmcConfig cfg =
            make_hmc(n_warmup, n_samples, seed, algorithm, target_accept, max_tree_depth, n_leapfrog, step_size);
        const Target target([&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
          auto [lp, grad] = logp_and_grad(q);
          g = std::move(grad);
          return lp;
        });
        return sample(target, init, cfg);
      },
      py::arg("logp_and_grad"), py::arg("init"), py::arg("n_warmup") = 1000, py::arg("n_samples") = 1000,
      py::arg("seed"), py::arg("algorithm") = "nuts", py::arg("target_accept") = 0.8, py::arg("max_tree_depth") = 10,
      py::arg("n_leapfrog") = 10, py::arg("step_size") = 0.0,
      "Sample from a Python callable returning (log density, gradient).");

  m.def("split_rhat", &split_rhat, py::arg("chains"));
  m.def("effective_sample_size", &effective_sample_size, py::arg("chains"));

  py::class_<GaussianPosterior>(m, "GaussianPosterior")
      .def_property_readonly("mean", [](const GaussianPosterior& g) { return g.mean.values; })
      .def_readonly("variance", &GaussianPosterior::variance);

  m.def(
      "train_map",
      [](const Architecture& a, const Dataset& ds, double prior_std, double learning_rate, Index steps,
         Index batch_size, double tolerance, std::uint64_t seed) {
        OptimizerConfig oc;
        oc.learning_rate = learning_rate;
        oc.steps = steps;
        oc.batch_size = batch_size;
        oc.tolerance = tolerance;
        oc.seed = seed;
        py::gil_scoped_release release;
        return train_map(a, ds, Prior{prior_std}, oc, Eigen::VectorXd::Zero(a.n_params())).theta_map.values;
      },
      py::arg("arch"), py::arg("dataset"), py::arg("prior_std") = 1.0, py::arg("learning_rate") = 1e-2,
      py::arg("steps") = 2000, py::arg("batch_size") = 0, py::arg("tolerance") = 1e-6, py::arg("seed") = 0,
      "MAP parameters by Adam from zero initialisation.");
  m.def(
      "empirical_fisher_diag",
      [](const Architecture& a, const Eigen::VectorXd& theta, const Dataset& ds) {
        return empirical_fisher_diag(a, theta, ds);
      },
      py::arg("arch"), py::arg("theta"), py::arg("dataset"));
  m.def(
      "laplace_posterior",
      [](const Architecture& a, const Eigen::VectorXd& theta_map, const Eigen::VectorXd& fisher, double prior_std,
         Index n_data, double floor) {
        return laplace_posterior(a.wrap(theta_map), fisher, Prior{prior_std}, n_data, floor);
      },
      py::arg("arch"), py::arg("theta_map"), py::arg("fisher_diag"), py::arg("prior_std"), py::arg("n_data"),
      py::arg("floor") = 1e-8);
  m.def("sample_gaussian", &sample_gaussian, py::arg("posterior"), py::arg("n_samples") = kDefaultMonteCarloSamples,
        py::arg("seed"));

  py::class_<PredictiveSummary>(m, "PredictiveSummary")
      .def_readonly("mean_probs", &PredictiveSummary::mean_probs)
      .def_readonly("std_probs", &PredictiveSummary::std_probs)
      .def_readonly("predicted", &PredictiveSummary::predicted)
      .def_readonly("confidence", &PredictiveSummary::confidence)
      .def_readonly("n_samples", &PredictiveSummary::n_samples);
  m.def(
      "predict",
      [](const Architecture& a, const Eigen::MatrixXd& draws, const Eigen::MatrixXd& features) {
        return batch_predict(a, draws, features);
      },
      py::arg("arch"), py::arg("draws"), py::arg("features"),
      "Posterior predictive summaries; `draws` is S x P (one row for a point estimate).");
  m.def(
      "decide",
      [](const PredictiveSummary& s, double threshold) {
        const Decision d = decide(s, threshold);
        return d.abstain ? py::object(py::none()) : py::object(py::int_(d.answer));
      },
      py::arg("summary"), py::arg("threshold"), "Predicted class, or None when abstaining.");

  m.def(
      "evaluate",
      [](const std::vector<PredictiveSummary>& s, const std::vector<int>& labels, int n_bins) {
        return to_python(to_json(evaluate(s, labels, n_bins)));
      },
      py::arg("summaries"), py::arg("labels"), py::arg("n_bins") = kDefaultBins,
      "Accuracy, ECE, reliability bins and the exact coverage curve as a dict.");
  m.def(
      "ece",
      [](const std::vector<double>& conf, const std::vector<bool>& correct, int n_bins) {
        return ece(reliability(conf, correct, n_bins));
      },
      py::arg("confidences"), py::arg("correct"), py::arg("n_bins") = kDefaultBins);

  m.def(
      "validate_config",
      [](const std::filesystem::path& path, const std::vector<std::string>& overrides) {
        const ConfigResult r = validate_config_file(path, overrides);
        if (!r.config) throw ValidationError(r.errors);
        return to_python(r.config->to_json());
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "run_experiment",
      [](const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
         const std::vector<std::string>& overrides, bool force) {
        const ConfigResult r = validate_config_file(config_path, overrides);
        if (!r.config) throw ValidationError(r.errors);
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(*r.config, out_dir, force);
        }
        return to_python(result.metrics);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("overrides") = std::vector<std::string>{},
      py::arg("force") = false, "Runs a configured experiment and returns its metrics.");
}
