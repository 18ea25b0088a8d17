#include <doctest.h>

#include <cmath>

#include "bayeshead/error.hpp"
#include "bayeshead/laplace.hpp"
#include "bayeshead/predict.hpp"
#include "logistic.hpp"
#include "oracles.hpp"

using namespace bayeshead;

TEST_CASE("Adam finds the maximum of a concave quadratic") {
  Eigen::VectorXd center(3);
  center << 1.0, -2.0, 0.5;
  const Eigen::VectorXd scales = (Eigen::VectorXd(3) << 1.0, 4.0, 0.25).finished();
  const Target objective([&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
    g = -scales.cwiseProduct(q - center);
    return -0.5 * (q - center).dot(scales.cwiseProduct(q - center));
  });
  OptimizerConfig cfg;
  cfg.steps = 20000;
  cfg.learning_rate = 0.05;
  cfg.tolerance = 1e-8;
  const MapEstimate m = maximize(objective, Eigen::VectorXd::Zero(3), cfg);
  CHECK(m.stop == StopReason::converged);
  CHECK((m.theta_map.values - center).norm() < 1e-6);
  CHECK(m.grad_norm <= 1e-8);
  CHECK(m.trace.size() == static_cast<std::size_t>(m.n_steps));
}

TEST_CASE("budget exhaustion is reported") {
  const Target objective([](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
    g = -q;
    return -0.5 * q.squaredNorm();
  });
  OptimizerConfig cfg;
  cfg.steps = 3;
  const MapEstimate m = maximize(objective, Eigen::VectorXd::Ones(2) * 10.0, cfg);
  CHECK(m.stop == StopReason::budget_exhausted);
  CHECK(m.n_steps == 3);
}

TEST_CASE("train_map: full batch reaches a stationary point, minibatches are seeded") {
  Rng rng(1);
  const Architecture arch = Architecture::head(4, 3);
  const Dataset ds = oracle::random_dataset(60, 4, 3, rng);
  OptimizerConfig cfg;
  cfg.steps = 5000;
  cfg.learning_rate = 0.05;
  const MapEstimate full = train_map(arch, ds, Prior{1.0}, cfg, Eigen::VectorXd::Zero(arch.n_params()));
  CHECK(full.stop == StopReason::converged);
  CHECK(grad_log_posterior(arch, full.theta_map.values, ds, Prior{1.0}).norm() <= cfg.tolerance);
  CHECK(full.theta_map.layout == arch.layout());

  cfg.batch_size = 16;
  cfg.steps = 3000;
  cfg.learning_rate = 0.01;
  cfg.seed = 4;
  const MapEstimate a = train_map(arch, ds, Prior{1.0}, cfg, Eigen::VectorXd::Zero(arch.n_params()));
  const MapEstimate b = train_map(arch, ds, Prior{1.0}, cfg, Eigen::VectorXd::Zero(arch.n_params()));
  CHECK(a.theta_map.values == b.theta_map.values);
  // Noisy steps land near, not on, the full-batch optimum.
  CHECK((a.theta_map.values - full.theta_map.values).norm() < 0.2 * full.theta_map.values.norm() + 0.05);
}

TEST_CASE("empirical Fisher equals the brute-force average of squared per-example gradients") {
  Rng rng(2);
  for (const Architecture& arch : {Architecture::mlp(4, 5, 3), Architecture::head(7, 3)}) {
    for (int t = 0; t < 5; ++t) {
      const Dataset ds = oracle::random_dataset(30, arch.input_dim(), 3, rng);
      const Eigen::VectorXd theta = oracle::random_vector(arch.n_params(), rng);
      const Eigen::VectorXd f = empirical_fisher_diag(arch, theta, ds);
      Eigen::VectorXd brute = Eigen::VectorXd::Zero(arch.n_params());
      for (Index i = 0; i < ds.size(); ++i) {
        const Eigen::VectorXd x = ds.features.row(i).transpose();
        const int y = ds.labels[static_cast<std::size_t>(i)];
        const Eigen::VectorXd g = oracle::fd_gradient(
            [&](const Eigen::VectorXd& th) { return oracle::log_softmax_at(oracle::logits(arch, th, x.data()), y); },
            theta, 1e-6);
        brute += g.cwiseAbs2();
      }
      brute /= static_cast<double>(ds.size());
      CHECK((f - brute).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
}

TEST_CASE("laplace_posterior applies N * F + 1/sigma^2 and the floor") {
  const ParamVector map{ParamLayout::flat(3), Eigen::Vector3d(0.1, 0.2, 0.3)};
  const Eigen::Vector3d fisher(0.5, 0.0, 2.0);
  const GaussianPosterior post = laplace_posterior(map, fisher, Prior{2.0}, 10);
  CHECK(post.variance(0) == doctest::Approx(1.0 / (5.0 + 0.25)));
  CHECK(post.variance(1) == doctest::Approx(4.0));
  CHECK(post.variance(2) == doctest::Approx(1.0 / 20.25));
  CHECK(post.mean.values == map.values);

  const GaussianPosterior floored = laplace_posterior(map, Eigen::Vector3d::Zero(), Prior{1e6}, 10, 1e-3);
  CHECK(floored.variance(0) == doctest::Approx(1e3));
  CHECK_THROWS_AS(laplace_posterior(map, Eigen::Vector3d(-1.0, 0.0, 0.0), Prior{}, 10), Error);
  CHECK_THROWS_AS(laplace_posterior(map, Eigen::Vector2d::Zero(), Prior{}, 10), Error);
}

TEST_CASE("sample_gaussian draws have the requested moments and are seeded") {
  const ParamVector mean{ParamLayout::flat(2), Eigen::Vector2d(1.0, -3.0)};
  const GaussianPosterior post{mean, Eigen::Vector2d(0.25, 4.0)};
  const SampleChain c = sample_gaussian(post, 40000, 7);
  const Eigen::RowVectorXd m = c.draws.colwise().mean();
  const Eigen::RowVectorXd var = (c.draws.rowwise() - m).colwise().squaredNorm() / 40000.0;
  CHECK(m(0) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m(1) == doctest::Approx(-3.0).epsilon(0.01));
  CHECK(var(0) == doctest::Approx(0.25).epsilon(0.03));
  CHECK(var(1) == doctest::Approx(4.0).epsilon(0.03));
  CHECK(sample_gaussian(post, 30, 7).draws == sample_gaussian(post, 30, 7).draws);
  CHECK(sample_gaussian(post, 30, 7).draws != sample_gaussian(post, 30, 8).draws);
  CHECK(kDefaultMonteCarloSamples == 30);
}

TEST_CASE("tiny prior variance collapses Laplace predictions onto the MAP") {
  Rng rng(3);
  const Architecture arch = Architecture::head(5, 3);
  const Dataset ds = oracle::random_dataset(20, 5, 3, rng);
  const ParamVector map = arch.wrap(oracle::random_vector(arch.n_params(), rng));
  const Eigen::VectorXd fisher = empirical_fisher_diag(arch, map.values, ds);
  const GaussianPosterior post = laplace_posterior(map, fisher, Prior{1e-9}, 1000000);
  const SampleChain draws = sample_gaussian(post, 30, 1);
  for (Index i = 0; i < ds.size(); ++i) {
    const Eigen::VectorXd x = ds.features.row(i).transpose();
    const PredictiveSummary lap = posterior_predictive(arch, draws.draws, x);
    const PredictiveSummary pt = point_predictive(arch, map.values, x);
    CHECK((lap.mean_probs - pt.mean_probs).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("1-D logistic regression: Laplace std within 20% of HMC") {
  Rng rng(4);
  const logistic::Problem p = logistic::generate(100, Eigen::VectorXd::Constant(1, 1.0), rng);
  const logistic::Comparison c = logistic::compare(p, 5, 4000);
  CHECK(c.max_rel_gap < 0.2);
}
