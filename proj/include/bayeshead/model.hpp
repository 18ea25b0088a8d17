#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bayeshead/data.hpp"

namespace bayeshead {

/// One named tensor inside a flat parameter vector, stored row-major.
struct TensorSpec {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Index offset = 0;

  Index size() const { return rows * cols; }
  bool operator==(const TensorSpec&) const = default;
};

/// Maps flat coordinates to named tensors and back (`W1[0,1]` <-> index).
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::vector<TensorSpec> tensors);

  /// Single column tensor named `theta`, for targets without a model.
  static ParamLayout flat(Index n);

  Index size() const { return total_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  const TensorSpec& tensor(const std::string& name) const;

  /// Resolves `NAME[i,j]` (or `NAME[i]` for single-column tensors). Throws
  /// Error listing the valid tensor names when the name is unknown.
  Index resolve(const std::string& coordinate) const;
  std::string coordinate_name(Index flat_index) const;

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<TensorSpec> tensors_;
  Index total_ = 0;
};

/// Parameter vector together with its layout.
struct ParamVector {
  ParamLayout layout;
  Eigen::VectorXd values;

  double at(const std::string& coordinate) const { return values(layout.resolve(coordinate)); }
};

enum class ModelKind { mlp, head };

/// Either a one-hidden-layer tanh MLP (W1 HxD, b1 H, W2 CxH, b2 C) or a
/// multinomial logistic head (W CxD, b C).
class Architecture {
 public:
  static Architecture mlp(Index input_dim, Index hidden_dim, Index n_classes);
  static Architecture head(Index input_dim, Index n_classes);

  ModelKind kind() const { return kind_; }
  Index input_dim() const { return input_dim_; }
  Index hidden_dim() const { return hidden_dim_; }
  Index n_classes() const { return n_classes_; }
  Index n_params() const { return layout_.size(); }
  const ParamLayout& layout() const { return layout_; }
  std::string describe() const;

  ParamVector wrap(Eigen::VectorXd values) const;

 private:
  Architecture(ModelKind kind, Index input_dim, Index hidden_dim, Index n_classes);

  ModelKind kind_;
  Index input_dim_;
  Index hidden_dim_;
  Index n_classes_;
  ParamLayout layout_;
};

/// Isotropic Gaussian prior N(0, std_dev^2) on every coordinate.
struct Prior {
  double std_dev = 1.0;
};

using ConstVectorRef = Eigen::Ref<const Eigen::VectorXd>;

Eigen::VectorXd forward(const Architecture& arch, const ConstVectorRef& theta, const ConstVectorRef& x);

/// Logits for every row of `x` (N x D) as an N x C matrix.
Eigen::MatrixXd forward_batch(const Architecture& arch, const ConstVectorRef& theta, const Eigen::MatrixXd& x);

Eigen::VectorXd softmax(const ConstVectorRef& logits);
Eigen::VectorXd log_softmax(const ConstVectorRef& logits);

/// Sum over rows of log p(y_i | x_i, theta), Neumaier-compensated.
double log_likelihood(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds);

/// -|theta|^2 / (2 sigma^2); the normalising constant is dropped.
double log_prior(const ConstVectorRef& theta, const Prior& prior);
Eigen::VectorXd grad_log_prior(const ConstVectorRef& theta, const Prior& prior);

/// log_likelihood + log_prior (unnormalised; the Gaussian constant is omitted).
double log_posterior(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds, const Prior& prior);
Eigen::VectorXd grad_log_posterior(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds,
                                   const Prior& prior);

/// Value and gradient in one pass; `grad` is resized as needed.
double log_posterior_and_grad(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds,
                              const Prior& prior, Eigen::VectorXd& grad);

/// Likelihood term only over the given row subset, scaled by `scale`.
double log_likelihood_and_grad(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds,
                               const std::vector<Index>& rows, double scale, Eigen::VectorXd& grad);

/// Gradient of log p(y | x, theta) for a single example (no prior term).
Eigen::VectorXd per_example_grad_loglik(const Architecture& arch, const ConstVectorRef& theta,
                                        const ConstVectorRef& x, int y);

}  // namespace bayeshead
