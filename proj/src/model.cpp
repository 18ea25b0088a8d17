#include "bayeshead/model.hpp"

#include <cmath>
#include <cstdio>

#include "bayeshead/error.hpp"

namespace bayeshead {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;

ConstMatrixMap view(const ConstVectorRef& theta, const TensorSpec& t) {
  return ConstMatrixMap(theta.data() + t.offset, t.rows, t.cols);
}

MatrixMap view(Eigen::VectorXd& grad, const TensorSpec& t) { return MatrixMap(grad.data() + t.offset, t.rows, t.cols); }

void check_theta(const Architecture& arch, const ConstVectorRef& theta) {
  if (theta.size() != arch.n_params()) {
    throw Error("parameter vector has " + std::to_string(theta.size()) + " entries, " + arch.describe() +
                " expects " + std::to_string(arch.n_params()));
  }
}

void check_input(const Architecture& arch, Index cols) {
  if (cols != arch.input_dim()) {
    throw Error("input has " + std::to_string(cols) + " features, model expects " + std::to_string(arch.input_dim()));
  }
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Hidden activations (MLP only) and logits for a block of rows.
struct ForwardPass {
  RowMajorMatrix hidden;  // N x H
  RowMajorMatrix logits;  // N x C
};

template <typename XType>
ForwardPass run_forward(const Architecture& arch, const ConstVectorRef& theta, const XType& x) {
  const auto& layout = arch.layout();
  ForwardPass pass;
  if (arch.kind() == ModelKind::mlp) {
    const auto w1 = view(theta, layout.tensor("W1"));
    const auto b1 = view(theta, layout.tensor("b1"));
    const auto w2 = view(theta, layout.tensor("W2"));
    const auto b2 = view(theta, layout.tensor("b2"));
    pass.hidden = ((x * w1.transpose()).rowwise() + b1.transpose().row(0)).array().tanh().matrix();
    pass.logits = (pass.hidden * w2.transpose()).rowwise() + b2.transpose().row(0);
  } else {
    const auto w = view(theta, layout.tensor("W"));
    const auto b = view(theta, layout.tensor("b"));
    pass.logits = (x * w.transpose()).rowwise() + b.transpose().row(0);
  }
  return pass;
}

/// Adds scale * d/dtheta sum_i log p(y_i|x_i) into `grad` and returns the
/// (unscaled) compensated log-likelihood sum. `row_ids` only labels errors.
template <typename XType>
double accumulate(const Architecture& arch, const ConstVectorRef& theta, const XType& x, const std::vector<int>& y,
                  const std::vector<Index>* row_ids, double scale, Eigen::VectorXd* grad) {
  const ForwardPass pass = run_forward(arch, theta, x);
  const Index n = x.rows();
  const Index c = arch.n_classes();
  RowMajorMatrix delta(n, c);
  CompensatedSum total;
  for (Index i = 0; i < n; ++i) {
    const auto logits = pass.logits.row(i);
    if (!logits.allFinite()) {
      const Index id = row_ids ? (*row_ids)[static_cast<std::size_t>(i)] : i;
      throw NumericError("non-finite logits at example " + std::to_string(id));
    }
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    const int label = y[static_cast<std::size_t>(i)];
    total.add(logits(label) - lse);
    if (grad) {
      delta.row(i) = -(logits.array() - lse).exp().matrix();
      delta(i, label) += 1.0;
    }
  }
  if (grad) {
    const auto& layout = arch.layout();
    if (arch.kind() == ModelKind::mlp) {
      const auto w2 = view(theta, layout.tensor("W2"));
      view(*grad, layout.tensor("W2")) += scale * (delta.transpose() * pass.hidden);
      view(*grad, layout.tensor("b2")) += scale * delta.colwise().sum().transpose();
      const RowMajorMatrix dz1 =
          ((delta * w2).array() * (1.0 - pass.hidden.array().square())).matrix();
      view(*grad, layout.tensor("W1")) += scale * (dz1.transpose() * x);
      view(*grad, layout.tensor("b1")) += scale * dz1.colwise().sum().transpose();
    } else {
      view(*grad, layout.tensor("W")) += scale * (delta.transpose() * x);
      view(*grad, layout.tensor("b")) += scale * delta.colwise().sum().transpose();
    }
  }
  return total.value();
}

void check_dataset(const Architecture& arch, const Dataset& ds) {
  if (ds.size() == 0) throw DataError("log posterior requires a nonempty dataset");
  check_input(arch, ds.dim());
  if (ds.n_classes != arch.n_classes()) {
    throw DataError("dataset has " + std::to_string(ds.n_classes) + " classes, model has " +
                    std::to_string(arch.n_classes()));
  }
}

}  // namespace

ParamLayout::ParamLayout(std::vector<TensorSpec> tensors) : tensors_(std::move(tensors)) {
  Index offset = 0;
  for (auto& t : tensors_) {
    t.offset = offset;
    offset += t.size();
  }
  total_ = offset;
}

ParamLayout ParamLayout::flat(Index n) { return ParamLayout({{"theta", n, 1, 0}}); }

const TensorSpec& ParamLayout::tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  std::string valid;
  for (const auto& t : tensors_) valid += (valid.empty() ? "" : ", ") + t.name;
  throw Error("unknown parameter tensor '" + name + "'; valid names: " + valid);
}

Index ParamLayout::resolve(const std::string& coordinate) const {
  const auto open = coordinate.find('[');
  const auto close = coordinate.rfind(']');
  if (open == std::string::npos || close != coordinate.size() - 1 || close < open) {
    throw Error("malformed parameter coordinate '" + coordinate + "' (expected NAME[i,j])");
  }
  const TensorSpec& t = tensor(coordinate.substr(0, open));
  const std::string inside = coordinate.substr(open + 1, close - open - 1);
  long i = 0;
  long j = 0;
  int consumed = 0;
  if (std::sscanf(inside.c_str(), "%ld , %ld%n", &i, &j, &consumed) == 2 &&
      consumed == static_cast<int>(inside.size())) {
    // two indices
  } else if (std::sscanf(inside.c_str(), "%ld%n", &i, &consumed) == 1 &&
             consumed == static_cast<int>(inside.size()) && (t.cols == 1 || t.rows == 1)) {
    if (t.rows == 1) std::swap(i, j);
  } else {
    throw Error("malformed parameter coordinate '" + coordinate + "'");
  }
  if (i < 0 || i >= t.rows || j < 0 || j >= t.cols) {
    throw Error("coordinate '" + coordinate + "' out of range for " + t.name + " of shape (" +
                std::to_string(t.rows) + "," + std::to_string(t.cols) + ")");
  }
  return t.offset + i * t.cols + j;
}

std::string ParamLayout::coordinate_name(Index flat_index) const {
  for (const auto& t : tensors_) {
    if (flat_index >= t.offset && flat_index < t.offset + t.size()) {
      const Index local = flat_index - t.offset;
      if (t.cols == 1) return t.name + "[" + std::to_string(local) + "]";
      return t.name + "[" + std::to_string(local / t.cols) + "," + std::to_string(local % t.cols) + "]";
    }
  }
  throw Error("flat index " + std::to_string(flat_index) + " outside layout of size " + std::to_string(total_));
}

Architecture::Architecture(ModelKind kind, Index input_dim, Index hidden_dim, Index n_classes)
    : kind_(kind), input_dim_(input_dim), hidden_dim_(hidden_dim), n_classes_(n_classes) {
  if (input_dim < 1 || n_classes < 1 || (kind == ModelKind::mlp && hidden_dim < 1)) {
    throw Error("architecture dimensions must be positive");
  }
  if (kind == ModelKind::mlp) {
    layout_ = ParamLayout({{"W1", hidden_dim, input_dim, 0},
                           {"b1", hidden_dim, 1, 0},
                           {"W2", n_classes, hidden_dim, 0},
                           {"b2", n_classes, 1, 0}});
  } else {
    layout_ = ParamLayout({{"W", n_classes, input_dim, 0}, {"b", n_classes, 1, 0}});
  }
}

Architecture Architecture::mlp(Index input_dim, Index hidden_dim, Index n_classes) {
  return Architecture(ModelKind::mlp, input_dim, hidden_dim, n_classes);
}

Architecture Architecture::head(Index input_dim, Index n_classes) {
  return Architecture(ModelKind::head, input_dim, 0, n_classes);
}

std::string Architecture::describe() const {
  if (kind_ == ModelKind::mlp) {
    return "mlp(D=" + std::to_string(input_dim_) + ", H=" + std::to_string(hidden_dim_) +
           ", C=" + std::to_string(n_classes_) + ")";
  }
  return "head(D=" + std::to_string(input_dim_) + ", C=" + std::to_string(n_classes_) + ")";
}

ParamVector Architecture::wrap(Eigen::VectorXd values) const {
  if (values.size() != n_params()) throw Error("parameter vector size does not match " + describe());
  return {layout_, std::move(values)};
}

Eigen::VectorXd forward(const Architecture& arch, const ConstVectorRef& theta, const ConstVectorRef& x) {
  check_theta(arch, theta);
  check_input(arch, x.size());
  const RowMajorMatrix row = x.transpose();
  const ForwardPass pass = run_forward(arch, theta, row);
  return pass.logits.row(0).transpose();
}

Eigen::MatrixXd forward_batch(const Architecture& arch, const ConstVectorRef& theta, const Eigen::MatrixXd& x) {
  check_theta(arch, theta);
  check_input(arch, x.cols());
  return run_forward(arch, theta, x).logits;
}

Eigen::VectorXd softmax(const ConstVectorRef& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd log_softmax(const ConstVectorRef& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

double log_likelihood(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds) {
  check_theta(arch, theta);
  check_dataset(arch, ds);
  return accumulate(arch, theta, ds.features, ds.labels, nullptr, 1.0, nullptr);
}

double log_prior(const ConstVectorRef& theta, const Prior& prior) {
  return -theta.squaredNorm() / (2.0 * prior.std_dev * prior.std_dev);
}

Eigen::VectorXd grad_log_prior(const ConstVectorRef& theta, const Prior& prior) {
  return -theta / (prior.std_dev * prior.std_dev);
}

double log_posterior(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds, const Prior& prior) {
  return log_likelihood(arch, theta, ds) + log_prior(theta, prior);
}

double log_posterior_and_grad(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds,
                              const Prior& prior, Eigen::VectorXd& grad) {
  check_theta(arch, theta);
  check_dataset(arch, ds);
  grad = grad_log_prior(theta, prior);
  const double ll = accumulate(arch, theta, ds.features, ds.labels, nullptr, 1.0, &grad);
  return ll + log_prior(theta, prior);
}

Eigen::VectorXd grad_log_posterior(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds,
                                   const Prior& prior) {
  Eigen::VectorXd grad;
  log_posterior_and_grad(arch, theta, ds, prior, grad);
  return grad;
}

double log_likelihood_and_grad(const Architecture& arch, const ConstVectorRef& theta, const Dataset& ds,
                               const std::vector<Index>& rows, double scale, Eigen::VectorXd& grad) {
  check_theta(arch, theta);
  check_dataset(arch, ds);
  if (grad.size() != theta.size()) grad = Eigen::VectorXd::Zero(theta.size());
  RowMajorMatrix x(static_cast<Index>(rows.size()), ds.dim());
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    x.row(static_cast<Index>(k)) = ds.features.row(rows[k]);
    y.push_back(ds.labels[static_cast<std::size_t>(rows[k])]);
  }
  return scale * accumulate(arch, theta, x, y, &rows, scale, &grad);
}

Eigen::VectorXd per_example_grad_loglik(const Architecture& arch, const ConstVectorRef& theta,
                                        const ConstVectorRef& x, int y) {
  check_theta(arch, theta);
  check_input(arch, x.size());
  if (y < 0 || y >= arch.n_classes()) throw DataError("label " + std::to_string(y) + " out of range");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  const RowMajorMatrix row = x.transpose();
  accumulate(arch, theta, row, {y}, nullptr, 1.0, &grad);
  return grad;
}

}  // namespace bayeshead
