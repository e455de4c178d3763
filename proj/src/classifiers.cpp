#include "fmad/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "fmad/error.hpp"
#include "random.hpp"

namespace fmad {

void validate_labeled_set(const LabeledSet& data) {
  if (static_cast<std::size_t>(data.features.rows()) != data.labels.size()) {
    throw DimensionMismatchError("feature rows and label count differ");
  }
  if (data.labels.size() < 2) throw InvalidInputError("need at least two samples");
  std::size_t positives = 0;
  for (int y : data.labels) {
    if (y != 0 && y != 1) throw InvalidInputError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == data.labels.size()) {
    throw SingleClassError("training data contains a single class");
  }
  if (!data.features.allFinite()) throw InvalidInputError("features must be finite");
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double clamp_prob(double p, double epsilon) { return std::clamp(p, epsilon, 1.0 - epsilon); }

Eigen::VectorXd linear_scores(std::span<const double> theta, const LabeledSet& data) {
  const auto d = static_cast<Eigen::Index>(data.dim());
  const Eigen::Map<const Eigen::VectorXd> w(theta.data(), d);
  return (data.features * w).array() + theta[static_cast<std::size_t>(d)];
}

void check_theta(std::span<const double> theta, const LabeledSet& data) {
  if (theta.size() != data.dim() + 1) throw DimensionMismatchError("theta must have d + 1 entries");
}

}  // namespace

double logistic_objective(std::span<const double> theta, const LabeledSet& data, double l2) {
  check_theta(theta, data);
  const Eigen::VectorXd t = linear_scores(theta, data);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    loss += softplus(t(i)) - data.labels[static_cast<std::size_t>(i)] * t(i);
  }
  loss /= static_cast<double>(data.size());
  double penalty = 0.0;
  for (std::size_t j = 0; j < data.dim(); ++j) penalty += theta[j] * theta[j];
  return loss + 0.5 * l2 * penalty;
}

std::vector<double> logistic_gradient(std::span<const double> theta, const LabeledSet& data,
                                      double l2) {
  check_theta(theta, data);
  const Eigen::VectorXd t = linear_scores(theta, data);
  Eigen::VectorXd residual(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    residual(i) = sigmoid(t(i)) - data.labels[static_cast<std::size_t>(i)];
  }
  const double inv_n = 1.0 / static_cast<double>(data.size());
  const Eigen::VectorXd gw = data.features.transpose() * residual * inv_n;
  std::vector<double> grad(theta.size());
  for (std::size_t j = 0; j < data.dim(); ++j) {
    grad[j] = gw(static_cast<Eigen::Index>(j)) + l2 * theta[j];
  }
  grad.back() = residual.sum() * inv_n;
  return grad;
}

LogisticModel train_logistic(const LabeledSet& data, const LogisticParams& params,
                             LogisticTrace* trace) {
  validate_labeled_set(data);
  if (params.l2_strength < 0.0) throw InvalidInputError("negative L2 strength");
  const std::size_t d = data.dim();
  const auto p = static_cast<Eigen::Index>(d + 1);
  const auto n = static_cast<Eigen::Index>(data.size());
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> theta(d + 1, 0.0);
  double objective = logistic_objective(theta, data, params.l2_strength);
  std::vector<double> grad = logistic_gradient(theta, data, params.l2_strength);
  auto grad_norm = [](const std::vector<double>& g) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
  };
  if (trace) {
    trace->objective.assign(1, objective);
    trace->iterations = 0;
  }

  Eigen::MatrixXd design(n, p);
  design.leftCols(p - 1) = data.features;
  design.col(p - 1).setOnes();

  std::size_t iter = 0;
  while (iter < params.max_iterations && grad_norm(grad) >= params.gradient_tolerance) {
    const Eigen::VectorXd t = linear_scores(theta, data);
    Eigen::VectorXd weights(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = sigmoid(t(i));
      weights(i) = s * (1.0 - s) * inv_n;
    }
    Eigen::MatrixXd hessian = design.transpose() * weights.asDiagonal() * design;
    for (Eigen::Index j = 0; j < p - 1; ++j) hessian(j, j) += params.l2_strength;
    // The bias is unpenalized; a tiny ridge keeps the system solvable when the
    // curvature vanishes numerically.
    hessian(p - 1, p - 1) += 1e-12;

    const Eigen::Map<const Eigen::VectorXd> g(grad.data(), p);
    Eigen::VectorXd step = hessian.ldlt().solve(-g);
    double directional = g.dot(step);
    if (!step.allFinite() || directional >= 0.0) {
      step = -g;
      directional = -g.squaredNorm();
    }

    // Armijo backtracking; guarantees monotone decrease.
    double rate = 1.0;
    std::vector<double> candidate(theta.size());
    double candidate_obj = objective;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t j = 0; j < theta.size(); ++j) {
        candidate[j] = theta[j] + rate * step(static_cast<Eigen::Index>(j));
      }
      candidate_obj = logistic_objective(candidate, data, params.l2_strength);
      if (candidate_obj <= objective + 1e-4 * rate * directional) {
        accepted = true;
        break;
      }
      rate *= 0.5;
    }
    if (!accepted) break;  // no further progress representable in double precision
    theta = candidate;
    objective = candidate_obj;
    grad = logistic_gradient(theta, data, params.l2_strength);
    ++iter;
    if (trace) trace->objective.push_back(objective);
  }
  if (trace) {
    trace->iterations = iter;
    trace->final_gradient_norm = grad_norm(grad);
  }

  LogisticModel model;
  model.weights.assign(theta.begin(), theta.end() - 1);
  model.bias = theta.back();
  model.l2_strength = params.l2_strength;
  return model;
}

double predict_logistic(const LogisticModel& model, std::span<const double> feature,
                        double epsilon) {
  if (feature.size() != model.weights.size()) {
    throw DimensionMismatchError("logistic model expects dimension " +
                                 std::to_string(model.weights.size()) + ", got " +
                                 std::to_string(feature.size()));
  }
  double t = model.bias;
  for (std::size_t j = 0; j < feature.size(); ++j) t += model.weights[j] * feature[j];
  return clamp_prob(sigmoid(t), epsilon);
}

// ---------------------------------------------------------------------------
// SVM

double default_kernel_width(const Eigen::MatrixXd& features) {
  if (features.rows() < 1 || features.cols() < 1) throw InvalidInputError("empty feature matrix");
  const Eigen::RowVectorXd mean = features.colwise().mean();
  const double mean_var =
      (features.rowwise() - mean).array().square().colwise().mean().mean();
  if (!(mean_var > 0.0)) throw InvalidInputError("degenerate kernel: features have zero variance");
  return 1.0 / (static_cast<double>(features.cols()) * mean_var);
}

namespace {

class KernelRows {
 public:
  static constexpr Eigen::Index kFullMatrixLimit = 4000;

  KernelRows(const Eigen::MatrixXd& x, double gamma) : x_(x), gamma_(gamma) {
    norms_ = x_.rowwise().squaredNorm();
    if (x_.rows() <= kFullMatrixLimit) {
      full_ = compute_block();
      cached_ = true;
    }
  }

  double operator()(Eigen::Index i, Eigen::Index j) const {
    if (cached_) return full_(i, j);
    return kernel(i, j);
  }

  // Row i as a dense vector.
  Eigen::VectorXd row(Eigen::Index i) const {
    if (cached_) return full_.row(i).transpose();
    Eigen::VectorXd out(x_.rows());
    for (Eigen::Index j = 0; j < x_.rows(); ++j) out(j) = kernel(i, j);
    return out;
  }

 private:
  double kernel(Eigen::Index i, Eigen::Index j) const {
    const double d2 = std::max(0.0, norms_(i) + norms_(j) - 2.0 * x_.row(i).dot(x_.row(j)));
    return std::exp(-gamma_ * d2);
  }

  Eigen::MatrixXd compute_block() const {
    Eigen::MatrixXd gram = x_ * x_.transpose();
    const Eigen::Index n = x_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d2 = std::max(0.0, norms_(i) + norms_(j) - 2.0 * gram(i, j));
        gram(i, j) = std::exp(-gamma_ * d2);
      }
    }
    return gram;
  }

  const Eigen::MatrixXd& x_;
  double gamma_;
  Eigen::VectorXd norms_;
  Eigen::MatrixXd full_;
  bool cached_ = false;
};

constexpr double kTau = 1e-12;

}  // namespace

KernelSvmModel train_svm_dual(const LabeledSet& data, const SvmParams& params,
                              SvmDualSolution* solution) {
  validate_labeled_set(data);
  if (!(params.penalty > 0.0)) throw InvalidInputError("SVM penalty C must be positive");
  if (!(params.tolerance > 0.0)) throw InvalidInputError("SVM tolerance must be positive");
  const double gamma =
      params.kernel_width > 0.0 ? params.kernel_width : default_kernel_width(data.features);
  const double c = params.penalty;
  const auto n = static_cast<Eigen::Index>(data.size());

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = data.labels[static_cast<std::size_t>(i)] == 1 ? 1 : -1;

  const KernelRows kernel(data.features, gamma);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - e

  auto in_up = [&](Eigen::Index t) {
    return (y(t) > 0 && alpha(t) < c) || (y(t) < 0 && alpha(t) > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < c);
  };

  std::size_t iter = 0;
  double violation = 0.0;
  while (true) {
    // Working set selection, second-order information (Fan, Chen, Lin 2005).
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i_sel = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y(t) * grad(t) > gmax) {
        gmax = -y(t) * grad(t);
        i_sel = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index j_sel = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd k_i = i_sel >= 0 ? kernel.row(i_sel) : Eigen::VectorXd();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y(t) * grad(t);
      gmin = std::min(gmin, v);
      if (i_sel < 0) continue;
      const double b = gmax - v;
      if (b > 0) {
        double a = k_i(i_sel) + kernel(t, t) - 2.0 * k_i(t);
        if (a <= 0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) {
          best_obj = obj;
          j_sel = t;
        }
      }
    }
    violation = gmax - gmin;
    if (i_sel < 0 || j_sel < 0 || violation < params.tolerance) break;
    if (iter >= params.max_iterations) break;
    ++iter;

    const Eigen::Index i = i_sel;
    const Eigen::Index j = j_sel;
    const Eigen::VectorXd k_j = kernel.row(j);
    const double old_ai = alpha(i);
    const double old_aj = alpha(j);
    const double qii = k_i(i);
    const double qjj = k_j(j);
    const double qij = y(i) * y(j) * k_i(j);

    // Two-variable subproblem, clipped to the box (as in LIBSVM).
    if (y(i) != y(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = c - diff;
        }
      } else if (alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = sum - c;
        }
      } else if (alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = sum;
      }
      if (sum > c) {
        if (alpha(j) > c) {
          alpha(j) = c;
          alpha(i) = sum - c;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = sum;
      }
    }

    const double dai = alpha(i) - old_ai;
    const double daj = alpha(j) - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad(t) += y(t) * (y(i) * k_i(t) * dai + y(j) * k_j(t) * daj);
    }
  }

  // rho from free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    if (alpha(t) >= c) {
      if (y(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  KernelSvmModel model;
  model.kernel_width = gamma;
  model.penalty = c;
  model.bias = -rho;
  model.seed = params.seed;
  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) > 0) support.push_back(t);
  }
  model.support_features.resize(static_cast<Eigen::Index>(support.size()), data.features.cols());
  model.dual_coefficients.resize(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) {
    model.support_features.row(static_cast<Eigen::Index>(s)) = data.features.row(support[s]);
    model.dual_coefficients[s] = alpha(support[s]) * y(support[s]);
  }

  if (solution) {
    solution->alpha.assign(alpha.data(), alpha.data() + n);
    solution->y.assign(y.data(), y.data() + n);
    solution->bias = model.bias;
    solution->max_violation = violation;
    solution->iterations = iter;
  }
  return model;
}

double svm_decision(const KernelSvmModel& model, std::span<const double> feature) {
  if (feature.size() != model.dim()) {
    throw DimensionMismatchError("SVM expects dimension " + std::to_string(model.dim()) +
                                 ", got " + std::to_string(feature.size()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> x(feature.data(),
                                               static_cast<Eigen::Index>(feature.size()));
  double f = model.bias;
  for (Eigen::Index s = 0; s < model.support_features.rows(); ++s) {
    const double d2 = (model.support_features.row(s) - x).squaredNorm();
    f += model.dual_coefficients[static_cast<std::size_t>(s)] * std::exp(-model.kernel_width * d2);
  }
  return f;
}

double predict_svm(const KernelSvmModel& model, std::span<const double> feature, double epsilon) {
  const double f = svm_decision(model, feature);
  return clamp_prob(sigmoid(model.platt_slope * f + model.platt_offset), epsilon);
}

PlattFit fit_platt(std::span<const double> decision_values, std::span<const int> labels) {
  if (decision_values.size() != labels.size()) {
    throw DimensionMismatchError("decision values and labels differ in length");
  }
  const std::size_t n = labels.size();
  double prior1 = 0.0;
  for (int y : labels) prior1 += (y == 1);
  const double prior0 = static_cast<double>(n) - prior1;
  if (prior1 == 0.0 || prior0 == 0.0) throw SingleClassError("Platt scaling needs both classes");

  // Platt's parameterization P = 1 / (1 + exp(a f + b)); flipped at the end.
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] == 1 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double aa, double bb) {
    double fval = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fapb = decision_values[i] * aa + bb;
      if (fapb >= 0) fval += target[i] * fapb + std::log1p(std::exp(-fapb));
      else fval += (target[i] - 1.0) * fapb + std::log1p(std::exp(fapb));
    }
    return fval;
  };
  double fval = objective(a, b);
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;
  constexpr double kMinStep = 1e-10;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fapb = decision_values[i] * a + b;
      double p, q;
      if (fapb >= 0) {
        p = std::exp(-fapb) / (1.0 + std::exp(-fapb));
        q = 1.0 / (1.0 + std::exp(-fapb));
      } else {
        p = 1.0 / (1.0 + std::exp(fapb));
        q = std::exp(fapb) / (1.0 + std::exp(fapb));
      }
      const double d2 = p * q;
      h11 += decision_values[i] * decision_values[i] * d2;
      h22 += d2;
      h21 += decision_values[i] * d2;
      const double d1 = target[i] - p;
      g1 += decision_values[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return PlattFit{-a, -b};
}

KernelSvmModel train_svm_rbf(const LabeledSet& data, const SvmParams& params) {
  validate_labeled_set(data);
  if (data.size() < 10) throw InvalidInputError("SVM calibration needs at least 10 samples");
  if (!(params.calibration_fraction > 0.0 && params.calibration_fraction < 1.0)) {
    throw InvalidInputError("calibration fraction must lie in (0, 1)");
  }
  SvmParams fixed = params;
  if (fixed.kernel_width <= 0.0) fixed.kernel_width = default_kernel_width(data.features);

  // Stratified held-out split.
  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> fit_idx;
  std::vector<std::size_t> cal_idx;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == cls) members.push_back(i);
    }
    if (members.size() < 2) throw InvalidInputError("each class needs two samples for calibration");
    detail::seeded_shuffle(members, rng);
    auto held = static_cast<std::size_t>(
        std::ceil(params.calibration_fraction * static_cast<double>(members.size())));
    held = std::clamp<std::size_t>(held, 1, members.size() - 1);
    cal_idx.insert(cal_idx.end(), members.begin(), members.begin() + static_cast<long>(held));
    fit_idx.insert(fit_idx.end(), members.begin() + static_cast<long>(held), members.end());
  }
  std::sort(fit_idx.begin(), fit_idx.end());
  std::sort(cal_idx.begin(), cal_idx.end());

  auto subset = [&](const std::vector<std::size_t>& idx) {
    LabeledSet s;
    s.features.resize(static_cast<Eigen::Index>(idx.size()), data.features.cols());
    s.labels.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s.features.row(static_cast<Eigen::Index>(k)) = data.features.row(static_cast<Eigen::Index>(idx[k]));
      s.labels[k] = data.labels[idx[k]];
    }
    return s;
  };

  const LabeledSet fit_set = subset(fit_idx);
  const KernelSvmModel partial = train_svm_dual(fit_set, fixed);
  std::vector<double> decisions;
  std::vector<int> cal_labels;
  for (std::size_t i : cal_idx) {
    const Eigen::RowVectorXd row = data.features.row(static_cast<Eigen::Index>(i));
    decisions.push_back(svm_decision(partial, std::span<const double>(row.data(), row.size())));
    cal_labels.push_back(data.labels[i]);
  }
  const PlattFit platt = fit_platt(decisions, cal_labels);

  KernelSvmModel model = train_svm_dual(data, fixed);
  model.platt_slope = platt.slope;
  model.platt_offset = platt.offset;
  model.seed = params.seed;
  return model;
}

}  // namespace fmad
