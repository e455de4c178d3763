#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fmad {

// Label convention: 1 = bona fide, 0 = morph.
struct LabeledSet {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

// Throws SingleClassError, InvalidInputError, DimensionMismatchError.
void validate_labeled_set(const LabeledSet& data);

double sigmoid(double t);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticParams {
  double l2_strength = 1e-2;
  double gradient_tolerance = 1e-6;
  std::size_t max_iterations = 10000;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_strength = 0.0;
};

// Mean negative log-likelihood plus (l2/2)|w|^2; the bias is not penalized.
// theta = (w_0 .. w_{d-1}, bias).
double logistic_objective(std::span<const double> theta, const LabeledSet& data, double l2);
std::vector<double> logistic_gradient(std::span<const double> theta, const LabeledSet& data,
                                      double l2);

struct LogisticTrace {
  std::vector<double> objective;  // value after every accepted step, starting at theta = 0
  double final_gradient_norm = 0.0;
  std::size_t iterations = 0;
};

// Damped Newton from zero with Armijo backtracking.
LogisticModel train_logistic(const LabeledSet& data, const LogisticParams& params = {},
                             LogisticTrace* trace = nullptr);

// sigmoid(w.x + b), clamped to [epsilon, 1 - epsilon].
double predict_logistic(const LogisticModel& model, std::span<const double> feature,
                        double epsilon = 1e-12);

// ---------------------------------------------------------------------------
// RBF-kernel SVM

struct SvmParams {
  double penalty = 1.0;               // C
  double kernel_width = 0.0;          // gamma; <= 0 selects 1 / (d * mean variance)
  double tolerance = 1e-4;            // maximal KKT violation at exit
  std::size_t max_iterations = 10'000'000;
  double calibration_fraction = 0.2;  // held-out share for Platt scaling
  std::uint64_t seed = 0;
};

struct KernelSvmModel {
  Eigen::MatrixXd support_features;         // m x d
  std::vector<double> dual_coefficients;    // alpha_i * y_i, y in {-1, +1}
  double bias = 0.0;
  double kernel_width = 1.0;
  double penalty = 1.0;
  double platt_slope = 1.0;   // A
  double platt_offset = 0.0;  // B
  std::uint64_t seed = 0;

  std::size_t dim() const { return static_cast<std::size_t>(support_features.cols()); }
};

// Dual solution on every training sample, kept for feasibility checks.
struct SvmDualSolution {
  std::vector<double> alpha;
  std::vector<double> y;  // +1 bona fide, -1 morph
  double bias = 0.0;
  double max_violation = 0.0;
  std::size_t iterations = 0;
};

// 1 / (d * mean per-dimension population variance).
double default_kernel_width(const Eigen::MatrixXd& features);

// SMO with second-order working-set selection. The returned model carries the
// identity calibration A = 1, B = 0.
KernelSvmModel train_svm_dual(const LabeledSet& data, const SvmParams& params,
                              SvmDualSolution* solution = nullptr);

// Stratified seeded split: the SVM is fit on the larger part, Platt parameters
// on the held-out part, then the SVM is refit on all samples and keeps the
// calibration.
KernelSvmModel train_svm_rbf(const LabeledSet& data, const SvmParams& params = {});

double svm_decision(const KernelSvmModel& model, std::span<const double> feature);

// P(bona fide) = sigmoid(A f + B), f the raw decision value, clamped to
// [epsilon, 1 - epsilon].
double predict_svm(const KernelSvmModel& model, std::span<const double> feature,
                   double epsilon = 1e-12);

struct PlattFit {
  double slope = 1.0;
  double offset = 0.0;
};

// Platt scaling with the Lin/Lin/Weng Newton iteration and smoothed targets.
// Labels use the 1 = bona fide convention.
PlattFit fit_platt(std::span<const double> decision_values, std::span<const int> labels);

}  // namespace fmad
