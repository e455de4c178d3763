#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fmad/spectral.hpp"

namespace fmad {

using FeatureVector = std::vector<double>;

inline constexpr double kDefaultStdEpsilon = 1e-8;
inline constexpr std::size_t kDefaultPcaDim = 64;

// Per-dimension mean and population standard deviation, clamped below.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> std_devs;

  std::size_t dim() const { return means.size(); }
  FeatureVector apply(std::span<const double> feature) const;
};

// Rows are orthonormal principal directions, sorted by decreasing variance.
struct PcaModel {
  Eigen::MatrixXd components;  // D x F
  std::vector<double> explained_variance;

  std::size_t output_dim() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(components.cols()); }
};

// R, G, B residuals concatenated channel-major into one vector of length 3K.
FeatureVector concat_channels(const std::array<ResidualProfile, 3>& residuals);

// Raw residual feature of a full RGB image.
FeatureVector image_feature(const Image& image);

Standardizer fit_standardizer(std::span<const FeatureVector> samples,
                              double std_epsilon = kDefaultStdEpsilon);

// Principal directions of the sample covariance.
//
// Eigenvalues are sorted in decreasing order. Eigenvalues that agree within a
// relative 1e-10 form one eigenspace; its basis is rebuilt by projecting the
// unit vectors e_0, e_1, ... in index order and orthonormalizing, so degenerate
// spectra still produce a reproducible basis. Each component is then flipped so
// that its first non-negligible coordinate is positive.
PcaModel fit_pca(std::span<const FeatureVector> samples, std::size_t target_dim);

// min(requested, feature_dim, n - 1)
std::size_t default_pca_dim(std::size_t requested, std::size_t feature_dim, std::size_t n);

// components * ((feature - means) / std_devs)
FeatureVector transform(std::span<const double> feature, const Standardizer& standardizer,
                        const PcaModel& pca);

// componentsᵀ * reduced, in standardized coordinates.
FeatureVector inverse_transform(std::span<const double> reduced, const PcaModel& pca);

}  // namespace fmad
