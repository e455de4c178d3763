#include "fmad/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fmad/error.hpp"

namespace fmad {
namespace {

void check_same_dim(std::span<const FeatureVector> samples) {
  if (samples.empty()) throw InvalidInputError("no samples");
  const std::size_t dim = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != dim) throw DimensionMismatchError("samples differ in dimension");
  }
}

}  // namespace

FeatureVector Standardizer::apply(std::span<const double> feature) const {
  if (feature.size() != means.size()) {
    throw DimensionMismatchError("standardizer expects dimension " + std::to_string(means.size()) +
                                 ", got " + std::to_string(feature.size()));
  }
  FeatureVector out(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) out[i] = (feature[i] - means[i]) / std_devs[i];
  return out;
}

FeatureVector concat_channels(const std::array<ResidualProfile, 3>& residuals) {
  const std::size_t k = residuals[0].residuals.size();
  for (const auto& r : residuals) {
    if (r.residuals.size() != k) throw DimensionMismatchError("channel residual lengths differ");
  }
  FeatureVector out;
  out.reserve(3 * k);
  for (const auto& r : residuals) out.insert(out.end(), r.residuals.begin(), r.residuals.end());
  return out;
}

FeatureVector image_feature(const Image& image) {
  std::array<ResidualProfile, 3> residuals;
  for (std::size_t c = 0; c < 3; ++c) {
    const RadialProfile profile = radial_profile(log_magnitude_spectrum(image.channels[c]));
    try {
      residuals[c] = residual(profile, fit_power_law(profile));
    } catch (const DegenerateFitError&) {
      // A flat channel has no spectral content to deviate from the baseline.
      residuals[c].frequencies = profile.frequencies;
      residuals[c].residuals.assign(profile.size(), 0.0);
    }
  }
  return concat_channels(residuals);
}

Standardizer fit_standardizer(std::span<const FeatureVector> samples, double std_epsilon) {
  if (samples.size() < 2) throw InvalidInputError("standardizer needs at least two samples");
  check_same_dim(samples);
  const std::size_t dim = samples.front().size();
  const auto n = static_cast<double>(samples.size());
  Standardizer st;
  st.means.assign(dim, 0.0);
  st.std_devs.assign(dim, 0.0);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < dim; ++j) st.means[j] += s[j];
  }
  for (double& m : st.means) m /= n;
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = s[j] - st.means[j];
      st.std_devs[j] += d * d;
    }
  }
  for (double& sd : st.std_devs) sd = std::max(std::sqrt(sd / n), std_epsilon);
  return st;
}

std::size_t default_pca_dim(std::size_t requested, std::size_t feature_dim, std::size_t n) {
  if (n < 2) throw InvalidInputError("PCA needs at least two samples");
  return std::min({requested, feature_dim, n - 1});
}

PcaModel fit_pca(std::span<const FeatureVector> samples, std::size_t target_dim) {
  if (samples.size() < 2) throw InvalidInputError("PCA needs at least two samples");
  check_same_dim(samples);
  const std::size_t n = samples.size();
  const std::size_t dim = samples.front().size();
  if (target_dim == 0 || target_dim > std::min(dim, n - 1)) {
    throw InvalidInputError("PCA target dimension " + std::to_string(target_dim) +
                            " exceeds min(F, n - 1) = " + std::to_string(std::min(dim, n - 1)));
  }

  Eigen::MatrixXd x(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = samples[i][j];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("PCA eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  const double scale = std::max(std::abs(values(0)), 1e-300);
  const double tie_tol = 1e-10 * scale;

  // Canonical basis for every degenerate eigenspace.
  std::size_t start = 0;
  while (start < dim) {
    std::size_t end = start + 1;
    while (end < dim && std::abs(values(static_cast<Eigen::Index>(end)) -
                                 values(static_cast<Eigen::Index>(start))) <= tie_tol) {
      ++end;
    }
    const std::size_t m = end - start;
    if (m > 1 && start < target_dim) {
      const Eigen::MatrixXd span_basis =
          vectors.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(m));
      Eigen::MatrixXd canonical(dim, m);
      std::size_t found = 0;
      for (std::size_t e = 0; e < dim && found < m; ++e) {
        Eigen::VectorXd v = span_basis * span_basis.row(static_cast<Eigen::Index>(e)).transpose();
        for (int pass = 0; pass < 2; ++pass) {
          for (std::size_t q = 0; q < found; ++q) {
            const auto col = canonical.col(static_cast<Eigen::Index>(q));
            v -= col.dot(v) * col;
          }
        }
        const double norm = v.norm();
        if (norm > 1e-6) canonical.col(static_cast<Eigen::Index>(found++)) = v / norm;
      }
      vectors.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(found)) =
          canonical.leftCols(static_cast<Eigen::Index>(found));
    }
    start = end;
  }

  PcaModel pca;
  pca.components.resize(static_cast<Eigen::Index>(target_dim), static_cast<Eigen::Index>(dim));
  pca.explained_variance.resize(target_dim);
  for (std::size_t d = 0; d < target_dim; ++d) {
    Eigen::VectorXd v = vectors.col(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-12) {
        if (v(j) < 0) v = -v;
        break;
      }
    }
    pca.components.row(static_cast<Eigen::Index>(d)) = v.transpose();
    pca.explained_variance[d] = std::max(values(static_cast<Eigen::Index>(d)), 0.0);
  }
  return pca;
}

FeatureVector transform(std::span<const double> feature, const Standardizer& standardizer,
                        const PcaModel& pca) {
  if (standardizer.dim() != pca.input_dim()) {
    throw DimensionMismatchError("standardizer and PCA dimensions differ");
  }
  const FeatureVector z = standardizer.apply(feature);
  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
  const Eigen::VectorXd out = pca.components * zv;
  return FeatureVector(out.data(), out.data() + out.size());
}

FeatureVector inverse_transform(std::span<const double> reduced, const PcaModel& pca) {
  if (reduced.size() != pca.output_dim()) {
    throw DimensionMismatchError("inverse_transform: reduced dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> r(reduced.data(),
                                            static_cast<Eigen::Index>(reduced.size()));
  const Eigen::VectorXd out = pca.components.transpose() * r;
  return FeatureVector(out.data(), out.data() + out.size());
}

}  // namespace fmad
