#include <doctest.h>

#include <cmath>
#include <random>

#include "fmad/error.hpp"
#include "fmad/features.hpp"
#include "fmad/synth.hpp"
#include "oracles.hpp"

using namespace fmad;

TEST_CASE("channel concatenation order") {
  std::array<ResidualProfile, 3> zero;
  for (auto& r : zero) r.residuals.assign(7, 0.0);
  const FeatureVector z = concat_channels(zero);
  CHECK(z.size() == 21);
  for (double v : z) CHECK(v == 0.0);

  std::array<ResidualProfile, 3> unit = zero;
  unit[0].residuals[0] = 1.0;
  const FeatureVector e = concat_channels(unit);
  CHECK(e[0] == 1.0);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] == 0.0);

  std::array<ResidualProfile, 3> bad = zero;
  bad[2].residuals.resize(6);
  CHECK_THROWS_AS(concat_channels(bad), DimensionMismatchError);
}

TEST_CASE("gray image gives three identical thirds") {
  const Image img = power_law_image({64, 2.0, 3, std::nullopt});
  const FeatureVector f = image_feature(Image::from_gray(img.channels[0]));
  const std::size_t k = band_count(64);
  REQUIRE(f.size() == 3 * k);
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(f[i] == f[k + i]);
    CHECK(f[i] == f[2 * k + i]);
  }
}

TEST_CASE("flat channel contributes zero residuals") {
  Image img = power_law_image({32, 2.0, 4, std::nullopt});
  img.channels[1] = ImageChannel(32, 32, 0.0);
  const FeatureVector f = image_feature(img);
  const std::size_t k = band_count(32);
  for (std::size_t i = 0; i < k; ++i) CHECK(f[k + i] == 0.0);
}

TEST_CASE("standardizer examples") {
  const std::vector<FeatureVector> s = {{0.0, 2.0}, {2.0, 0.0}};
  const Standardizer st = fit_standardizer(s);
  CHECK(st.means == std::vector<double>{1.0, 1.0});
  CHECK(st.std_devs == std::vector<double>{1.0, 1.0});

  const std::vector<FeatureVector> same = {{0.3, -1.0}, {0.3, -1.0}, {0.3, -1.0}};
  const Standardizer deg = fit_standardizer(same);
  for (double sd : deg.std_devs) CHECK(sd == kDefaultStdEpsilon);
  for (double v : deg.apply(same[0])) CHECK(v == 0.0);

  const std::vector<FeatureVector> mixed = {{5.0, 1.0}, {5.0, 2.0}, {5.0, 4.0}};
  const Standardizer m = fit_standardizer(mixed);
  CHECK(m.std_devs[0] == kDefaultStdEpsilon);
  CHECK(m.std_devs[1] > kDefaultStdEpsilon);

  CHECK_THROWS_AS(fit_standardizer(std::vector<FeatureVector>{{1.0}}), InvalidInputError);
  CHECK_THROWS_AS(st.apply(std::vector<double>{1.0}), DimensionMismatchError);
}

TEST_CASE("standardized training set has zero mean") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<FeatureVector> s(40, FeatureVector(9));
  for (auto& v : s) {
    for (double& x : v) x = g(rng);
  }
  const Standardizer st = fit_standardizer(s);
  std::vector<double> mean(9, 0.0);
  for (const auto& v : s) {
    const FeatureVector z = st.apply(v);
    for (std::size_t j = 0; j < 9; ++j) mean[j] += z[j] / 40.0;
  }
  for (double m : mean) CHECK(std::abs(m) < 1e-8);
}

TEST_CASE("PCA on a line") {
  std::vector<FeatureVector> s;
  for (int i = -3; i <= 4; ++i) s.push_back({0.5 * i, 0.5 * i});
  const PcaModel pca = fit_pca(s, 1);
  CHECK(pca.components(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(pca.components(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  double mean_sq = 0.0;
  double mean = 0.0;
  for (const auto& v : s) mean += v[0] / 8.0;
  for (const auto& v : s) mean_sq += 2.0 * (v[0] - mean) * (v[0] - mean) / 8.0;
  CHECK(pca.explained_variance[0] == doctest::Approx(mean_sq).epsilon(1e-12));
  CHECK_THROWS_AS(fit_pca(s, 3), InvalidInputError);
}

TEST_CASE("PCA tie uses index order") {
  const std::vector<FeatureVector> s = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  const PcaModel pca = fit_pca(s, 2);
  CHECK(pca.explained_variance[0] == doctest::Approx(pca.explained_variance[1]));
  CHECK(pca.components(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(pca.components(0, 1)) < 1e-12);
  CHECK(std::abs(pca.components(1, 0)) < 1e-12);
  CHECK(pca.components(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("PCA recovers a 3-dimensional subspace") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd basis(3, 10);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = g(rng);
  std::vector<FeatureVector> s;
  for (int i = 0; i < 50; ++i) {
    Eigen::RowVector3d c(g(rng), g(rng), g(rng));
    const Eigen::RowVectorXd x = c * basis;
    s.emplace_back(x.data(), x.data() + x.size());
  }
  const Standardizer st = fit_standardizer(s);
  std::vector<FeatureVector> z;
  for (const auto& v : s) z.push_back(st.apply(v));
  const PcaModel pca = fit_pca(z, 3);
  const Eigen::MatrixXd gram = pca.components * pca.components.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const FeatureVector back = inverse_transform(transform(s[i], st, pca), pca);
    for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(back[j] - z[i][j]) < 1e-8);
  }
}

TEST_CASE("reconstruction error equals energy outside the kept subspace") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t dim = 8;
  std::vector<FeatureVector> s(30, FeatureVector(dim));
  for (auto& v : s) {
    for (std::size_t j = 0; j < dim; ++j) v[j] = g(rng) * static_cast<double>(j + 1);
  }
  const Standardizer st = fit_standardizer(s);
  std::vector<FeatureVector> z;
  for (const auto& v : s) z.push_back(st.apply(v));
  const PcaModel pca = fit_pca(z, 3);

  // Full eigendecomposition oracle.
  Eigen::MatrixXd x(30, dim);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(Eigen::Index(i), Eigen::Index(j)) = z[i][j];
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centered.transpose() * centered / 30.0);
  const Eigen::MatrixXd rest = solver.eigenvectors().leftCols(dim - 3);

  const FeatureVector probe = {0.3, -2.0, 1.0, 4.0, -0.5, 2.2, 7.0, -3.0};
  const FeatureVector pz = st.apply(probe);
  const FeatureVector back = inverse_transform(transform(probe, st, pca), pca);
  double err = 0.0;
  for (std::size_t j = 0; j < dim; ++j) err += (pz[j] - back[j]) * (pz[j] - back[j]);
  const Eigen::VectorXd pv = Eigen::Map<const Eigen::VectorXd>(pz.data(), dim);
  CHECK(err == doctest::Approx((rest.transpose() * pv).squaredNorm()).epsilon(1e-9));
}

TEST_CASE("PCA output covariance is diagonal and transform maps means to zero") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<FeatureVector> s(60, FeatureVector(12));
  for (auto& v : s) {
    const double shared = g(rng);
    for (std::size_t j = 0; j < 12; ++j) v[j] = shared * (j % 3) + g(rng) + 5.0;
  }
  const Standardizer st = fit_standardizer(s);
  std::vector<FeatureVector> z;
  for (const auto& v : s) z.push_back(st.apply(v));
  const PcaModel pca = fit_pca(z, default_pca_dim(64, 12, 60));
  CHECK(pca.output_dim() == 12);
  Eigen::MatrixXd y(60, 12);
  for (std::size_t i = 0; i < 60; ++i) {
    const FeatureVector t = transform(s[i], st, pca);
    for (std::size_t j = 0; j < 12; ++j) y(Eigen::Index(i), Eigen::Index(j)) = t[j];
  }
  const Eigen::MatrixXd yc = y.rowwise() - y.colwise().mean();
  Eigen::MatrixXd cov = yc.transpose() * yc / 60.0;
  cov.diagonal().setZero();
  CHECK(cov.cwiseAbs().maxCoeff() < 1e-6);
  for (double v : transform(st.means, st, pca)) CHECK(std::abs(v) < 1e-12);

  for (Eigen::Index r = 0; r < pca.components.rows(); ++r) {
    for (Eigen::Index c = 0; c < pca.components.cols(); ++c) {
      if (std::abs(pca.components(r, c)) > 1e-12) {
        CHECK(pca.components(r, c) > 0.0);
        break;
      }
    }
  }
  const PcaModel again = fit_pca(z, 12);
  CHECK(again.components == pca.components);

  PcaModel identity;
  identity.components = Eigen::MatrixXd::Identity(12, 12);
  const FeatureVector direct = st.apply(s[0]);
  const FeatureVector via = transform(s[0], st, identity);
  for (std::size_t j = 0; j < 12; ++j) CHECK(via[j] == direct[j]);
}

TEST_CASE("default PCA dimension") {
  CHECK(default_pca_dim(64, 1059, 400) == 64);
  CHECK(default_pca_dim(64, 10, 400) == 10);
  CHECK(default_pca_dim(64, 1059, 20) == 19);
}
