#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "support.hpp"

using namespace tvem;

namespace {

IsotropicGMM iso1d(std::initializer_list<double> mu, double sigma2) { return {support::column(mu), sigma2}; }

GeneralGMM general1d(std::vector<double> pi, std::vector<double> mu, std::vector<double> var) {
  GeneralGMM g;
  g.weights = Eigen::Map<const Vector>(pi.data(), static_cast<Eigen::Index>(pi.size()));
  g.means = Matrix(static_cast<Eigen::Index>(mu.size()), 1);
  for (std::size_t c = 0; c < mu.size(); ++c) {
    g.means(static_cast<Eigen::Index>(c), 0) = mu[c];
    g.covariances.push_back(Eigen::MatrixXd::Constant(1, 1, var[c]));
  }
  return g;
}

Eigen::RowVectorXd pt(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

}  // namespace

TEST(LogDensityIso, ZeroAtMeanWithUnitPeak) {
  const auto m = iso1d({2.5}, 1.0 / (2 * std::numbers::pi));
  EXPECT_NEAR(log_density_iso(pt({2.5}), 0, m), 0.0, 1e-15);
}

TEST(LogDensityIso, ClosedFormValue) {
  // -0.5 log(pi) - 1, evaluated at 50 digits.
  const auto m = iso1d({1.0}, 0.5);
  EXPECT_NEAR(log_density_iso(pt({0.0}), 0, m), -1.5723649429247001, 1e-14);
}

TEST(LogDensityIso, TranslationInvariant) {
  IsotropicGMM m{support::rows({{1, -2, 0.5}}), 0.7};
  const auto y = pt({0.3, 0.1, -1});
  const double base = log_density_iso(y, 0, m);
  const Eigen::RowVectorXd shift = pt({10, -4, 3});
  IsotropicGMM moved{m.means.rowwise() + shift, 0.7};
  EXPECT_NEAR(log_density_iso(y + shift, 0, moved), base, 1e-12);
}

TEST(LogJointGeneral, ReducesToIsotropic) {
  IsotropicGMM iso{support::rows({{0, 0}, {1, 2}, {-1, 3}}), 0.8};
  const auto g = GeneralGMM::from_isotropic(iso);
  const auto y = pt({0.4, 1.1});
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(log_joint_general(y, c, g), std::log(1.0 / 3) + log_density_iso(y, c, iso), 1e-12);
  }
}

TEST(LogJointGeneral, ClosedFormValue) {
  // log 0.5 - 0.5 log(8 pi)
  const auto g = general1d({0.5, 0.5}, {0, 0}, {4, 4});
  EXPECT_NEAR(log_joint_general(pt({0}), 0, g), -2.3052328943245633, 1e-14);
}

TEST(LogJointGeneral, ScalingCovarianceLowersPeak) {
  GeneralGMM g;
  g.weights = Vector::Ones(1);
  g.means = support::rows({{1, 2}});
  Eigen::MatrixXd cov(2, 2);
  cov << 2, 0.5, 0.5, 1;
  g.covariances = {cov};
  const double base = log_joint_general(g.means.row(0), 0, g);
  for (double t : {1.5, 3.0, 10.0}) {
    GeneralGMM s = g;
    s.covariances[0] *= t;
    EXPECT_LT(log_joint_general(g.means.row(0), 0, s), base);
  }
}

TEST(LogJointGeneral, FullCovarianceMatchesExplicitFormula) {
  GeneralGMM g;
  g.weights = Vector::Ones(1);
  g.means = support::rows({{0.5, -1}});
  Eigen::MatrixXd cov(2, 2);
  cov << 2, 0.7, 0.7, 1.5;
  g.covariances = {cov};
  const Eigen::Vector2d diff(1.5 - 0.5, 0.5 + 1);
  const double expected = -0.5 * std::log((2 * std::numbers::pi * cov).determinant()) - 0.5 * diff.dot(cov.inverse() * diff);
  EXPECT_NEAR(log_joint_general(pt({1.5, 0.5}), 0, g), expected, 1e-12);
}

TEST(Covariance, SingularIsRegularizedOnce) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1, 1, 1, 1;
  const auto f = factor_covariance(cov);
  EXPECT_TRUE(f.regularized);
  EXPECT_TRUE(std::isfinite(f.log_det_2pi));
  EXPECT_THROW(factor_covariance(Eigen::MatrixXd::Zero(2, 2)), NumericError);
  EXPECT_FALSE(factor_covariance(Eigen::MatrixXd::Identity(2, 2)).regularized);
}

TEST(Covariance, RegularizationAmount) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = 4;
  const auto r = regularize_covariance(cov);
  EXPECT_DOUBLE_EQ(r(1, 1), 1e-6 * 2);
  EXPECT_DOUBLE_EQ(regularize_covariance(Eigen::MatrixXd::Zero(2, 2), 1e-9)(0, 0), 1e-9);
}

TEST(Logsumexp, EdgeCases) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(logsumexp({}), -inf);
  const std::vector<double> all_neg = {-inf, -inf};
  EXPECT_EQ(logsumexp(all_neg), -inf);
  const std::vector<double> big = {-1e5, -1e5};
  EXPECT_NEAR(logsumexp(big), -1e5 + std::log(2.0), 1e-9);
}

TEST(ResponsibilitiesExact, SingleComponentIsOne) {
  const Dataset d = support::line({0, 5, -3});
  const auto r = responsibilities_exact(d, iso1d({1}, 0.1));
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(r.weight(n, 0), 1.0);
}

TEST(ResponsibilitiesExact, TwoTermSoftmax) {
  const Dataset d = support::line({0});
  const auto r = responsibilities_exact(d, iso1d({0, 1}, 0.5));
  EXPECT_NEAR(r.weight(0, 0), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(r.weight(0, 1), 0.2689414213699951, 1e-15);
}

TEST(ResponsibilitiesExact, SymmetricPoint) {
  const Dataset d = support::line({0.5});
  const auto r = responsibilities_exact(d, iso1d({0, 1}, 0.3));
  EXPECT_DOUBLE_EQ(r.weight(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.weight(0, 1), 0.5);
}

TEST(ResponsibilitiesExact, RowStochasticAndStableFarAway) {
  const Dataset d = support::random_instance(4, 60, 3, 4);
  IsotropicGMM m{support::rows({{1000, 0, 0}, {0, 1000, 0}, {0, 0, 1000}}), 1.0};
  const auto r = responsibilities_exact(d, m);
  for (std::size_t n = 0; n < d.n(); ++n) {
    double s = 0;
    for (double w : r.weights(n)) {
      EXPECT_TRUE(std::isfinite(w));
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      s += w;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ResponsibilitiesExact, GeneralMatchesIsotropicPath) {
  const Dataset d = support::random_instance(5, 80, 2, 3);
  IsotropicGMM iso{support::rows({{0, 0}, {1, 2}, {-2, 1}}), 1.3};
  const auto a = responsibilities_exact(d, iso).to_dense();
  const auto b = responsibilities_exact(d, GeneralGMM::from_isotropic(iso)).to_dense();
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ResponsibilitiesExact, MatchesLongDoubleOracle) {
  const Dataset d = support::random_instance(6, 30, 2, 3);
  IsotropicGMM m{support::rows({{0, 0}, {1, 2}, {-2, 1}}), 0.9};
  const auto r = responsibilities_exact(d, m);
  const auto y = support::to_vectors(d.points());
  const auto mu = support::to_vectors(m.means);
  for (std::size_t n = 0; n < d.n(); ++n) {
    oracle::Real total = 0;
    for (const auto& c : mu) total += oracle::joint_iso(y[n], c, 0.9L, 3);
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(r.weight(n, c), static_cast<double>(oracle::joint_iso(y[n], mu[c], 0.9L, 3) / total), 1e-14);
    }
  }
}

TEST(Models, Validation) {
  EXPECT_THROW(iso1d({0}, 0.0).validate(), ConfigError);
  auto g = general1d({0.5, 0.6}, {0, 1}, {1, 1});
  EXPECT_THROW(g.validate(), ConfigError);
  g = general1d({0.5, 0.5}, {0, 1}, {1, 1});
  EXPECT_NO_THROW(g.validate());
  GeneralGMM asym = GeneralGMM::from_isotropic({support::rows({{0, 0}}), 1.0});
  asym.covariances[0](0, 1) = 0.3;
  EXPECT_THROW(asym.validate(), ConfigError);
}
