#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tvem/dataset.hpp"
#include "tvem/error.hpp"
#include "tvem/responsibilities.hpp"

namespace tvem {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

/// Equal-weight mixture with one shared spherical variance.
struct IsotropicGMM {
  Matrix means;   // C x D
  double sigma2 = 1.0;

  std::size_t components() const { return static_cast<std::size_t>(means.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }

  void validate() const {
    if (means.rows() < 1 || means.cols() < 1) throw ConfigError("model needs C >= 1 and D >= 1");
    if (!means.allFinite()) throw ConfigError("model means must be finite");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma2 must be positive and finite");
  }
};

/// Mixture with per-component weight, mean and full covariance.
struct GeneralGMM {
  Vector weights;                           // C, sums to 1
  Matrix means;                             // C x D
  std::vector<Eigen::MatrixXd> covariances;  // C of D x D

  std::size_t components() const { return static_cast<std::size_t>(means.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }

  void validate() const {
    const auto c = means.rows();
    const auto d = means.cols();
    if (c < 1 || d < 1) throw ConfigError("model needs C >= 1 and D >= 1");
    if (weights.size() != c || static_cast<Eigen::Index>(covariances.size()) != c) {
      throw ConfigError("weights, means and covariances disagree on C");
    }
    if (!means.allFinite() || !weights.allFinite()) throw ConfigError("model parameters must be finite");
    if ((weights.array() < 0.0).any()) throw ConfigError("weights must be non-negative");
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
    for (const auto& cov : covariances) {
      if (cov.rows() != d || cov.cols() != d) throw ConfigError("covariance has the wrong shape");
      if (!cov.allFinite()) throw ConfigError("covariance must be finite");
      if (!cov.isApprox(cov.transpose(), 1e-12)) throw ConfigError("covariance must be symmetric");
    }
  }

  /// The isotropic model viewed as a general one (pi = 1/C, Sigma = sigma2 I).
  static GeneralGMM from_isotropic(const IsotropicGMM& iso) {
    GeneralGMM g;
    const auto c = iso.means.rows();
    const auto d = iso.means.cols();
    g.weights = Vector::Constant(c, 1.0 / static_cast<double>(c));
    g.means = iso.means;
    g.covariances.assign(static_cast<std::size_t>(c), iso.sigma2 * Eigen::MatrixXd::Identity(d, d));
    return g;
  }
};

// ---------------------------------------------------------------------------
// Log-space helpers

/// log(sum(exp(x))) with max shifting. Empty or all -inf input gives -inf.
inline double logsumexp(std::span<const double> x) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : x) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

// ---------------------------------------------------------------------------
// Covariance factorization

/// Adds lambda I with lambda = max(1e-6 trace/D, floor).
inline Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& cov, double floor = 0.0) {
  const auto d = cov.rows();
  const double lambda = std::max(1e-6 * cov.trace() / static_cast<double>(d), floor);
  Eigen::MatrixXd out = cov;
  out.diagonal().array() += lambda;
  return out;
}

/// Cholesky factor of one covariance plus log|2 pi Sigma|.
struct CovarianceFactor {
  Eigen::MatrixXd lower;   // L with Sigma = L L^T
  double log_det_2pi = 0.0;
  bool regularized = false;

  /// (y - mu)^T Sigma^{-1} (y - mu) through a triangular solve.
  double mahalanobis2(ConstRowRef y, ConstRowRef mu) const {
    const Eigen::VectorXd diff = (y - mu).transpose();
    const Eigen::VectorXd z = lower.triangularView<Eigen::Lower>().solve(diff);
    return z.squaredNorm();
  }
};

namespace detail {

inline bool try_cholesky(const Eigen::MatrixXd& cov, CovarianceFactor& out) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return false;
  Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::VectorXd diag = lower.diagonal();
  if (!diag.allFinite() || (diag.array() <= 0.0).any()) return false;
  out.log_det_2pi = static_cast<double>(cov.rows()) * kLog2Pi + 2.0 * diag.array().log().sum();
  out.lower = std::move(lower);
  return std::isfinite(out.log_det_2pi);
}

}  // namespace detail

/// Factorizes cov as given; if that fails, regularizes once and retries.
/// Throws NumericError when the regularized matrix is still not positive definite.
inline CovarianceFactor factor_covariance(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() < 1) throw ConfigError("covariance must be square");
  CovarianceFactor f;
  if (cov.allFinite() && detail::try_cholesky(cov, f)) return f;
  if (!cov.allFinite() || !(cov.trace() > 0.0)) throw NumericError("covariance is not positive definite");
  if (!detail::try_cholesky(regularize_covariance(cov), f)) {
    throw NumericError("covariance is not positive definite after regularization");
  }
  f.regularized = true;
  return f;
}

/// Per-component factorizations of a GeneralGMM, computed once and reused.
class PreparedGeneral {
 public:
  explicit PreparedGeneral(const GeneralGMM& model) : model_(&model) {
    factors_.reserve(model.covariances.size());
    for (const auto& cov : model.covariances) factors_.push_back(factor_covariance(cov));
    log_weights_ = model.weights.array().log();
  }

  /// log pi_c + log N(y; mu_c, Sigma_c)
  double log_joint(ConstRowRef y, std::size_t c) const {
    const auto& f = factors_[c];
    const auto ci = static_cast<Eigen::Index>(c);
    return log_weights_(ci) - 0.5 * f.log_det_2pi - 0.5 * f.mahalanobis2(y, model_->means.row(ci));
  }

  const CovarianceFactor& factor(std::size_t c) const { return factors_[c]; }

 private:
  const GeneralGMM* model_;
  std::vector<CovarianceFactor> factors_;
  Vector log_weights_;
};

// ---------------------------------------------------------------------------
// Densities

/// log N(y; mu_c, sigma2 I) = -(D/2) log(2 pi sigma2) - |y - mu_c|^2 / (2 sigma2)
inline double log_density_iso(ConstRowRef y, std::size_t c, const IsotropicGMM& model) {
  const double d = static_cast<double>(y.size());
  const double r2 = (y - model.means.row(static_cast<Eigen::Index>(c))).squaredNorm();
  return -0.5 * d * (kLog2Pi + std::log(model.sigma2)) - r2 / (2.0 * model.sigma2);
}

/// log pi_c - (1/2) log|2 pi Sigma_c| - (1/2) |y - mu_c|^2_{Sigma_c}.
/// Factorizes Sigma_c on every call; bulk evaluation goes through PreparedGeneral.
inline double log_joint_general(ConstRowRef y, std::size_t c, const GeneralGMM& model) {
  const auto ci = static_cast<Eigen::Index>(c);
  const auto f = factor_covariance(model.covariances[c]);
  return std::log(model.weights(ci)) - 0.5 * f.log_det_2pi - 0.5 * f.mahalanobis2(y, model.means.row(ci));
}

/// N x C table of log p(c, y^(n) | Theta) for the isotropic model.
inline Matrix log_joint_table(const Dataset& data, const IsotropicGMM& model) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto c = static_cast<Eigen::Index>(model.components());
  const double d = static_cast<double>(data.d());
  const double offset = -std::log(static_cast<double>(c)) - 0.5 * d * (kLog2Pi + std::log(model.sigma2));
  const double scale = 1.0 / (2.0 * model.sigma2);
  Matrix table(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) {
      table(i, k) = offset - (data.points().row(i) - model.means.row(k)).squaredNorm() * scale;
    }
  }
  return table;
}

/// N x C table of log p(c, y^(n) | Theta) for the general model.
inline Matrix log_joint_table(const Dataset& data, const GeneralGMM& model) {
  const PreparedGeneral prepared(model);
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto c = static_cast<Eigen::Index>(model.components());
  Matrix table(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) table(i, k) = prepared.log_joint(data.points().row(i), static_cast<std::size_t>(k));
  }
  return table;
}

template <class M>
concept MixtureModel = requires(const M& m, const Dataset& data) {
  { m.components() } -> std::convertible_to<std::size_t>;
  { log_joint_table(data, m) } -> std::same_as<Matrix>;
};

/// Normalizes one row of log joints in place into probabilities.
inline void softmax_row(std::span<double> row) {
  const double top = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double& v : row) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

/// Exact posteriors r_c^(n), computed in log space.
template <MixtureModel M>
Responsibilities responsibilities_exact(const Dataset& data, const M& model) {
  Matrix table = log_joint_table(data, model);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    softmax_row(std::span<double>(table.row(i).data(), static_cast<std::size_t>(table.cols())));
  }
  return Responsibilities::dense(table);
}

}  // namespace tvem
