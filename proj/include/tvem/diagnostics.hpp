#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tvem/dataset.hpp"
#include "tvem/error.hpp"
#include "tvem/mixture.hpp"
#include "tvem/responsibilities.hpp"

namespace tvem {

// All quantities are per data point and in nats unless noted.

/// Diagnostics recorded after every iteration of a run.
struct TraceRecord {
  std::size_t iter = 0;
  double J = 0.0;       // weighted squared residual sum (k-means objective for hard assignments)
  double F = 0.0;       // truncated free energy
  double L = 0.0;       // log-likelihood
  double gap = 0.0;     // L - F
  double sigma2 = 0.0;  // shared variance; pi-weighted trace(Sigma)/D for general models
  std::size_t n_changed = 0;
  std::vector<std::string> events;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// sum_n sum_c q_c^(n) |y^(n) - mu_c|^2. For binary assignments this is the
/// k-means objective J.
inline double objective_j(const Dataset& data, const Responsibilities& resp, const Matrix& means) {
  if (resp.size() != data.n()) throw ConfigError("responsibilities do not match data");
  double total = 0.0;
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto idx = resp.indices(n);
    const auto w = resp.weights(n);
    const auto y = data.point(n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (w[k] == 0.0) continue;
      total += w[k] * (y - means.row(static_cast<Eigen::Index>(idx[k]))).squaredNorm();
    }
  }
  return total;
}

/// F(K, Theta) = (1/N) sum_n log sum_{c in K^(n)} p(c, y^(n) | Theta).
template <MixtureModel M>
double free_energy_trunc(const Dataset& data, const M& model, const TruncationState& state) {
  if (state.size() != data.n() || state.clusters() != model.components()) {
    throw ConfigError("truncation state does not match data and model");
  }
  const Matrix table = log_joint_table(data, model);
  std::vector<double> row(state.c_prime());
  double total = 0.0;
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto set = state.set(n);
    for (std::size_t k = 0; k < set.size(); ++k) row[k] = table(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(set[k]));
    total += logsumexp(row);
  }
  return total / static_cast<double>(data.n());
}

/// -log C - (D/2) log(2 pi e sigma2). Equals the C' = 1 free energy after a
/// k-means iteration when sigma2 is the variance of that iteration.
inline double free_energy_kmeans(std::size_t clusters, std::size_t dim, double sigma2) {
  return -std::log(static_cast<double>(clusters)) -
         0.5 * static_cast<double>(dim) * (kLog2Pi + 1.0 + std::log(sigma2));
}

/// (1/N) sum_n log sum_c p(c, y^(n) | Theta).
template <MixtureModel M>
double log_likelihood(const Dataset& data, const M& model) {
  const Matrix table = log_joint_table(data, model);
  const auto cols = static_cast<std::size_t>(table.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) total += logsumexp({table.row(i).data(), cols});
  return total / static_cast<double>(data.n());
}

/// Closed-form gap between likelihood and k-means free energy,
/// D/2 + (1/N) sum_n log sum_c exp(-|y^(n) - mu_c|^2 / (2 sigma2)).
/// Exact when sigma2 is the variance of the hard assignments it refers to.
inline double kl_gap(const Dataset& data, const IsotropicGMM& model) {
  const auto clusters = model.components();
  const double scale = 1.0 / (2.0 * model.sigma2);
  std::vector<double> row(clusters);
  double total = 0.0;
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto y = data.point(n);
    for (std::size_t c = 0; c < clusters; ++c) row[c] = -(y - model.means.row(static_cast<Eigen::Index>(c))).squaredNorm() * scale;
    total += logsumexp(row);
  }
  return 0.5 * static_cast<double>(data.d()) + total / static_cast<double>(data.n());
}

/// Gap for any truncation: -(1/N) sum_n log sum_{c in K^(n)} r_c^(n), i.e. the
/// posterior mass the sets leave out.
template <MixtureModel M>
double kl_gap_truncated(const Dataset& data, const M& model, const TruncationState& state) {
  const Matrix table = log_joint_table(data, model);
  const auto cols = static_cast<std::size_t>(table.cols());
  std::vector<double> row(state.c_prime());
  double total = 0.0;
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    const double all = logsumexp({table.row(i).data(), cols});
    const auto set = state.set(n);
    for (std::size_t k = 0; k < set.size(); ++k) row[k] = table(i, static_cast<Eigen::Index>(set[k])) - all;
    total -= logsumexp(row);
  }
  return total / static_cast<double>(data.n());
}

/// Mean entropy of the rows of resp, with 0 log 0 = 0.
inline double mean_entropy(const Responsibilities& resp) {
  double total = 0.0;
  for (std::size_t n = 0; n < resp.size(); ++n) {
    for (double w : resp.weights(n)) {
      if (w > 0.0) total -= w * std::log(w);
    }
  }
  return total / static_cast<double>(resp.size());
}

/// -log C - (D/2) log(2 pi e sigma2) + mean entropy of q.
/// Matches free_energy_trunc when q is the truncated posterior of (means,
/// sigma2) and sigma2 is the weighted variance of q around means.
inline double free_energy_entropy_form(const Dataset& data, const Responsibilities& resp, const Matrix& means, double sigma2) {
  if (resp.size() != data.n()) throw ConfigError("responsibilities do not match data");
  return free_energy_kmeans(static_cast<std::size_t>(means.rows()), data.d(), sigma2) + mean_entropy(resp);
}

struct AppendixForms {
  double J = 0.0;    // objective used, after the floor
  double F = 0.0;
  double L = 0.0;    // F + gap
  double gap = 0.0;
};

/// Free energy, likelihood and gap written in terms of J, i.e. with sigma2
/// replaced by J / (D N). J is clamped below at D N times the variance floor.
inline AppendixForms appendix_forms(const Dataset& data, const Responsibilities& assignments, const Matrix& means, std::size_t clusters) {
  const double dim = static_cast<double>(data.d());
  const double n = static_cast<double>(data.n());
  AppendixForms out;
  out.J = std::max(objective_j(data, assignments, means), dim * n * data.variance_floor());
  out.F = -std::log(static_cast<double>(clusters)) - 0.5 * dim * std::log(2.0 * std::numbers::pi * std::numbers::e / (dim * n) * out.J);
  const double scale = 0.5 * dim * n / out.J;
  std::vector<double> row(static_cast<std::size_t>(means.rows()));
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto y = data.point(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = -scale * (y - means.row(static_cast<Eigen::Index>(c))).squaredNorm();
    total += logsumexp(row);
  }
  out.gap = 0.5 * dim + total / n;
  out.L = out.F + out.gap;
  return out;
}

}  // namespace tvem
