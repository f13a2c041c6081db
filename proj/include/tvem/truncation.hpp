#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "tvem/dataset.hpp"
#include "tvem/error.hpp"
#include "tvem/mixture.hpp"
#include "tvem/responsibilities.hpp"

namespace tvem {

namespace detail {

// Writes the c_prime best clusters of one row into out. "Better" means a
// smaller key; equal keys go to the smaller index.
inline void smallest_keys(std::span<const double> keys, std::span<std::size_t> out, std::vector<std::size_t>& scratch) {
  scratch.resize(keys.size());
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  const auto better = [&](std::size_t a, std::size_t b) { return keys[a] < keys[b] || (keys[a] == keys[b] && a < b); };
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(out.size()), scratch.end(), better);
  std::copy_n(scratch.begin(), out.size(), out.begin());
}

inline std::size_t argmin_key(std::span<const double> keys) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < keys.size(); ++k) {
    if (keys[k] < keys[best]) best = k;
  }
  return best;
}

}  // namespace detail

/// N x C table of squared Euclidean distances.
inline Matrix squared_distances(const Dataset& data, const Matrix& means) {
  if (static_cast<std::size_t>(means.cols()) != data.d()) throw ConfigError("means have the wrong dimension");
  const auto n = static_cast<Eigen::Index>(data.n());
  Matrix out(n, means.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < means.rows(); ++k) out(i, k) = (data.points().row(i) - means.row(k)).squaredNorm();
  }
  return out;
}

/// Full TV-E-step for the isotropic model: each K^(n) holds the C' nearest
/// centers, nearest first, ties to the smaller index.
inline TruncationState select_nearest(const Dataset& data, const Matrix& means, std::size_t c_prime) {
  const auto clusters = static_cast<std::size_t>(means.rows());
  TruncationState state(data.n(), c_prime, clusters);
  const Matrix dist = squared_distances(data, means);
  std::vector<std::size_t> scratch;
  for (std::size_t n = 0; n < data.n(); ++n) {
    detail::smallest_keys({dist.row(static_cast<Eigen::Index>(n)).data(), clusters}, state.set(n), scratch);
  }
  return state;
}

/// Selects the C' clusters with the largest log joint per point. For the
/// general model at C' = 1 this is the sigma-pi criterion.
inline TruncationState select_highest_joint(const Matrix& log_joint, std::size_t c_prime) {
  const auto clusters = static_cast<std::size_t>(log_joint.cols());
  TruncationState state(static_cast<std::size_t>(log_joint.rows()), c_prime, clusters);
  std::vector<double> negated(clusters);
  std::vector<std::size_t> scratch;
  for (std::size_t n = 0; n < state.size(); ++n) {
    for (std::size_t c = 0; c < clusters; ++c) negated[c] = -log_joint(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
    detail::smallest_keys(negated, state.set(n), scratch);
  }
  return state;
}

/// Partial TV-E-step of lazy k-means. A point leaves its cluster only when the
/// globally nearest center c satisfies (1 + epsilon) |y - mu_c| < |y - mu_old|.
inline TruncationState lazy_reassign(const Dataset& data, const Matrix& means, double epsilon, const TruncationState& state) {
  if (state.c_prime() != 1) throw ConfigError("lazy reassignment is only defined for C' = 1");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (state.size() != data.n() || state.clusters() != static_cast<std::size_t>(means.rows())) {
    throw ConfigError("truncation state does not match data and means");
  }
  TruncationState next = state;
  const Matrix dist = squared_distances(data, means);
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    const std::size_t best = detail::argmin_key({dist.row(row).data(), static_cast<std::size_t>(dist.cols())});
    const std::size_t current = state.set(n)[0];
    if (best == current) continue;
    const double d_best = std::sqrt(dist(row, static_cast<Eigen::Index>(best)));
    const double d_current = std::sqrt(dist(row, static_cast<Eigen::Index>(current)));
    if ((1.0 + epsilon) * d_best < d_current) next.set(n)[0] = best;
  }
  return next;
}

/// |y - mu_c|^2_{Sigma_c} + log|2 pi Sigma_c| - 2 log pi_c. Lower is better.
/// Equal to -2 log p(c, y | Theta).
inline double sigma_pi_score(ConstRowRef y, std::size_t c, const GeneralGMM& model) {
  return -2.0 * log_joint_general(y, c, model);
}

/// q_c^(n) proportional to p(c, y^(n)) on K^(n), zero elsewhere, from a
/// precomputed N x C log-joint table. C' = 1 yields exact ones (binary kind).
inline Responsibilities truncated_responsibilities(const Matrix& log_joint, const TruncationState& state) {
  const std::size_t width = state.c_prime();
  const auto kind = width == 1 ? Responsibilities::Kind::binary : Responsibilities::Kind::sparse;
  Responsibilities resp(kind, state.size(), state.clusters(), width);
  for (std::size_t n = 0; n < state.size(); ++n) {
    const auto set = state.set(n);
    auto idx = resp.indices(n);
    auto w = resp.weights(n);
    for (std::size_t k = 0; k < width; ++k) {
      idx[k] = set[k];
      w[k] = log_joint(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(set[k]));
    }
    if (width == 1) {
      w[0] = 1.0;
    } else {
      softmax_row(w);
    }
  }
  return resp;
}

/// Truncated responsibilities under model.
template <MixtureModel M>
Responsibilities truncated_responsibilities(const Dataset& data, const M& model, const TruncationState& state) {
  if (state.size() != data.n() || state.clusters() != model.components()) {
    throw ConfigError("truncation state does not match data and model");
  }
  const Matrix table = log_joint_table(data, model);
  return truncated_responsibilities(table, state);
}

}  // namespace tvem
