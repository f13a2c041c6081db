#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tvem/dataset.hpp"
#include "tvem/diagnostics.hpp"
#include "tvem/error.hpp"
#include "tvem/mixture.hpp"
#include "tvem/responsibilities.hpp"
#include "tvem/rng.hpp"
#include "tvem/truncation.hpp"

namespace tvem {

enum class Algorithm { kmeans, em_gmm, kmeans_cprime, lazy_kmeans, sigma_pi };
enum class Seeding { uniform, dsquared };
enum class Termination { converged, max_iters, numeric_failure };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::em_gmm: return "em_gmm";
    case Algorithm::kmeans_cprime: return "kmeans_cprime";
    case Algorithm::lazy_kmeans: return "lazy_kmeans";
    case Algorithm::sigma_pi: return "sigma_pi";
  }
  return "?";
}

inline std::string_view to_string(Seeding s) { return s == Seeding::uniform ? "uniform" : "dsquared"; }

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::numeric_failure: return "numeric_failure";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::kmeans, Algorithm::em_gmm, Algorithm::kmeans_cprime, Algorithm::lazy_kmeans, Algorithm::sigma_pi}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline Seeding parse_seeding(std::string_view s) {
  if (s == "uniform") return Seeding::uniform;
  if (s == "dsquared") return Seeding::dsquared;
  throw ConfigError("unknown seeding '" + std::string(s) + "'");
}

struct RunConfig {
  Algorithm algorithm = Algorithm::kmeans;
  std::size_t c = 2;
  std::optional<std::size_t> c_prime;  // kmeans_cprime only
  std::optional<double> epsilon;       // lazy_kmeans only
  Seeding seeding = Seeding::dsquared;
  std::size_t max_iters = 200;
  double tol = 1e-9;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless the algorithm-specific fields are present
  /// exactly when required and c fits the data.
  void validate(std::size_t points) const {
    if (c < 1) throw ConfigError("c must be >= 1");
    if (c > points) throw ConfigError("c exceeds the number of data points");
    if ((algorithm == Algorithm::kmeans_cprime) != c_prime.has_value()) {
      throw ConfigError("c_prime is required for kmeans_cprime and only for it");
    }
    if (c_prime && (*c_prime < 1 || *c_prime > c)) throw ConfigError("need 1 <= c_prime <= c");
    if ((algorithm == Algorithm::lazy_kmeans) != epsilon.has_value()) {
      throw ConfigError("epsilon is required for lazy_kmeans and only for it");
    }
    if (epsilon && !(*epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");
  }
};

using Model = std::variant<IsotropicGMM, GeneralGMM>;

struct FitResult {
  Model model;
  Responsibilities responsibilities;
  TruncationState state;
  std::vector<TraceRecord> trace;
  Termination termination = Termination::max_iters;
  std::string failure;  // set for numeric_failure

  std::size_t iterations() const { return trace.empty() ? 0 : trace.size() - 1; }
  const Matrix& means() const {
    return std::visit([](const auto& m) -> const Matrix& { return m.means; }, model);
  }
};

/// Called with every trace record together with the model, sets and
/// responsibilities it was computed from (record 0 included).
using IterationObserver =
    std::function<void(const TraceRecord&, const Model&, const TruncationState&, const Responsibilities&)>;

// ---------------------------------------------------------------------------
// Seeding

/// c distinct data points drawn uniformly without replacement.
inline std::vector<std::size_t> uniform_indices(const Dataset& data, std::size_t c, Rng& rng) {
  if (c > data.n()) throw ConfigError("cannot seed more centers than data points");
  std::vector<std::size_t> pool(data.n());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  for (std::size_t i = 0; i < c; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(c);
  return pool;
}

inline Matrix gather_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.d()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.point(rows[i]);
  return out;
}

inline Matrix seed_uniform(const Dataset& data, std::size_t c, Rng& rng) {
  return gather_rows(data, uniform_indices(data, c, rng));
}

/// Squared distance of every point to its nearest chosen point.
inline std::vector<double> dsquared_weights(const Dataset& data, const std::vector<std::size_t>& chosen) {
  std::vector<double> w(data.n(), std::numeric_limits<double>::infinity());
  for (std::size_t n = 0; n < data.n(); ++n) {
    for (std::size_t k : chosen) w[n] = std::min(w[n], (data.point(n) - data.point(k)).squaredNorm());
  }
  return w;
}

/// k-means++ seeding. The first center is uniform (or forced through first);
/// each further center is drawn with probability proportional to D^2. When
/// all remaining D^2 mass is zero the draw falls back to a uniform choice
/// among the points not yet chosen.
inline std::vector<std::size_t> dsquared_indices(const Dataset& data, std::size_t c, Rng& rng,
                                                 std::optional<std::size_t> first = std::nullopt) {
  if (c > data.n()) throw ConfigError("cannot seed more centers than data points");
  if (c == 0) return {};
  if (first && *first >= data.n()) throw ConfigError("forced first center out of range");
  std::vector<std::size_t> chosen;
  chosen.reserve(c);
  std::vector<char> taken(data.n(), 0);
  chosen.push_back(first ? *first : static_cast<std::size_t>(rng.uniform_index(data.n())));
  taken[chosen.back()] = 1;
  std::vector<double> d2 = dsquared_weights(data, chosen);
  while (chosen.size() < c) {
    double total = 0.0;
    for (std::size_t n = 0; n < data.n(); ++n) total += taken[n] ? 0.0 : d2[n];
    std::size_t pick = data.n();
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t n = 0; n < data.n(); ++n) {
        if (taken[n] || d2[n] <= 0.0) continue;
        cum += d2[n];
        pick = n;
        if (cum > u) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t n = 0; n < data.n(); ++n) {
        if (!taken[n]) rest.push_back(n);
      }
      pick = rest[static_cast<std::size_t>(rng.uniform_index(rest.size()))];
    }
    chosen.push_back(pick);
    taken[pick] = 1;
    for (std::size_t n = 0; n < data.n(); ++n) d2[n] = std::min(d2[n], (data.point(n) - data.point(pick)).squaredNorm());
  }
  return chosen;
}

inline Matrix seed_dsquared(const Dataset& data, std::size_t c, Rng& rng, std::optional<std::size_t> first = std::nullopt) {
  return gather_rows(data, dsquared_indices(data, c, rng, first));
}

// ---------------------------------------------------------------------------
// M-steps

/// mu_c = sum_n q_c^(n) y^(n) / sum_n q_c^(n). Zero-mass clusters keep their
/// row of previous.
inline Matrix update_means(const Dataset& data, const Responsibilities& resp, const Matrix& previous) {
  const auto clusters = static_cast<Eigen::Index>(resp.clusters());
  Matrix sums = Matrix::Zero(clusters, static_cast<Eigen::Index>(data.d()));
  Vector mass = Vector::Zero(clusters);
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto idx = resp.indices(n);
    const auto w = resp.weights(n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (w[k] == 0.0) continue;
      const auto c = static_cast<Eigen::Index>(idx[k]);
      sums.row(c) += w[k] * data.point(n);
      mass(c) += w[k];
    }
  }
  Matrix means = previous;
  for (Eigen::Index c = 0; c < clusters; ++c) {
    if (mass(c) > 0.0) means.row(c) = sums.row(c) / mass(c);
  }
  return means;
}

/// sigma2 = (1 / (D N)) sum_n sum_c q_c^(n) |y^(n) - mu_c|^2 with the means
/// given (the new ones, in an M-step), clamped at the dataset's variance floor.
inline double update_variance(const Dataset& data, const Responsibilities& resp, const Matrix& means) {
  const double raw = objective_j(data, resp, means) / static_cast<double>(data.d() * data.n());
  return std::max(raw, data.variance_floor());
}

inline IsotropicGMM m_step_iso(const Dataset& data, const Responsibilities& resp, const Matrix& previous_means) {
  IsotropicGMM model;
  model.means = update_means(data, resp, previous_means);
  model.sigma2 = update_variance(data, resp, model.means);
  return model;
}

/// Weighted mean, weighted scatter (regularized) and mean responsibility per
/// cluster. Zero-mass clusters get weight 0 and keep their parameters from
/// previous, or the global mean and covariance when previous is null.
inline GeneralGMM m_step_general(const Dataset& data, const Responsibilities& resp, const GeneralGMM* previous = nullptr) {
  const auto clusters = static_cast<Eigen::Index>(resp.clusters());
  const auto dim = static_cast<Eigen::Index>(data.d());
  const Vector mass = resp.mass();

  GeneralGMM model;
  model.weights = mass / mass.sum();
  model.means = Matrix::Zero(clusters, dim);
  model.covariances.assign(static_cast<std::size_t>(clusters), Eigen::MatrixXd::Zero(dim, dim));

  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto idx = resp.indices(n);
    const auto w = resp.weights(n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (w[k] != 0.0) model.means.row(static_cast<Eigen::Index>(idx[k])) += w[k] * data.point(n);
    }
  }
  for (Eigen::Index c = 0; c < clusters; ++c) {
    if (mass(c) > 0.0) model.means.row(c) /= mass(c);
  }
  for (std::size_t n = 0; n < data.n(); ++n) {
    const auto idx = resp.indices(n);
    const auto w = resp.weights(n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (w[k] == 0.0) continue;
      const Eigen::VectorXd diff = (data.point(n) - model.means.row(static_cast<Eigen::Index>(idx[k]))).transpose();
      model.covariances[idx[k]].noalias() += w[k] * (diff * diff.transpose());
    }
  }

  std::optional<std::pair<Eigen::RowVectorXd, Eigen::MatrixXd>> global;
  for (Eigen::Index c = 0; c < clusters; ++c) {
    auto& cov = model.covariances[static_cast<std::size_t>(c)];
    if (mass(c) > 0.0) {
      cov = regularize_covariance(cov / mass(c), data.variance_floor());
      continue;
    }
    if (previous) {
      model.means.row(c) = previous->means.row(c);
      cov = previous->covariances[static_cast<std::size_t>(c)];
      continue;
    }
    if (!global) {
      const Eigen::RowVectorXd mu = data.points().colwise().mean();
      const Matrix centered = data.points().rowwise() - mu;
      global.emplace(mu, (centered.transpose() * centered) / static_cast<double>(data.n()));
    }
    model.means.row(c) = global->first;
    cov = regularize_covariance(global->second, data.variance_floor());
  }
  return model;
}

// ---------------------------------------------------------------------------
// Empty clusters

namespace detail {

// Recomputes row n of resp from the current set of n. Width-1 rows become
// hard assignments; wider rows use the isotropic posterior with sigma2.
inline void refresh_row(const Dataset& data, const Matrix& means, double sigma2, const TruncationState& state,
                        Responsibilities& resp, std::size_t n) {
  const auto set = state.set(n);
  auto idx = resp.indices(n);
  auto w = resp.weights(n);
  for (std::size_t k = 0; k < set.size(); ++k) {
    idx[k] = set[k];
    w[k] = -(data.point(n) - means.row(static_cast<Eigen::Index>(set[k]))).squaredNorm() / (2.0 * sigma2);
  }
  if (set.size() == 1) {
    w[0] = 1.0;
  } else {
    softmax_row(w);
  }
}

}  // namespace detail

/// Moves every zero-mass cluster onto the data point farthest from its
/// currently assigned center, puts that cluster into the point's set (in place
/// of the set's last member) and recomputes the point's row. Returns one event
/// per reseed.
inline std::vector<std::string> reseed_empty_clusters(const Dataset& data, Matrix& means, double sigma2,
                                                      TruncationState& state, Responsibilities& resp) {
  std::vector<std::string> events;
  const Vector mass = resp.mass();
  std::vector<char> used(data.n(), 0);
  for (std::size_t c = 0; c < resp.clusters(); ++c) {
    if (mass(static_cast<Eigen::Index>(c)) > 0.0) continue;
    std::size_t far = data.n();
    double far_d2 = -1.0;
    for (std::size_t n = 0; n < data.n(); ++n) {
      if (used[n]) continue;
      const double d2 = (data.point(n) - means.row(static_cast<Eigen::Index>(resp.argmax(n)))).squaredNorm();
      if (d2 > far_d2) {
        far_d2 = d2;
        far = n;
      }
    }
    if (far == data.n()) break;
    used[far] = 1;
    means.row(static_cast<Eigen::Index>(c)) = data.point(far);
    if (!state.contains(far, c)) {
      auto set = state.set(far);
      std::copy_backward(set.begin(), set.end() - 1, set.end());
      set[0] = c;
    }
    detail::refresh_row(data, means, sigma2, state, resp, far);
    events.push_back("reseed cluster " + std::to_string(c) + " at point " + std::to_string(far));
  }
  return events;
}

// ---------------------------------------------------------------------------
// Iteration kernels

struct KMeansStepResult {
  TruncationState state;
  Responsibilities assignments;
  Matrix means;
  std::vector<std::string> events;
};

struct IsoStepResult {
  TruncationState state;
  Responsibilities resp;
  IsotropicGMM model;
  std::vector<std::string> events;
};

struct GeneralStepResult {
  TruncationState state;
  Responsibilities resp;
  GeneralGMM model;
  std::vector<std::string> events;
};

/// One Lloyd iteration: nearest-center assignment, then centroid update.
/// No variance is involved.
inline KMeansStepResult kmeans_step(const Dataset& data, const Matrix& means) {
  KMeansStepResult out;
  out.state = select_nearest(data, means, 1);
  std::vector<std::size_t> assignment(data.n());
  for (std::size_t n = 0; n < data.n(); ++n) assignment[n] = out.state.set(n)[0];
  out.assignments = Responsibilities::binary(assignment, static_cast<std::size_t>(means.rows()));
  Matrix work = means;
  out.events = reseed_empty_clusters(data, work, 1.0, out.state, out.assignments);
  out.means = update_means(data, out.assignments, work);
  return out;
}

/// One k-means-C' iteration: nearest-C' sets, truncated posteriors, M-step.
inline IsoStepResult tvem_step(const Dataset& data, const IsotropicGMM& model, std::size_t c_prime) {
  IsoStepResult out;
  out.state = select_nearest(data, model.means, c_prime);
  out.resp = truncated_responsibilities(data, model, out.state);
  Matrix work = model.means;
  out.events = reseed_empty_clusters(data, work, model.sigma2, out.state, out.resp);
  out.model = m_step_iso(data, out.resp, work);
  return out;
}

/// One lazy k-means iteration from the carried state, with the variance update.
inline IsoStepResult lazy_step(const Dataset& data, const IsotropicGMM& model, double epsilon, const TruncationState& state) {
  IsoStepResult out;
  out.state = lazy_reassign(data, model.means, epsilon, state);
  std::vector<std::size_t> assignment(data.n());
  for (std::size_t n = 0; n < data.n(); ++n) assignment[n] = out.state.set(n)[0];
  out.resp = Responsibilities::binary(assignment, model.components());
  Matrix work = model.means;
  out.events = reseed_empty_clusters(data, work, model.sigma2, out.state, out.resp);
  out.model = m_step_iso(data, out.resp, work);
  return out;
}

/// One exact EM iteration on the isotropic equal-weight model.
inline IsoStepResult em_step(const Dataset& data, const IsotropicGMM& model) {
  IsoStepResult out;
  out.state = TruncationState::full(data.n(), model.components());
  out.resp = responsibilities_exact(data, model);
  Matrix work = model.means;
  out.events = reseed_empty_clusters(data, work, model.sigma2, out.state, out.resp);
  out.model = m_step_iso(data, out.resp, work);
  return out;
}

/// One k-means-Sigma-pi iteration: hard assignment to the lowest
/// sigma_pi_score, then the general M-step with those assignments.
inline GeneralStepResult sigma_pi_step(const Dataset& data, const GeneralGMM& model) {
  GeneralStepResult out;
  out.state = select_highest_joint(log_joint_table(data, model), 1);
  std::vector<std::size_t> assignment(data.n());
  for (std::size_t n = 0; n < data.n(); ++n) assignment[n] = out.state.set(n)[0];
  out.resp = Responsibilities::binary(assignment, model.components());
  Matrix work = model.means;
  out.events = reseed_empty_clusters(data, work, 1.0, out.state, out.resp);
  GeneralGMM previous = model;
  previous.means = work;
  out.model = m_step_general(data, out.resp, &previous);
  return out;
}

/// One exact EM iteration on the general model.
inline GeneralStepResult em_step_general(const Dataset& data, const GeneralGMM& model) {
  GeneralStepResult out;
  out.state = TruncationState::full(data.n(), model.components());
  out.resp = responsibilities_exact(data, model);
  out.model = m_step_general(data, out.resp, &model);
  return out;
}

// ---------------------------------------------------------------------------
// Convergence loop

namespace detail {

inline double data_scale(const Dataset& data) {
  const Eigen::RowVectorXd mu = data.points().colwise().mean();
  const double rms = std::sqrt((data.points().rowwise() - mu).rowwise().squaredNorm().mean());
  return rms > 0.0 ? rms : 1.0;
}

inline double max_mean_shift(const Matrix& a, const Matrix& b) {
  return std::sqrt((a - b).rowwise().squaredNorm().maxCoeff());
}

inline double relative_change(const IsotropicGMM& before, const IsotropicGMM& after, double scale) {
  return std::max(max_mean_shift(before.means, after.means) / scale, std::abs(after.sigma2 - before.sigma2) / before.sigma2);
}

inline double relative_change(const GeneralGMM& before, const GeneralGMM& after, double scale) {
  double change = max_mean_shift(before.means, after.means) / scale;
  change = std::max(change, (after.weights - before.weights).cwiseAbs().maxCoeff());
  for (std::size_t c = 0; c < before.covariances.size(); ++c) {
    const double norm = before.covariances[c].norm();
    if (norm > 0.0) change = std::max(change, (after.covariances[c] - before.covariances[c]).norm() / norm);
  }
  return change;
}

inline double reported_variance(const IsotropicGMM& m) { return m.sigma2; }

inline double reported_variance(const GeneralGMM& m) {
  double v = 0.0;
  for (std::size_t c = 0; c < m.covariances.size(); ++c) v += m.weights(static_cast<Eigen::Index>(c)) * m.covariances[c].trace();
  return v / static_cast<double>(m.dim());
}

template <MixtureModel M>
TraceRecord make_record(std::size_t iter, const Dataset& data, const M& model, const TruncationState& state,
                        const Responsibilities& resp, std::size_t n_changed, std::vector<std::string> events) {
  TraceRecord rec;
  rec.iter = iter;
  rec.J = objective_j(data, resp, model.means);
  rec.F = free_energy_trunc(data, model, state);
  rec.L = log_likelihood(data, model);
  if (!std::isfinite(rec.F) || !std::isfinite(rec.L) || !std::isfinite(rec.J)) {
    throw NumericError("non-finite diagnostics at iteration " + std::to_string(iter));
  }
  rec.gap = rec.L - rec.F;
  rec.sigma2 = reported_variance(model);
  rec.n_changed = n_changed;
  rec.events = std::move(events);
  return rec;
}

}  // namespace detail

/// Iterates the configured kernel from the given initial means.
///
/// The initial variance is the hard-assignment variance of the initial means.
/// Record 0 holds diagnostics of the initial model; record t the diagnostics
/// after iteration t, evaluated with that iteration's sets and updated
/// parameters. The loop stops once no set changed and the relative parameter
/// change is below tol, or after max_iters iterations.
inline FitResult run(const Dataset& data, const RunConfig& config, const Matrix& initial_means,
                     const IterationObserver& observer = {}) {
  config.validate(data.n());
  if (initial_means.rows() != static_cast<Eigen::Index>(config.c) || initial_means.cols() != static_cast<Eigen::Index>(data.d())) {
    throw ConfigError("initial means must be c x D");
  }
  const double scale = detail::data_scale(data);

  const TruncationState nearest = select_nearest(data, initial_means, 1);
  std::vector<std::size_t> assignment(data.n());
  for (std::size_t n = 0; n < data.n(); ++n) assignment[n] = nearest.set(n)[0];
  IsotropicGMM iso{initial_means, update_variance(data, Responsibilities::binary(assignment, config.c), initial_means)};

  FitResult result;

  const auto notify = [&](const auto& model, const TruncationState& state, const Responsibilities& resp) {
    if (observer) observer(result.trace.back(), Model{model}, state, resp);
  };

  const auto loop = [&](auto model, TruncationState state, Responsibilities resp, auto&& step) {
    result.trace.push_back(detail::make_record(0, data, model, state, resp, 0, {}));
    notify(model, state, resp);
    result.termination = Termination::max_iters;
    for (std::size_t t = 1; t <= config.max_iters; ++t) {
      try {
        auto next = step(model, state);
        const std::size_t changed = next.state.count_changed(state);
        const double change = detail::relative_change(model, next.model, scale);
        result.trace.push_back(detail::make_record(t, data, next.model, next.state, next.resp, changed, std::move(next.events)));
        model = std::move(next.model);
        state = std::move(next.state);
        resp = std::move(next.resp);
        notify(model, state, resp);
        if (changed == 0 && change < config.tol) {
          result.termination = Termination::converged;
          break;
        }
      } catch (const NumericError& e) {
        result.termination = Termination::numeric_failure;
        result.failure = e.what();
        result.trace.back().events.push_back("numeric failure at iteration " + std::to_string(t) + ": " + e.what());
        break;
      }
    }
    result.model = std::move(model);
    result.state = std::move(state);
    result.responsibilities = std::move(resp);
  };

  switch (config.algorithm) {
    case Algorithm::kmeans: {
      auto resp = Responsibilities::binary(assignment, config.c);
      loop(iso, nearest, std::move(resp), [&](const IsotropicGMM& m, const TruncationState&) {
        auto k = kmeans_step(data, m.means);
        IsoStepResult out;
        out.model.sigma2 = update_variance(data, k.assignments, k.means);
        out.model.means = std::move(k.means);
        out.state = std::move(k.state);
        out.resp = std::move(k.assignments);
        out.events = std::move(k.events);
        return out;
      });
      break;
    }
    case Algorithm::kmeans_cprime: {
      auto state = select_nearest(data, iso.means, *config.c_prime);
      auto resp = truncated_responsibilities(data, iso, state);
      loop(iso, std::move(state), std::move(resp),
           [&](const IsotropicGMM& m, const TruncationState&) { return tvem_step(data, m, *config.c_prime); });
      break;
    }
    case Algorithm::lazy_kmeans: {
      auto resp = Responsibilities::binary(assignment, config.c);
      loop(iso, nearest, std::move(resp),
           [&](const IsotropicGMM& m, const TruncationState& s) { return lazy_step(data, m, *config.epsilon, s); });
      break;
    }
    case Algorithm::em_gmm: {
      auto resp = responsibilities_exact(data, iso);
      loop(iso, TruncationState::full(data.n(), config.c), std::move(resp),
           [&](const IsotropicGMM& m, const TruncationState&) { return em_step(data, m); });
      break;
    }
    case Algorithm::sigma_pi: {
      GeneralGMM general = GeneralGMM::from_isotropic(iso);
      auto state = select_highest_joint(log_joint_table(data, general), 1);
      std::vector<std::size_t> first(data.n());
      for (std::size_t n = 0; n < data.n(); ++n) first[n] = state.set(n)[0];
      auto resp = Responsibilities::binary(first, config.c);
      loop(std::move(general), std::move(state), std::move(resp),
           [&](const GeneralGMM& m, const TruncationState&) { return sigma_pi_step(data, m); });
      break;
    }
  }
  return result;
}

/// Seeds with config.seeding and config.seed, then runs.
inline FitResult run(const Dataset& data, const RunConfig& config, const IterationObserver& observer = {}) {
  config.validate(data.n());
  Rng rng(config.seed);
  const Matrix means = config.seeding == Seeding::uniform ? seed_uniform(data, config.c, rng)
                                                          : seed_dsquared(data, config.c, rng);
  return run(data, config, means, observer);
}

}  // namespace tvem
