#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tvem/error.hpp"

namespace tvem {

/// Per-point cluster index sets K^(n), all of the same size C'.
///
/// Sets produced by the selection routines are ordered by preference (the
/// best-scoring cluster first). Membership, not order, is what the free
/// energy depends on.
class TruncationState {
 public:
  TruncationState() = default;
  TruncationState(std::size_t points, std::size_t c_prime, std::size_t clusters)
      : points_(points), c_prime_(c_prime), clusters_(clusters), sets_(points * c_prime, 0) {
    if (c_prime < 1 || c_prime > clusters) throw ConfigError("need 1 <= C' <= C");
  }

  /// C' = 1 state from a hard assignment.
  static TruncationState from_assignment(const std::vector<std::size_t>& assignment, std::size_t clusters) {
    TruncationState state(assignment.size(), 1, clusters);
    for (std::size_t n = 0; n < assignment.size(); ++n) {
      if (assignment[n] >= clusters) throw ConfigError("assignment index out of range");
      state.sets_[n] = assignment[n];
    }
    return state;
  }

  /// C' = C state holding every cluster in index order.
  static TruncationState full(std::size_t points, std::size_t clusters) {
    TruncationState state(points, clusters, clusters);
    for (std::size_t n = 0; n < points; ++n) {
      for (std::size_t c = 0; c < clusters; ++c) state.sets_[n * clusters + c] = c;
    }
    return state;
  }

  std::size_t size() const { return points_; }
  std::size_t c_prime() const { return c_prime_; }
  std::size_t clusters() const { return clusters_; }

  std::span<const std::size_t> set(std::size_t n) const { return {sets_.data() + n * c_prime_, c_prime_}; }
  std::span<std::size_t> set(std::size_t n) { return {sets_.data() + n * c_prime_, c_prime_}; }

  bool contains(std::size_t n, std::size_t c) const {
    const auto s = set(n);
    return std::find(s.begin(), s.end(), c) != s.end();
  }

  bool same_members(std::size_t n, const TruncationState& other) const {
    if (other.c_prime_ != c_prime_) return false;
    for (std::size_t c : set(n)) {
      if (!other.contains(n, c)) return false;
    }
    return true;
  }

  /// Number of points whose set membership differs from other.
  std::size_t count_changed(const TruncationState& other) const {
    if (other.points_ != points_) return points_;
    std::size_t changed = 0;
    for (std::size_t n = 0; n < points_; ++n) changed += same_members(n, other) ? 0 : 1;
    return changed;
  }

  /// Throws ConfigError unless every set has C' distinct in-range indices.
  void validate() const {
    std::vector<char> seen(clusters_, 0);
    for (std::size_t n = 0; n < points_; ++n) {
      for (std::size_t c : set(n)) {
        if (c >= clusters_) throw ConfigError("truncation index out of range");
        if (seen[c]) throw ConfigError("duplicate index in truncation set");
        seen[c] = 1;
      }
      for (std::size_t c : set(n)) seen[c] = 0;
    }
  }

  friend bool operator==(const TruncationState&, const TruncationState&) = default;

 private:
  std::size_t points_ = 0;
  std::size_t c_prime_ = 0;
  std::size_t clusters_ = 0;
  std::vector<std::size_t> sets_;
};

/// Per-point distribution over clusters stored as fixed-width rows of
/// (cluster, weight) pairs. Width is 1 for hard assignments, C' for truncated
/// posteriors and C for exact ones.
class Responsibilities {
 public:
  enum class Kind { binary, sparse, dense };

  Responsibilities() = default;
  Responsibilities(Kind kind, std::size_t points, std::size_t clusters, std::size_t width)
      : kind_(kind), points_(points), clusters_(clusters), width_(width),
        index_(points * width, 0), weight_(points * width, 0.0) {}

  static Responsibilities binary(const std::vector<std::size_t>& assignment, std::size_t clusters) {
    Responsibilities r(Kind::binary, assignment.size(), clusters, 1);
    for (std::size_t n = 0; n < assignment.size(); ++n) {
      r.index_[n] = assignment[n];
      r.weight_[n] = 1.0;
    }
    return r;
  }

  /// Dense rows from an N x C weight table.
  template <class Derived>
  static Responsibilities dense(const Eigen::MatrixBase<Derived>& table) {
    const auto n = static_cast<std::size_t>(table.rows());
    const auto c = static_cast<std::size_t>(table.cols());
    Responsibilities r(Kind::dense, n, c, c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < c; ++k) {
        r.index_[i * c + k] = k;
        r.weight_[i * c + k] = table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
    }
    return r;
  }

  Kind kind() const { return kind_; }
  std::size_t size() const { return points_; }
  std::size_t clusters() const { return clusters_; }
  std::size_t width() const { return width_; }

  std::span<const std::size_t> indices(std::size_t n) const { return {index_.data() + n * width_, width_}; }
  std::span<std::size_t> indices(std::size_t n) { return {index_.data() + n * width_, width_}; }
  std::span<const double> weights(std::size_t n) const { return {weight_.data() + n * width_, width_}; }
  std::span<double> weights(std::size_t n) { return {weight_.data() + n * width_, width_}; }

  double weight(std::size_t n, std::size_t c) const {
    const auto idx = indices(n);
    const auto w = weights(n);
    double total = 0.0;
    for (std::size_t k = 0; k < width_; ++k) {
      if (idx[k] == c) total += w[k];
    }
    return total;
  }

  /// Sum of weights per cluster over all points.
  Eigen::VectorXd mass() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(clusters_));
    for (std::size_t i = 0; i < index_.size(); ++i) m(static_cast<Eigen::Index>(index_[i])) += weight_[i];
    return m;
  }

  /// Highest-weight cluster of row n; ties go to the smallest index.
  std::size_t argmax(std::size_t n) const {
    const auto idx = indices(n);
    const auto w = weights(n);
    std::size_t best = idx[0];
    double best_w = w[0];
    for (std::size_t k = 1; k < width_; ++k) {
      if (w[k] > best_w || (w[k] == best_w && idx[k] < best)) {
        best = idx[k];
        best_w = w[k];
      }
    }
    return best;
  }

  std::vector<std::size_t> hard_assignment() const {
    std::vector<std::size_t> out(points_);
    for (std::size_t n = 0; n < points_; ++n) out[n] = argmax(n);
    return out;
  }

  /// N x C table.
  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points_), static_cast<Eigen::Index>(clusters_));
    for (std::size_t n = 0; n < points_; ++n) {
      const auto idx = indices(n);
      const auto w = weights(n);
      for (std::size_t k = 0; k < width_; ++k) {
        t(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(idx[k])) += w[k];
      }
    }
    return t;
  }

 private:
  Kind kind_ = Kind::dense;
  std::size_t points_ = 0;
  std::size_t clusters_ = 0;
  std::size_t width_ = 0;
  std::vector<std::size_t> index_;
  std::vector<double> weight_;
};

}  // namespace tvem
