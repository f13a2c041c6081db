#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "support.hpp"

using namespace tvem;

namespace {

std::vector<std::size_t> members(const TruncationState& s, std::size_t n) { return {s.set(n).begin(), s.set(n).end()}; }

GeneralGMM two_cluster_general() {
  GeneralGMM g;
  g.weights = Vector::Constant(2, 0.5);
  g.means = support::column({0.0, 0.5});
  g.covariances = {Eigen::MatrixXd::Constant(1, 1, 4.0), Eigen::MatrixXd::Constant(1, 1, 0.25)};
  return g;
}

}  // namespace

TEST(SelectNearest, UniqueNearest) {
  const Dataset d = support::line({2});
  const Matrix means = support::column({0, 3, 10});
  EXPECT_EQ(members(select_nearest(d, means, 1), 0), (std::vector<std::size_t>{1}));
}

TEST(SelectNearest, AllClustersOrderedByDistance) {
  const Dataset d = support::line({2});
  const auto s = select_nearest(d, support::column({0, 3, 10}), 3);
  EXPECT_EQ(members(s, 0), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(SelectNearest, TieGoesToSmallestIndex) {
  const Dataset d = support::line({1.5});
  EXPECT_EQ(members(select_nearest(d, support::column({1, 2}), 1), 0), (std::vector<std::size_t>{0}));
  EXPECT_EQ(members(select_nearest(d, support::column({2, 1, 5}), 2), 0), (std::vector<std::size_t>{0, 1}));
}

TEST(SelectNearest, RejectsBadCPrime) {
  const Dataset d = support::line({0});
  EXPECT_THROW(select_nearest(d, support::column({0, 1}), 0), ConfigError);
  EXPECT_THROW(select_nearest(d, support::column({0, 1}), 3), ConfigError);
}

TEST(TruncationState, Invariants) {
  TruncationState s(2, 2, 3);
  s.set(0)[0] = 0;
  s.set(0)[1] = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.set(0)[1] = 2;
  s.set(1)[0] = 1;
  s.set(1)[1] = 2;
  EXPECT_NO_THROW(s.validate());
  TruncationState t = s;
  std::swap(t.set(1)[0], t.set(1)[1]);
  EXPECT_EQ(t.count_changed(s), 0u);
  t.set(1)[0] = 0;
  EXPECT_EQ(t.count_changed(s), 1u);
}

TEST(LazyReassign, EpsilonZeroEqualsNearest) {
  const Dataset d = support::random_instance(3, 100, 2, 4);
  const Matrix means = support::rows({{0, 0}, {1, 1}, {-1, 2}, {2, -2}});
  std::vector<std::size_t> start(d.n());
  for (std::size_t n = 0; n < d.n(); ++n) start[n] = n % 4;
  const auto lazy = lazy_reassign(d, means, 0.0, TruncationState::from_assignment(start, 4));
  EXPECT_EQ(lazy, select_nearest(d, means, 1));
}

TEST(LazyReassign, InequalityBoundary) {
  const Dataset d = support::line({0});
  const auto state = TruncationState::from_assignment({0}, 2);
  // Currently at distance 1.4, best at 1.0: 1.5 > 1.4 keeps the point.
  EXPECT_EQ(lazy_reassign(d, support::column({1.4, 1.0}), 0.5, state).set(0)[0], 0u);
  // At distance 1.6: 1.5 < 1.6 moves it.
  EXPECT_EQ(lazy_reassign(d, support::column({1.6, 1.0}), 0.5, state).set(0)[0], 1u);
}

TEST(LazyReassign, RejectsWideStates) {
  const Dataset d = support::line({0, 1});
  EXPECT_THROW(lazy_reassign(d, support::column({0, 1}), 0.1, TruncationState::full(2, 2)), ConfigError);
  EXPECT_THROW(lazy_reassign(d, support::column({0, 1}), -0.1, TruncationState::from_assignment({0, 1}, 2)), ConfigError);
}

TEST(SigmaPiScore, ClosedFormValues) {
  const auto g = two_cluster_general();
  const Matrix point = support::column({0.0});
  const auto y = point.row(0);
  EXPECT_NEAR(sigma_pi_score(y, 0, g), 4.6104657886491270, 1e-13);
  EXPECT_NEAR(sigma_pi_score(y, 1, g), 2.8378770664093453, 1e-13);
  const Dataset d = support::line({0});
  EXPECT_EQ(select_highest_joint(log_joint_table(d, g), 1).set(0)[0], 1u);
}

TEST(SigmaPiScore, IsotropicArgminIsNearestCenter) {
  const Dataset d = support::random_instance(8, 150, 3, 5);
  IsotropicGMM iso{support::rows({{0, 0, 0}, {1, 0, 2}, {-2, 1, 0}, {0, -1, -1}, {2, 2, 2}}), 0.6};
  const auto g = GeneralGMM::from_isotropic(iso);
  EXPECT_EQ(select_highest_joint(log_joint_table(d, g), 1), select_nearest(d, iso.means, 1));
}

TEST(SigmaPiScore, CommonWeightScaleShiftsAllScoresEqually) {
  auto g = two_cluster_general();
  g.weights << 0.3, 0.7;
  auto doubled = g;
  doubled.weights *= 2.0;  // unnormalized on purpose: only the score is evaluated
  const Matrix point = support::column({0.2});
  const auto y = point.row(0);
  const double shift0 = sigma_pi_score(y, 0, g) - sigma_pi_score(y, 0, doubled);
  const double shift1 = sigma_pi_score(y, 1, g) - sigma_pi_score(y, 1, doubled);
  EXPECT_NEAR(shift0, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(shift1, shift0, 1e-12);
}

TEST(TruncatedResponsibilities, SingleMemberIsBinary) {
  const Dataset d = support::line({0, 3, 7});
  for (double s2 : {1e-6, 1.0, 1e6}) {
    IsotropicGMM m{support::column({0, 5}), s2};
    const auto q = truncated_responsibilities(d, m, select_nearest(d, m.means, 1));
    EXPECT_EQ(q.kind(), Responsibilities::Kind::binary);
    for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(q.weights(n)[0], 1.0);
  }
}

TEST(TruncatedResponsibilities, TwoTermSoftmax) {
  const Dataset d = support::line({0});
  IsotropicGMM m{support::column({0, 1}), 0.5};
  const auto q = truncated_responsibilities(d, m, TruncationState::full(1, 2));
  EXPECT_NEAR(q.weight(0, 0), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(q.weight(0, 1), 0.2689414213699951, 1e-15);
}

TEST(TruncatedResponsibilities, FullSetEqualsExact) {
  const Dataset d = support::random_instance(12, 90, 2, 4);
  IsotropicGMM m{support::rows({{0, 0}, {1, 1}, {-1, 2}, {2, -2}}), 0.8};
  const auto q = truncated_responsibilities(d, m, select_nearest(d, m.means, 4)).to_dense();
  const auto r = responsibilities_exact(d, m).to_dense();
  EXPECT_LE((q - r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TruncatedResponsibilities, SupportIsTheSet) {
  const Dataset d = support::random_instance(13, 40, 2, 3);
  IsotropicGMM m{support::rows({{0, 0}, {1, 1}, {-1, 2}, {2, -2}}), 0.8};
  const auto s = select_nearest(d, m.means, 2);
  const auto q = truncated_responsibilities(d, m, s);
  for (std::size_t n = 0; n < d.n(); ++n) {
    double sum = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      if (!s.contains(n, c)) EXPECT_EQ(q.weight(n, c), 0.0);
      sum += q.weight(n, c);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

// A single-point swap c_old -> c_new raises F exactly when c_new is closer.
TEST(Swaps, FreeEnergyFollowsDistance) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.uniform_index(9);
    const std::size_t c = 2 + rng.uniform_index(4);
    const Dataset d = support::random_instance(seed + 100, n, 2, 2, 1.5);
    Matrix means(static_cast<Eigen::Index>(c), 2);
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = 3.0 * rng.uniform() - 1.5;
    const IsotropicGMM model{means, 2.0};
    const auto base = select_nearest(d, means, 1);
    const double f0 = free_energy_trunc(d, model, base);
    const Matrix dist = squared_distances(d, means);
    // Start from a non-optimal state so swaps in both directions occur.
    TruncationState state = base;
    for (std::size_t i = 0; i < n; ++i) state.set(i)[0] = (base.set(i)[0] + 1) % c;
    const double f_state = free_energy_trunc(d, model, state);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t old = state.set(i)[0];
      for (std::size_t cand = 0; cand < c; ++cand) {
        if (cand == old) continue;
        TruncationState swapped = state;
        swapped.set(i)[0] = cand;
        const double f_new = free_energy_trunc(d, model, swapped);
        const double d_new = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cand));
        const double d_old = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(old));
        if (d_new < d_old) {
          EXPECT_GT(f_new, f_state) << "seed " << seed;
        } else {
          EXPECT_LE(f_new, f_state) << "seed " << seed;
        }
      }
    }
    EXPECT_GE(f0, f_state);
  }
}

TEST(Swaps, WideSetsFollowDistance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 7);
    const std::size_t n = 2 + rng.uniform_index(9);
    const std::size_t c = 3 + rng.uniform_index(3);
    const Dataset d = support::random_instance(seed + 300, n, 2, 2, 1.5);
    Matrix means(static_cast<Eigen::Index>(c), 2);
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = 3.0 * rng.uniform() - 1.5;
    const IsotropicGMM model{means, 2.0};
    const std::size_t cp = 2;
    TruncationState state(n, cp, c);
    for (std::size_t i = 0; i < n; ++i) {
      state.set(i)[0] = rng.uniform_index(c);
      state.set(i)[1] = (state.set(i)[0] + 1 + rng.uniform_index(c - 1)) % c;
    }
    const double f_state = free_energy_trunc(d, model, state);
    const Matrix dist = squared_distances(d, means);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < cp; ++k) {
        for (std::size_t cand = 0; cand < c; ++cand) {
          if (state.contains(i, cand)) continue;
          TruncationState swapped = state;
          const std::size_t old = swapped.set(i)[k];
          swapped.set(i)[k] = cand;
          const double f_new = free_energy_trunc(d, model, swapped);
          const auto row = static_cast<Eigen::Index>(i);
          if (dist(row, static_cast<Eigen::Index>(cand)) < dist(row, static_cast<Eigen::Index>(old))) {
            EXPECT_GT(f_new, f_state);
          } else {
            EXPECT_LE(f_new, f_state);
          }
        }
      }
    }
  }
}

TEST(NearestSets, MaximizeFreeEnergyOnSmallInstances) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Dataset d = support::random_instance(seed + 500, 4, 2, 2, 1.0);
    const Matrix means = support::rows({{0, 0}, {1, 0.5}, {-1, 1}});
    for (std::size_t cp = 1; cp <= 3; ++cp) {
      const double got = free_energy_trunc(d, IsotropicGMM{means, 0.7}, select_nearest(d, means, cp));
      const auto best = oracle::best_free_energy(support::to_vectors(d.points()), support::to_vectors(means), 0.7L, cp);
      EXPECT_NEAR(got, static_cast<double>(best), 1e-12);
    }
  }
}
