#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "shapebots/assignment.hpp"
#include "shapebots/error.hpp"
#include "shapebots/rng.hpp"

using namespace shapebots;

namespace {

// Exhaustive minimum over injective target -> robot maps, and the
// lexicographically smallest map achieving it.
std::pair<double, std::vector<std::size_t>> brute_force(const CostMatrix& m) {
  std::vector<std::size_t> robots(m.n_robots());
  std::iota(robots.begin(), robots.end(), 0);
  double best = INFINITY;
  std::vector<std::size_t> best_map;
  do {
    double sum = 0;
    std::vector<std::size_t> map(robots.begin(), robots.begin() + static_cast<long>(m.n_targets()));
    for (std::size_t t = 0; t < m.n_targets(); ++t) sum += m(map[t], t);
    if (sum < best || (sum == best && map < best_map)) {
      best = sum;
      best_map = map;
    }
  } while (std::next_permutation(robots.begin(), robots.end()));
  return {best, best_map};
}

}  // namespace

TEST_CASE("hand-checked 3x3") {
  const CostMatrix m(3, 3, {4, 1, 3, 2, 0, 5, 3, 2, 2});
  const Assignment a = solve_assignment(m);
  CHECK(a.total_cost == 5);
  CHECK(a.robot_for_target == std::vector<std::size_t>{1, 0, 2});
  CHECK(a.unassigned_robots.empty());
}

TEST_CASE("matches brute force on random matrices") {
  RngSequence rng(11, CounterRng::stream(RngPurpose::Test, 3));
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nr = 1 + rng.below(6);
    const std::size_t nt = 1 + rng.below(nr);
    std::vector<double> cost(nr * nt);
    for (double& c : cost) c = trial % 2 ? static_cast<double>(rng.below(4)) : rng.uniform(0, 100);
    const CostMatrix m(nr, nt, cost);
    const Assignment a = solve_assignment(m);
    const auto [best, best_map] = brute_force(m);
    CAPTURE(trial);
    double got = 0;
    for (std::size_t t = 0; t < nt; ++t) got += m(a.robot_for_target[t], t);
    CHECK(got == best);
    // Tie-break: lexicographically smallest optimal mapping.
    CHECK(a.robot_for_target == best_map);
    CHECK(a.unassigned_robots.size() == nr - nt);
    CHECK(std::is_sorted(a.unassigned_robots.begin(), a.unassigned_robots.end()));
  }
}

TEST_CASE("rectangular and degenerate inputs") {
  // 3 robots, 1 target: nearest wins.
  const CostMatrix m(3, 1, {5, 1, 3});
  const Assignment a = solve_assignment(m);
  CHECK(a.robot_for_target == std::vector<std::size_t>{1});
  CHECK(a.unassigned_robots == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(solve_assignment(CostMatrix(1, 2, {1, 2})), Infeasible);
  CHECK_THROWS_AS(CostMatrix(2, 2, {1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(CostMatrix(1, 1, {-1}), InvalidArgument);
  CHECK_THROWS_AS(CostMatrix(1, 1, {INFINITY}), InvalidArgument);
  CHECK_THROWS_AS(CostMatrix(2, 0, {}), InvalidArgument);
}

TEST_CASE("cost matrix is euclidean and ignores heading") {
  const std::vector<Pose> robots{{0, 0, 0}, {10, 0, 1}};
  const std::vector<Pose> targets{{3, 4, 2}};
  const CostMatrix m = build_cost_matrix(robots, targets);
  CHECK(m(0, 0) == doctest::Approx(5));
  CHECK(m(1, 0) == doctest::Approx(std::hypot(7, 4)));
}
