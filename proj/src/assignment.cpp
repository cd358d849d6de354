#include "shapebots/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "shapebots/error.hpp"

namespace shapebots {

CostMatrix::CostMatrix(std::size_t n_robots, std::size_t n_targets, std::vector<double> row_major)
    : n_robots_(n_robots), n_targets_(n_targets), cost_(std::move(row_major)) {
  if (n_robots == 0 || n_targets == 0) throw InvalidArgument("cost matrix needs robots and targets");
  if (cost_.size() != n_robots * n_targets) throw InvalidArgument("cost matrix size mismatch");
  for (double c : cost_) {
    if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("cost matrix entries must be finite and >= 0");
  }
}

CostMatrix build_cost_matrix(std::span<const Pose> robots, std::span<const Pose> targets) {
  if (robots.empty()) throw InvalidArgument("build_cost_matrix: no robots");
  if (targets.empty()) throw InvalidArgument("build_cost_matrix: no targets");
  std::vector<double> cost;
  cost.reserve(robots.size() * targets.size());
  for (const Pose& r : robots) {
    for (const Pose& t : targets) cost.push_back(distance(r.position(), t.position()));
  }
  return CostMatrix(robots.size(), targets.size(), std::move(cost));
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Square Hungarian algorithm with potentials; rows are targets, columns are
/// robots. Returns row potentials, column potentials and row -> column.
struct HungarianResult {
  std::vector<double> u, v;
  std::vector<std::size_t> col_for_row;
};

HungarianResult hungarian(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; row/column 0 is the virtual root.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult r;
  r.u.assign(u.begin() + 1, u.end());
  r.v.assign(v.begin() + 1, v.end());
  r.col_for_row.assign(n, kNone);
  for (std::size_t j = 1; j <= n; ++j) r.col_for_row[p[j] - 1] = j - 1;
  return r;
}

}  // namespace

Assignment solve_assignment(const CostMatrix& m) {
  const std::size_t nr = m.n_robots(), nt = m.n_targets();
  if (nt > nr) {
    throw Infeasible(std::to_string(nt) + " targets but only " + std::to_string(nr) + " robots (short by " +
                     std::to_string(nt - nr) + ")");
  }

  // Pad with dummy targets whose cost exceeds the sum of all real entries, so
  // they never compete with a real target.
  double sum = 0.0;
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t t = 0; t < nt; ++t) sum += m(r, t);
  }
  const double sentinel = sum + 1.0;
  std::vector<std::vector<double>> a(nr, std::vector<double>(nr, sentinel));
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t r = 0; r < nr; ++r) a[t][r] = m(r, t);
  }
  const HungarianResult h = hungarian(a);

  const double eps = 1e-9 * (1.0 + sentinel);
  auto tight = [&](std::size_t robot, std::size_t target) {
    return std::fabs(a[target][robot] - h.u[target] - h.v[robot]) <= eps;
  };

  // Work on the padded square problem: rows nt.. are dummies, and a robot on
  // a dummy row is one that stays unassigned.
  std::vector<std::size_t> robot_for_row(h.col_for_row);
  std::vector<std::size_t> row_for_robot(nr);
  for (std::size_t t = 0; t < nr; ++t) row_for_robot[robot_for_row[t]] = t;

  // Lexicographic tie-break: optimal assignments are exactly the perfect
  // matchings on tight edges, so walk real targets in order and take the
  // smallest robot for which the rest can still be matched. Moving target j
  // to robot r needs an alternating path from r's old row back to j's robot.
  std::vector<char> fixed_robot(nr, 0);
  for (std::size_t j = 0; j < nt; ++j) {
    const std::size_t current = robot_for_row[j];
    for (std::size_t r = 0; r < current; ++r) {
      if (fixed_robot[r] || !tight(r, j)) continue;
      const std::size_t displaced = row_for_robot[r];
      std::vector<std::size_t> parent_row(nr, kNone);  // robot -> row that reached it
      std::vector<char> seen(nr, 0);
      std::deque<std::size_t> queue{displaced};
      bool found = false;
      while (!queue.empty() && !found) {
        const std::size_t t = queue.front();
        queue.pop_front();
        for (std::size_t q = 0; q < nr; ++q) {
          if (seen[q] || fixed_robot[q] || q == r || !tight(q, t)) continue;
          seen[q] = 1;
          parent_row[q] = t;
          if (q == current) {
            found = true;
            break;
          }
          queue.push_back(row_for_robot[q]);
        }
      }
      if (!found) continue;
      // Flip the path: each row on it takes the robot that reached it.
      for (std::size_t q = current; q != kNone;) {
        const std::size_t t = parent_row[q];
        const std::size_t previous = robot_for_row[t];
        robot_for_row[t] = q;
        row_for_robot[q] = t;
        q = (t == displaced) ? kNone : previous;
      }
      robot_for_row[j] = r;
      row_for_robot[r] = j;
      break;
    }
    fixed_robot[robot_for_row[j]] = 1;
  }

  Assignment out;
  out.robot_for_target.assign(robot_for_row.begin(), robot_for_row.begin() + static_cast<long>(nt));
  for (std::size_t t = 0; t < nt; ++t) out.total_cost += m(out.robot_for_target[t], t);
  for (std::size_t r = 0; r < nr; ++r) {
    if (row_for_robot[r] >= nt) out.unassigned_robots.push_back(r);
  }
  return out;
}

}  // namespace shapebots
