#include "shapebots/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shapebots/error.hpp"

namespace shapebots {

std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t k) {
  const std::size_t c = weights.size();
  if (c == 0) throw InvalidArgument("apportion: no contours");
  if (k < c) {
    throw Infeasible("cannot give each of " + std::to_string(c) + " contours a segment with only " +
                     std::to_string(k));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("apportion: total perimeter must be positive");

  std::vector<double> quota(c);
  std::vector<std::size_t> count(c);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < c; ++i) {
    quota[i] = static_cast<double>(k) * weights[i] / total;
    count[i] = static_cast<std::size_t>(std::floor(quota[i]));
    assigned += count[i];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
  });
  for (std::size_t i = 0; assigned < k; ++i, ++assigned) ++count[order[i % c]];

  // Minimum one per contour: take from whoever is furthest above its quota.
  for (std::size_t i = 0; i < c; ++i) {
    if (count[i] > 0) continue;
    std::size_t donor = c;
    for (std::size_t j = 0; j < c; ++j) {
      if (count[j] <= 1) continue;
      if (donor == c || static_cast<double>(count[j]) - quota[j] >
                            static_cast<double>(count[donor]) - quota[donor]) {
        donor = j;
      }
    }
    --count[donor];
    ++count[i];
  }
  return count;
}

namespace {

std::vector<double> perimeters(std::span<const Polyline> contours) {
  std::vector<double> p;
  p.reserve(contours.size());
  for (const Polyline& c : contours) p.push_back(c.perimeter());
  return p;
}

}  // namespace

std::vector<Segment> partition_to_segments(std::span<const Polyline> contours, std::size_t k) {
  if (k == 0) throw InvalidArgument("partition: k must be >= 1");
  const auto counts = apportion(perimeters(contours), k);
  std::vector<Segment> out;
  out.reserve(k);
  for (std::size_t ci = 0; ci < contours.size(); ++ci) {
    const Polyline& contour = contours[ci];
    const double total = contour.perimeter();
    const std::size_t kc = counts[ci];
    if (contour.closed() && kc == 1) {
      out.push_back({contour.point_at(0.0), contour.point_at(total / 2.0)});
      continue;
    }
    for (std::size_t i = 0; i < kc; ++i) {
      const double s0 = total * static_cast<double>(i) / static_cast<double>(kc);
      const double s1 = total * static_cast<double>(i + 1) / static_cast<double>(kc);
      const Vec2 a = contour.point_at(s0);
      const Vec2 b = (contour.closed() && i + 1 == kc) ? contour.point_at(0.0) : contour.point_at(s1);
      out.push_back({a, b});
    }
  }
  return out;
}

std::vector<Station> arc_length_stations(std::span<const Polyline> contours, std::size_t n) {
  if (n == 0) throw InvalidArgument("stations: n must be >= 1");
  const auto counts = apportion(perimeters(contours), n);
  std::vector<Station> out;
  out.reserve(n);
  for (std::size_t ci = 0; ci < contours.size(); ++ci) {
    const Polyline& contour = contours[ci];
    const double total = contour.perimeter();
    const std::size_t kc = counts[ci];
    const double divisor = contour.closed() ? static_cast<double>(kc) : static_cast<double>(std::max<std::size_t>(kc, 2) - 1);
    for (std::size_t i = 0; i < kc; ++i) {
      const double s = total * static_cast<double>(i) / divisor;
      out.push_back({contour.point_at(s), contour.tangent_at(s)});
    }
  }
  return out;
}

}  // namespace shapebots
