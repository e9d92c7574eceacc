#include "gkm/error.hpp"
#include "gkm/sim.hpp"

#include <algorithm>
#include <cmath>

namespace gkm {

std::optional<std::uint32_t>
optimize_cluster_size(std::uint32_t n, unsigned a, double beta)
{
  if (n < 1 || a < 2 || !(beta > 0)) {
    throw Error(ErrorCode::InvalidParams, "optimizer needs N >= 1, a >= 2 and beta > 0");
  }
  const double log_a = std::log(static_cast<double>(a));
  const double budget = beta * std::log(static_cast<double>(n)) / log_a;
  constexpr double kSlack = 1e-12;
  auto cost = [&](std::uint32_t m) {
    return static_cast<double>(m - 1) +
           static_cast<double>(a - 1) * std::log(static_cast<double>(n) / static_cast<double>(m)) / log_a;
  };
  auto feasible = [&](std::uint32_t m) { return cost(m) <= budget + kSlack; };

  // Storage depends only on C = ceil(N/M) and falls as C falls, so walk the
  // blocks of M sharing a cluster count from the smallest C upward. The cost
  // is convex in M, falling until (a-1)/ln a and rising after.
  const double turn = static_cast<double>(a - 1) / log_a;
  std::uint64_t clusters = 1;
  while (true) {
    const auto lo = static_cast<std::uint32_t>((n + clusters - 1) / clusters);
    const auto hi = clusters == 1 ? n : static_cast<std::uint32_t>((n - 1) / (clusters - 1));
    if (lo <= hi && (n + lo - 1) / lo == clusters) {
      const auto floor_turn = static_cast<std::uint32_t>(std::clamp(std::floor(turn), 1.0, static_cast<double>(n)));
      std::uint32_t best = std::clamp(floor_turn, lo, hi);
      if (best + 1 <= hi && cost(best + 1) < cost(best)) {
        ++best;
      }
      if (feasible(best)) {
        // Cost falls on [lo, best]; find its first feasible point.
        std::uint32_t left = lo;
        std::uint32_t right = best;
        while (left < right) {
          const std::uint32_t mid = left + (right - left) / 2;
          if (feasible(mid)) {
            right = mid;
          } else {
            left = mid + 1;
          }
        }
        return left;
      }
    }
    if (clusters >= n) {
      return std::nullopt;
    }
    ++clusters;
  }
}

} // namespace gkm
