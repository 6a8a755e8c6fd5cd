#pragma once

#include "egat/structure.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace egat {

// Uniform grid over a point set. Queries visit the 27 cells around a point, so
// any neighbor within `cell_size` of the query is guaranteed to be visited.
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Vec3> points, double cell_size);

  // Calls fn(j, distance) for every indexed point j with distance <= radius.
  // radius must not exceed cell_size.
  template <typename Fn>
  void for_each_within(const Vec3& query, double radius, Fn&& fn) const {
    const auto c = cell_of(query);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == cells_.end()) continue;
          for (std::uint32_t j : it->second) {
            const Vec3& p = points_[j];
            const double ex = query.x() - p.x();
            const double ey = query.y() - p.y();
            const double ez = query.z() - p.z();
            const double d = std::sqrt(ex * ex + ey * ey + ez * ez);
            if (d <= radius) fn(static_cast<std::size_t>(j), d);
          }
        }
  }

  double cell_size() const { return cell_size_; }

 private:
  std::array<std::int64_t, 3> cell_of(const Vec3& p) const;
  static std::uint64_t key(std::int64_t x, std::int64_t y, std::int64_t z);

  std::span<const Vec3> points_;
  double cell_size_;
  Vec3 origin_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace egat
