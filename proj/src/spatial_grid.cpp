#include "egat/spatial_grid.hpp"

#include "egat/error.hpp"

#include <cmath>

namespace egat {

SpatialGrid::SpatialGrid(std::span<const Vec3> points, double cell_size)
    : points_(points), cell_size_(cell_size * (1.0 + 1e-6)), origin_(Vec3::Zero()) {
  if (!(cell_size > 0.0)) fail(ErrorCode::InvalidArgument, "grid cell size must be positive");
  if (!points.empty()) {
    origin_ = points[0];
    for (const auto& p : points) origin_ = origin_.cwiseMin(p);
  }
  cells_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    cells_[key(c[0], c[1], c[2])].push_back(static_cast<std::uint32_t>(i));
  }
}

std::array<std::int64_t, 3> SpatialGrid::cell_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor((p.x() - origin_.x()) / cell_size_)),
          static_cast<std::int64_t>(std::floor((p.y() - origin_.y()) / cell_size_)),
          static_cast<std::int64_t>(std::floor((p.z() - origin_.z()) / cell_size_))};
}

std::uint64_t SpatialGrid::key(std::int64_t x, std::int64_t y, std::int64_t z) {
  constexpr std::int64_t kBias = 1 << 20;
  const auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v + kBias) & 0x1FFFFF; };
  return (u(x) << 42) | (u(y) << 21) | u(z);
}

}  // namespace egat
