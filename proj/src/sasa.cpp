#include "egat/sasa.hpp"

#include "egat/error.hpp"
#include "egat/spatial_grid.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace egat {

std::vector<Vec3> golden_spiral_points(int count) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "sphere point count must be >= 1");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

Eigen::Matrix3d principal_frame(std::span<const Vec3> points) {
  if (points.size() < 2) return Eigen::Matrix3d::Identity();
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  // Eigen sorts ascending; take the two largest axes and complete a right-handed frame.
  Vec3 e1 = solver.eigenvectors().col(2);
  Vec3 e2 = solver.eigenvectors().col(1);
  const auto skew_sign = [&](const Vec3& axis) {
    double m3 = 0.0;
    for (const auto& p : points) {
      const double t = (p - centroid).dot(axis);
      m3 += t * t * t;
    }
    return m3 < 0.0 ? -1.0 : 1.0;
  };
  e1 *= skew_sign(e1);
  e2 *= skew_sign(e2);
  Eigen::Matrix3d frame;
  frame.col(0) = e1;
  frame.col(1) = e2;
  frame.col(2) = e1.cross(e2);
  return frame;
}

std::vector<double> shrake_rupley(std::span<const Vec3> positions, std::span<const double> radii,
                                  double probe_radius, int sphere_points, SasaFrame frame) {
  if (positions.size() != radii.size())
    fail(ErrorCode::ShapeMismatch, "positions and radii differ in length");
  std::vector<double> sasa(positions.size(), 0.0);
  if (positions.empty()) return sasa;

  std::vector<Vec3> unit = golden_spiral_points(sphere_points);
  if (frame == SasaFrame::Local) {
    const Eigen::Matrix3d f = principal_frame(positions);
    for (auto& u : unit) u = f * u;
  }

  std::vector<double> expanded(radii.size());
  double r_max = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    expanded[i] = radii[i] + probe_radius;
    r_max = std::max(r_max, expanded[i]);
  }
  const SpatialGrid grid(positions, 2.0 * r_max);

  std::vector<std::size_t> neighbors;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double ri = expanded[i];
    neighbors.clear();
    grid.for_each_within(positions[i], 2.0 * r_max, [&](std::size_t j, double d) {
      if (j != i && d < ri + expanded[j]) neighbors.push_back(j);
    });
    // Nearest neighbors first: they bury the most points.
    std::sort(neighbors.begin(), neighbors.end(), [&](std::size_t a, std::size_t b) {
      return (positions[a] - positions[i]).squaredNorm() < (positions[b] - positions[i]).squaredNorm();
    });

    std::size_t exposed = 0;
    std::size_t last_blocker = 0;
    for (const auto& u : unit) {
      const Vec3 p = positions[i] + ri * u;
      bool buried = false;
      if (!neighbors.empty()) {
        const std::size_t jb = neighbors[last_blocker];
        if ((p - positions[jb]).squaredNorm() < expanded[jb] * expanded[jb]) buried = true;
      }
      for (std::size_t k = 0; !buried && k < neighbors.size(); ++k) {
        const std::size_t j = neighbors[k];
        if ((p - positions[j]).squaredNorm() < expanded[j] * expanded[j]) {
          buried = true;
          last_blocker = k;
        }
      }
      if (!buried) ++exposed;
    }
    sasa[i] = 4.0 * std::numbers::pi * ri * ri * static_cast<double>(exposed) /
              static_cast<double>(unit.size());
  }
  return sasa;
}

std::vector<double> compute_sasa(const Structure& s, const FeatureConfig& cfg, SasaFrame frame) {
  std::vector<Vec3> pos(s.atom_count());
  std::vector<double> radii(s.atom_count());
  s.for_each_atom([&](const Atom& a) {
    pos[a.index] = a.pos;
    radii[a.index] = cfg.radius_for(a.element);
  });
  return shrake_rupley(pos, radii, cfg.probe_radius, cfg.sphere_points, frame);
}

std::vector<double> residue_sasa(const Structure& s, std::span<const double> atom_sasa) {
  std::vector<double> out(s.residue_count(), 0.0);
  s.for_each_residue([&](const Residue& r) {
    for (const auto& a : r.atoms) out[r.index] += atom_sasa[a.index];
  });
  return out;
}

double compute_rsa(double residue_sasa, const std::string& residue_name, const FeatureConfig& cfg) {
  if (!(residue_sasa >= 0.0)) fail(ErrorCode::InvalidArgument, "residue SASA must be non-negative");
  return std::min(residue_sasa / cfg.max_asa_for(residue_name), 1.0);
}

}  // namespace egat
