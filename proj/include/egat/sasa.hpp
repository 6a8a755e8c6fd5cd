#pragma once

#include "egat/feature_config.hpp"
#include "egat/structure.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace egat {

// Orientation of the quadrature points. Global keeps a fixed frame; Local
// attaches the points to the molecule's principal axes so the result is
// exactly invariant under rigid motion.
enum class SasaFrame { Global, Local };

// Deterministic golden-spiral points on the unit sphere.
std::vector<Vec3> golden_spiral_points(int count);

// Principal-axis frame (columns) with a skewness-based sign convention.
Eigen::Matrix3d principal_frame(std::span<const Vec3> points);

// Shrake-Rupley per-atom SASA in A^2.
std::vector<double> shrake_rupley(std::span<const Vec3> positions, std::span<const double> radii,
                                  double probe_radius, int sphere_points,
                                  SasaFrame frame = SasaFrame::Global);

// Per-atom SASA indexed by Atom::index.
std::vector<double> compute_sasa(const Structure& s, const FeatureConfig& cfg,
                                 SasaFrame frame = SasaFrame::Global);

// Sum of atom SASA per residue, indexed by Residue::index.
std::vector<double> residue_sasa(const Structure& s, std::span<const double> atom_sasa);

// min(residue_sasa / max_asa, 1); unknown residues use the mean of the table.
double compute_rsa(double residue_sasa, const std::string& residue_name, const FeatureConfig& cfg);

}  // namespace egat
