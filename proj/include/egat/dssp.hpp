#pragma once

#include "egat/feature_config.hpp"
#include "egat/structure.hpp"

#include <vector>

namespace egat {

// Kabsch-Sander electrostatic hydrogen-bond energy in kcal/mol between the
// N-H of a donor residue and the C=O of an acceptor residue.
double hbond_energy(const Vec3& donor_n, const Vec3& donor_h, const Vec3& acceptor_c,
                    const Vec3& acceptor_o);

inline constexpr double kHBondThreshold = -0.5;

// 8-class DSSP assignment indexed by Residue::index. Residues that are not
// amino acids or that lack any of N, CA, C, O are assigned C.
std::vector<SecondaryStructure> assign_secondary_structure(const Structure& s);

}  // namespace egat
