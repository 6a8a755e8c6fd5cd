#pragma once

#include "egat/node_features.hpp"
#include "egat/structure.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace egat {

inline constexpr int kDefaultNeighbors = 16;
inline constexpr double kDefaultCutoff = 5.0;

// Directed neighbor graph. Edge e carries a message src[e] -> dst[e], i.e. j -> i
// with i = dst[e]. Edges are grouped by destination in ascending order and, within
// a destination, ordered nearest first.
struct AtomGraph {
  std::size_t node_count = 0;
  std::vector<std::uint32_t> src;
  std::vector<std::uint32_t> dst;
  std::vector<double> dist;  // d_ij
  std::vector<Vec3> dir;     // u_ij = (x_i - x_j) / d_ij
  std::vector<std::uint32_t> residue_index;  // per node
  std::size_t residue_count = 0;

  std::size_t edge_count() const { return src.size(); }
};

struct EdgeGeometry {
  double distance;
  Vec3 direction;
};

// d = |x_i - x_j|, u = (x_i - x_j) / d. Throws DegenerateCoordinates when d = 0.
EdgeGeometry edge_geometry(const Vec3& x_i, const Vec3& x_j);

// For each node i, edges j -> i for the min(k, available) nearest j != i with
// d_ij <= cutoff. Ties at equal distance go to the lower serial, then the lower
// index. residue_index defaults to one residue per node when empty.
AtomGraph build_graph(std::span<const Vec3> positions, std::span<const int> serials, int k,
                      double cutoff, std::span<const std::uint32_t> residue_index = {});

// Graph over every atom of s; nodes follow Atom::index.
AtomGraph build_graph(const Structure& s, int k = kDefaultNeighbors, double cutoff = kDefaultCutoff);

// Text dump:
//   # egat-graph 1
//   nodes <n> <feature dim>
//   edges <m>
//   X <i> <residue> <f_1> ... <f_dim>
//   E <i> <j> <d> <ux> <uy> <uz>
// Edge lines name the destination i first and the source j second.
void write_graph_dump(std::ostream& out, const AtomGraph& g, const NodeFeatures* features);

struct GraphDump {
  std::size_t node_count = 0;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // node_count x feature_dim
  std::vector<std::uint32_t> residue_index;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (i, j)
  std::vector<double> dist;
  std::vector<Vec3> dir;
};

// Throws MalformedRecord on any syntax or count error.
GraphDump read_graph_dump(std::istream& in);

}  // namespace egat
