#include "egat/atom_graph.hpp"

#include "egat/error.hpp"
#include "egat/spatial_grid.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace egat {

EdgeGeometry edge_geometry(const Vec3& x_i, const Vec3& x_j) {
  const Vec3 diff = x_i - x_j;
  const double d = diff.norm();
  if (!(d > 0.0)) fail(ErrorCode::DegenerateCoordinates, "coincident atoms: zero edge length");
  return {d, diff / d};
}

AtomGraph build_graph(std::span<const Vec3> positions, std::span<const int> serials, int k,
                      double cutoff, std::span<const std::uint32_t> residue_index) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (!(cutoff > 0.0)) fail(ErrorCode::InvalidArgument, "cutoff must be positive");
  if (serials.size() != positions.size())
    fail(ErrorCode::ShapeMismatch, "serials and positions differ in length");
  if (!residue_index.empty() && residue_index.size() != positions.size())
    fail(ErrorCode::ShapeMismatch, "residue index and positions differ in length");

  AtomGraph g;
  g.node_count = positions.size();
  if (residue_index.empty()) {
    g.residue_index.resize(g.node_count);
    for (std::size_t i = 0; i < g.node_count; ++i) g.residue_index[i] = static_cast<std::uint32_t>(i);
    g.residue_count = g.node_count;
  } else {
    g.residue_index.assign(residue_index.begin(), residue_index.end());
    g.residue_count = g.node_count == 0
                          ? 0
                          : *std::max_element(residue_index.begin(), residue_index.end()) + 1u;
  }
  if (g.node_count == 0) return g;

  const SpatialGrid grid(positions, cutoff);
  struct Candidate {
    double d;
    int serial;
    std::uint32_t j;
  };
  std::vector<Candidate> cand;
  const auto kk = static_cast<std::size_t>(k);
  for (std::size_t i = 0; i < g.node_count; ++i) {
    cand.clear();
    grid.for_each_within(positions[i], cutoff, [&](std::size_t j, double d) {
      if (j == i) return;
      if (d == 0.0) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "atoms %d and %d have identical coordinates", serials[i],
                      serials[j]);
        fail(ErrorCode::DegenerateCoordinates, msg);
      }
      cand.push_back({d, serials[j], static_cast<std::uint32_t>(j)});
    });
    const auto less = [](const Candidate& a, const Candidate& b) {
      return std::tie(a.d, a.serial, a.j) < std::tie(b.d, b.serial, b.j);
    };
    const std::size_t take = std::min(kk, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), less);
    for (std::size_t n = 0; n < take; ++n) {
      const auto j = cand[n].j;
      g.src.push_back(j);
      g.dst.push_back(static_cast<std::uint32_t>(i));
      g.dist.push_back(cand[n].d);
      g.dir.push_back((positions[i] - positions[j]) / cand[n].d);
    }
  }
  return g;
}

AtomGraph build_graph(const Structure& s, int k, double cutoff) {
  std::vector<Vec3> pos(s.atom_count());
  std::vector<int> serials(s.atom_count());
  std::vector<std::uint32_t> residue(s.atom_count());
  s.for_each_residue([&](const Residue& r) {
    for (const auto& a : r.atoms) {
      pos[a.index] = a.pos;
      serials[a.index] = a.serial;
      residue[a.index] = static_cast<std::uint32_t>(r.index);
    }
  });
  AtomGraph g = build_graph(pos, serials, k, cutoff, residue);
  g.residue_count = s.residue_count();
  return g;
}

void write_graph_dump(std::ostream& out, const AtomGraph& g, const NodeFeatures* features) {
  const std::size_t dim = features ? features->dim : 0;
  if (features && features->atom_count != g.node_count)
    fail(ErrorCode::ShapeMismatch, "feature rows do not match graph nodes");
  char buf[160];
  out << "# egat-graph 1\n";
  out << "nodes " << g.node_count << ' ' << dim << '\n';
  out << "edges " << g.edge_count() << '\n';
  for (std::size_t i = 0; i < g.node_count; ++i) {
    out << "X " << i << ' ' << g.residue_index[i];
    for (std::size_t c = 0; c < dim; ++c) {
      std::snprintf(buf, sizeof buf, " %.17g", features->at(i, c));
      out << buf;
    }
    out << '\n';
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    std::snprintf(buf, sizeof buf, "E %u %u %.17g %.17g %.17g %.17g\n", g.dst[e], g.src[e], g.dist[e],
                  g.dir[e].x(), g.dir[e].y(), g.dir[e].z());
    out << buf;
  }
}

GraphDump read_graph_dump(std::istream& in) {
  GraphDump d;
  std::string line;
  std::size_t line_no = 0;
  const auto bad = [&](const std::string& why) {
    fail(ErrorCode::MalformedRecord, "graph dump line " + std::to_string(line_no) + ": " + why);
  };
  bool have_nodes = false, have_edges = false;
  std::size_t expected_edges = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "nodes") {
      if (!(ls >> d.node_count >> d.feature_dim)) bad("bad nodes header");
      d.features.assign(d.node_count * d.feature_dim, 0.0);
      d.residue_index.assign(d.node_count, 0);
      have_nodes = true;
    } else if (tag == "edges") {
      if (!(ls >> expected_edges)) bad("bad edges header");
      have_edges = true;
    } else if (tag == "X") {
      if (!have_nodes) bad("node before header");
      std::size_t i;
      std::uint32_t r;
      if (!(ls >> i >> r) || i >= d.node_count) bad("bad node line");
      d.residue_index[i] = r;
      for (std::size_t c = 0; c < d.feature_dim; ++c)
        if (!(ls >> d.features[i * d.feature_dim + c])) bad("short feature row");
    } else if (tag == "E") {
      std::uint32_t i, j;
      double dist, x, y, z;
      if (!(ls >> i >> j >> dist >> x >> y >> z)) bad("bad edge line");
      d.edges.emplace_back(i, j);
      d.dist.push_back(dist);
      d.dir.emplace_back(x, y, z);
    } else {
      bad("unknown record '" + tag + "'");
    }
  }
  if (!have_nodes || !have_edges) fail(ErrorCode::MalformedRecord, "graph dump missing header");
  if (d.edges.size() != expected_edges)
    fail(ErrorCode::MalformedRecord, "graph dump edge count does not match header");
  return d;
}

}  // namespace egat
