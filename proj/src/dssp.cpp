#include "egat/dssp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>

namespace egat {
namespace {

constexpr double kCoupling = 0.084 * 332.0;
constexpr double kMinDistance = 0.5;
constexpr double kMinEnergy = -9.9;
constexpr double kMaxCaDistance = 9.0;
constexpr double kMaxPeptideBond = 2.5;
constexpr double kNhLength = 1.01;

enum class HelixFlag : unsigned char { None, Start, End, StartAndEnd, Middle };
enum class BridgeType { None, Parallel, Antiparallel };

struct HBond {
  std::int64_t partner = -1;
  double energy = 0.0;
};

struct BackboneResidue {
  std::size_t residue_index = 0;
  char chain_id = ' ';
  bool is_proline = false;
  bool has_h = false;
  Vec3 n, ca, c, o, h;
  std::array<HBond, 2> acceptor;  // best C=O partners of this residue's N-H
  std::array<HelixFlag, 3> helix{HelixFlag::None, HelixFlag::None, HelixFlag::None};  // strides 3,4,5
  bool bend = false;
  SecondaryStructure ss = SecondaryStructure::C;
  bool assigned = false;  // anything other than loop
};

struct Ladder {
  BridgeType type = BridgeType::None;
  std::deque<std::uint32_t> i;
  std::deque<std::uint32_t> j;
};

class Assigner {
 public:
  explicit Assigner(std::vector<BackboneResidue> res) : r_(std::move(res)) {
    breaks_before_.assign(r_.size(), true);
    for (std::size_t k = 1; k < r_.size(); ++k)
      breaks_before_[k] = r_[k].chain_id != r_[k - 1].chain_id ||
                          (r_[k].n - r_[k - 1].c).norm() > kMaxPeptideBond;
  }

  void run() {
    place_hydrogens();
    compute_hbonds();
    beta_sheets();
    helices();
  }

  const std::vector<BackboneResidue>& residues() const { return r_; }

 private:
  bool no_chain_break(std::size_t from, std::size_t to) const {
    for (std::size_t k = from + 1; k <= to; ++k)
      if (breaks_before_[k]) return false;
    return true;
  }

  void place_hydrogens() {
    for (std::size_t k = 0; k < r_.size(); ++k) {
      r_[k].h = r_[k].n;
      if (k == 0 || breaks_before_[k]) continue;
      const Vec3 co = r_[k - 1].c - r_[k - 1].o;
      const double len = co.norm();
      if (len <= 0.0) continue;
      r_[k].h = r_[k].n + kNhLength * co / len;
      r_[k].has_h = true;
    }
  }

  void record(std::size_t donor, std::size_t acceptor) {
    BackboneResidue& d = r_[donor];
    if (d.is_proline) return;
    const BackboneResidue& a = r_[acceptor];
    const double e = hbond_energy(d.n, d.h, a.c, a.o);
    if (e < d.acceptor[0].energy) {
      d.acceptor[1] = d.acceptor[0];
      d.acceptor[0] = {static_cast<std::int64_t>(acceptor), e};
    } else if (e < d.acceptor[1].energy) {
      d.acceptor[1] = {static_cast<std::int64_t>(acceptor), e};
    }
  }

  void compute_hbonds() {
    for (std::size_t i = 0; i + 1 < r_.size(); ++i)
      for (std::size_t j = i + 1; j < r_.size(); ++j) {
        if ((r_[i].ca - r_[j].ca).norm() >= kMaxCaDistance) continue;
        record(i, j);
        if (j != i + 1) record(j, i);
      }
  }

  // N-H of `donor` bonded to C=O of `acceptor`.
  bool bond(std::size_t donor, std::size_t acceptor) const {
    for (const auto& hb : r_[donor].acceptor)
      if (hb.partner == static_cast<std::int64_t>(acceptor) && hb.energy < kHBondThreshold) return true;
    return false;
  }

  BridgeType bridge(std::size_t i, std::size_t j) const {
    if (i == 0 || j == 0 || i + 1 >= r_.size() || j + 1 >= r_.size()) return BridgeType::None;
    const std::size_t a = i - 1, b = i, c = i + 1, d = j - 1, e = j, f = j + 1;
    if (!no_chain_break(a, c) || !no_chain_break(d, f)) return BridgeType::None;
    if ((bond(c, e) && bond(e, a)) || (bond(f, b) && bond(b, d))) return BridgeType::Parallel;
    if ((bond(c, d) && bond(f, a)) || (bond(e, b) && bond(b, e))) return BridgeType::Antiparallel;
    return BridgeType::None;
  }

  void beta_sheets() {
    std::vector<Ladder> ladders;
    for (std::uint32_t i = 1; i + 4 < r_.size(); ++i)
      for (std::uint32_t j = i + 3; j + 1 < r_.size(); ++j) {
        const BridgeType type = bridge(i, j);
        if (type == BridgeType::None) continue;
        bool found = false;
        for (auto& l : ladders) {
          if (type != l.type || i != l.i.back() + 1) continue;
          if (type == BridgeType::Parallel && l.j.back() + 1 == j) {
            l.i.push_back(i);
            l.j.push_back(j);
            found = true;
            break;
          }
          if (type == BridgeType::Antiparallel && l.j.front() - 1 == j) {
            l.i.push_back(i);
            l.j.push_front(j);
            found = true;
            break;
          }
        }
        if (!found) {
          Ladder l;
          l.type = type;
          l.i.push_back(i);
          l.j.push_back(j);
          ladders.push_back(std::move(l));
        }
      }

    std::stable_sort(ladders.begin(), ladders.end(),
                     [](const Ladder& x, const Ladder& y) { return x.i.front() < y.i.front(); });

    // Join ladders separated by a beta-bulge. Unsigned differences wrap on
    // purpose so that out-of-order ladders never qualify.
    for (std::size_t x = 0; x < ladders.size(); ++x)
      for (std::size_t y = x + 1; y < ladders.size(); ++y) {
        const std::uint32_t ibi = ladders[x].i.front(), iei = ladders[x].i.back();
        const std::uint32_t jbi = ladders[x].j.front(), jei = ladders[x].j.back();
        const std::uint32_t ibj = ladders[y].i.front(), iej = ladders[y].i.back();
        const std::uint32_t jbj = ladders[y].j.front(), jej = ladders[y].j.back();
        if (ladders[x].type != ladders[y].type ||
            r_[std::min(ibi, ibj)].chain_id != r_[std::max(iei, iej)].chain_id ||
            r_[std::min(jbi, jbj)].chain_id != r_[std::max(jei, jej)].chain_id ||
            static_cast<std::uint32_t>(ibj - iei) >= 6 || (iei >= ibj && ibi <= iej))
          continue;
        bool bulge;
        if (ladders[x].type == BridgeType::Parallel)
          bulge = (static_cast<std::uint32_t>(jbj - jei) < 6 && static_cast<std::uint32_t>(ibj - iei) < 3) ||
                  static_cast<std::uint32_t>(jbj - jei) < 3;
        else
          bulge = (static_cast<std::uint32_t>(jbi - jej) < 6 && static_cast<std::uint32_t>(ibj - iei) < 3) ||
                  static_cast<std::uint32_t>(jbi - jej) < 3;
        if (!bulge) continue;
        ladders[x].i.insert(ladders[x].i.end(), ladders[y].i.begin(), ladders[y].i.end());
        if (ladders[x].type == BridgeType::Parallel)
          ladders[x].j.insert(ladders[x].j.end(), ladders[y].j.begin(), ladders[y].j.end());
        else
          ladders[x].j.insert(ladders[x].j.begin(), ladders[y].j.begin(), ladders[y].j.end());
        ladders.erase(ladders.begin() + static_cast<std::ptrdiff_t>(y));
        --y;
      }

    for (const auto& l : ladders) {
      const SecondaryStructure ss = l.i.size() > 1 ? SecondaryStructure::E : SecondaryStructure::B;
      const auto mark = [&](std::uint32_t lo, std::uint32_t hi) {
        for (std::uint32_t k = lo; k <= hi; ++k)
          if (r_[k].ss != SecondaryStructure::E) {
            r_[k].ss = ss;
            r_[k].assigned = true;
          }
      };
      mark(l.i.front(), l.i.back());
      mark(std::min(l.j.front(), l.j.back()), std::max(l.j.front(), l.j.back()));
    }
  }

  static bool is_start(HelixFlag f) { return f == HelixFlag::Start || f == HelixFlag::StartAndEnd; }

  void helices() {
    for (std::size_t stride = 3; stride <= 5; ++stride) {
      const std::size_t s = stride - 3;
      for (std::size_t i = 0; i + stride < r_.size(); ++i) {
        if (!no_chain_break(i, i + stride) || !bond(i + stride, i)) continue;
        r_[i + stride].helix[s] = HelixFlag::End;
        for (std::size_t j = i + 1; j < i + stride; ++j)
          if (r_[j].helix[s] == HelixFlag::None) r_[j].helix[s] = HelixFlag::Middle;
        r_[i].helix[s] = r_[i].helix[s] == HelixFlag::End ? HelixFlag::StartAndEnd : HelixFlag::Start;
      }
    }

    const auto set = [&](std::size_t k, SecondaryStructure ss) {
      r_[k].ss = ss;
      r_[k].assigned = true;
    };

    for (std::size_t i = 1; i + 4 < r_.size(); ++i)
      if (is_start(r_[i].helix[1]) && is_start(r_[i - 1].helix[1]))
        for (std::size_t j = i; j <= i + 3; ++j) set(j, SecondaryStructure::H);

    for (std::size_t i = 1; i + 3 < r_.size(); ++i)
      if (is_start(r_[i].helix[0]) && is_start(r_[i - 1].helix[0])) {
        bool empty = true;
        for (std::size_t j = i; empty && j <= i + 2; ++j)
          empty = !r_[j].assigned || r_[j].ss == SecondaryStructure::G;
        if (empty)
          for (std::size_t j = i; j <= i + 2; ++j) set(j, SecondaryStructure::G);
      }

    for (std::size_t i = 1; i + 5 < r_.size(); ++i)
      if (is_start(r_[i].helix[2]) && is_start(r_[i - 1].helix[2])) {
        bool empty = true;
        for (std::size_t j = i; empty && j <= i + 4; ++j)
          empty = !r_[j].assigned || r_[j].ss == SecondaryStructure::I;
        if (empty)
          for (std::size_t j = i; j <= i + 4; ++j) set(j, SecondaryStructure::I);
      }

    for (std::size_t i = 2; i + 2 < r_.size(); ++i) {
      if (!no_chain_break(i - 2, i + 2)) continue;
      const Vec3 v1 = r_[i].ca - r_[i - 2].ca;
      const Vec3 v2 = r_[i + 2].ca - r_[i].ca;
      const double denom = v1.norm() * v2.norm();
      if (denom <= 0.0) continue;
      const double cosk = std::clamp(v1.dot(v2) / denom, -1.0, 1.0);
      r_[i].bend = std::acos(cosk) * 180.0 / std::numbers::pi > 70.0;
    }

    for (std::size_t i = 1; i + 1 < r_.size(); ++i) {
      if (r_[i].assigned) continue;
      bool turn = false;
      for (std::size_t stride = 3; stride <= 5 && !turn; ++stride)
        for (std::size_t k = 1; k < stride && !turn; ++k)
          turn = i >= k && is_start(r_[i - k].helix[stride - 3]);
      if (turn)
        set(i, SecondaryStructure::T);
      else if (r_[i].bend)
        set(i, SecondaryStructure::S);
    }
  }

  std::vector<BackboneResidue> r_;
  std::vector<bool> breaks_before_;
};

}  // namespace

double hbond_energy(const Vec3& donor_n, const Vec3& donor_h, const Vec3& acceptor_c,
                    const Vec3& acceptor_o) {
  const double r_on = (acceptor_o - donor_n).norm();
  const double r_ch = (acceptor_c - donor_h).norm();
  const double r_oh = (acceptor_o - donor_h).norm();
  const double r_cn = (acceptor_c - donor_n).norm();
  if (r_on < kMinDistance || r_ch < kMinDistance || r_oh < kMinDistance || r_cn < kMinDistance)
    return kMinEnergy;
  const double e = kCoupling * (1.0 / r_on + 1.0 / r_ch - 1.0 / r_oh - 1.0 / r_cn);
  return std::max(e, kMinEnergy);
}

std::vector<SecondaryStructure> assign_secondary_structure(const Structure& s) {
  std::vector<SecondaryStructure> out(s.residue_count(), SecondaryStructure::C);
  std::vector<BackboneResidue> backbone;
  s.for_each_residue([&](const Residue& r) {
    if (!is_amino_acid(r.residue_name)) return;
    const Atom* n = r.find_atom("N");
    const Atom* ca = r.find_atom("CA");
    const Atom* c = r.find_atom("C");
    const Atom* o = r.find_atom("O");
    if (!n || !ca || !c || !o) return;
    BackboneResidue b;
    b.residue_index = r.index;
    b.chain_id = r.chain_id;
    b.is_proline = r.residue_name == "PRO";
    b.n = n->pos;
    b.ca = ca->pos;
    b.c = c->pos;
    b.o = o->pos;
    backbone.push_back(b);
  });
  Assigner assigner(std::move(backbone));
  assigner.run();
  for (const auto& b : assigner.residues()) out[b.residue_index] = b.ss;
  return out;
}

}  // namespace egat
