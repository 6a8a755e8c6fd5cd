#include "egat/dssp.hpp"
#include "egat/error.hpp"
#include "egat/node_features.hpp"
#include "egat/sasa.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace egat;
using namespace egat::test;

namespace {

double sphere_area(double r) { return 4.0 * std::numbers::pi * r * r; }

// Exposed area of sphere a when sphere b of radius rb sits at distance d.
double capped_area(double ra, double rb, double d) {
  const double x = (d * d + ra * ra - rb * rb) / (2.0 * d);
  return sphere_area(ra) - 2.0 * std::numbers::pi * ra * (ra - x);
}

double isolated_carbon(int points) {
  const std::vector<Vec3> pos{Vec3(1.0, -2.0, 3.0)};
  const std::vector<double> radii{1.70};
  return shrake_rupley(pos, radii, 1.4, points)[0];
}

}  // namespace

TEST(Sasa, IsolatedCarbonMatchesSphereArea) {
  const double expected = sphere_area(3.10);
  EXPECT_NEAR(expected, 120.76, 0.01);
  EXPECT_LE(std::abs(isolated_carbon(92) - expected) / expected, 0.02);
  EXPECT_LE(std::abs(isolated_carbon(252) - expected) / expected, 0.005);
}

TEST(Sasa, IsolatedAtomErrorDoesNotGrowWithPoints) {
  const double expected = sphere_area(3.10);
  double prev = std::abs(isolated_carbon(32) - expected);
  for (int n : {92, 252}) {
    const double err = std::abs(isolated_carbon(n) - expected);
    EXPECT_LE(err, prev + 1e-9) << n;
    prev = err;
  }
}

TEST(Sasa, OverlappingPairConvergesToCapFormula) {
  const std::vector<Vec3> pos{Vec3::Zero(), Vec3(3.0, 0.0, 0.0)};
  const std::vector<double> radii{1.70, 1.52};
  const double expected = capped_area(3.10, 2.92, 3.0);
  const double e32 = std::abs(shrake_rupley(pos, radii, 1.4, 32)[0] - expected);
  const double e252 = std::abs(shrake_rupley(pos, radii, 1.4, 252)[0] - expected);
  EXPECT_LT(e252, e32);
  EXPECT_LT(e252 / expected, 0.02);
}

TEST(Sasa, BuriedAtomHasZeroArea) {
  std::vector<Vec3> pos{Vec3::Zero()};
  for (const Vec3& u : golden_spiral_points(60)) pos.push_back(2.0 * u);
  const std::vector<double> radii(pos.size(), 1.70);
  const auto sasa = shrake_rupley(pos, radii, 1.4, 92);
  EXPECT_EQ(sasa[0], 0.0);
  for (double v : sasa) EXPECT_GE(v, 0.0);
}

TEST(Sasa, IdenticalPairIsSymmetric) {
  const std::vector<Vec3> pos{Vec3(0.3, 0.1, -0.2), Vec3(1.3, 0.1, -0.2)};
  const std::vector<double> radii{1.70, 1.70};
  const auto sasa = shrake_rupley(pos, radii, 1.4, 92, SasaFrame::Local);
  EXPECT_NEAR(sasa[0], sasa[1], 1e-9);
  EXPECT_LT(sasa[0], sphere_area(3.10));
}

TEST(Sasa, GoldenSpiralPointsAreUnitVectors) {
  const auto pts = golden_spiral_points(92);
  ASSERT_EQ(pts.size(), 92u);
  Vec3 sum = Vec3::Zero();
  for (const auto& p : pts) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    sum += p;
  }
  EXPECT_LT(sum.norm() / 92.0, 0.05);
}

TEST(Sasa, LocalFrameIsRigidMotionInvariant) {
  const Structure s = read_pdb_file(structure_path("1ubi"));
  const FeatureConfig cfg = FeatureConfig::defaults();
  const auto base = compute_sasa(s, cfg, SasaFrame::Local);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const Structure moved = transformed(s, random_rotation(rng), random_translation(rng));
    const auto sasa = compute_sasa(moved, cfg, SasaFrame::Local);
    ASSERT_EQ(sasa.size(), base.size());
    double total = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < sasa.size(); ++i) {
      total += base[i];
      diff = std::max(diff, std::abs(sasa[i] - base[i]));
    }
    EXPECT_LE(diff, 1e-6 * std::max(1.0, total / static_cast<double>(base.size())));
  }
}

TEST(Sasa, ResidueSumsAtoms) {
  const Structure s = leading_residues("1ubi", 10);
  const auto atom = compute_sasa(s, FeatureConfig::defaults());
  const auto res = residue_sasa(s, atom);
  s.for_each_residue([&](const Residue& r) {
    double sum = 0.0;
    for (const auto& a : r.atoms) sum += atom[a.index];
    EXPECT_NEAR(res[r.index], sum, 1e-12);
  });
}

TEST(Rsa, Examples) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const double ala = cfg.max_asa_for("ALA");
  EXPECT_DOUBLE_EQ(ala, 129.0);
  EXPECT_DOUBLE_EQ(compute_rsa(0.0, "ALA", cfg), 0.0);
  EXPECT_DOUBLE_EQ(compute_rsa(ala, "ALA", cfg), 1.0);
  EXPECT_DOUBLE_EQ(compute_rsa(0.5 * ala, "ALA", cfg), 0.5);
  EXPECT_DOUBLE_EQ(compute_rsa(3.0 * ala, "ALA", cfg), 1.0);
  double mean = 0.0;
  for (const auto& [name, v] : cfg.max_asa) mean += v;
  mean /= static_cast<double>(cfg.max_asa.size());
  EXPECT_NEAR(compute_rsa(0.5 * mean, "XYZ", cfg), 0.5, 1e-12);
}

TEST(Rsa, AlwaysInUnitInterval) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const Structure s = read_pdb_file(structure_path("1ejg"));
  for (double v : residue_rsa(s, compute_sasa(s, cfg), cfg)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(FeatureConfigTest, DimensionAndValidation) {
  FeatureConfig cfg = FeatureConfig::defaults();
  EXPECT_EQ(cfg.dimension(),
            cfg.element_vocab.size() + cfg.residue_vocab.size() + cfg.atom_name_vocab.size() + 8 + 1);
  EXPECT_EQ(cfg.residue_vocab.size(), 21u);
  EXPECT_EQ(cfg.residue_vocab.back(), "UNK");
  EXPECT_EQ(cfg.element_vocab.back(), "other");
  EXPECT_NO_THROW(cfg.validate());

  FeatureConfig dup = cfg;
  dup.element_vocab.insert(dup.element_vocab.begin(), "C");
  EXPECT_THROW(dup.validate(), Error);
  FeatureConfig probe = cfg;
  probe.probe_radius = 0.0;
  EXPECT_THROW(probe.validate(), Error);
  FeatureConfig points = cfg;
  points.sphere_points = 0;
  EXPECT_THROW(points.validate(), Error);
}

TEST(FeatureConfigTest, JsonRoundTripKeepsHash) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const FeatureConfig back = FeatureConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.content_hash(), cfg.content_hash());
  FeatureConfig changed = cfg;
  changed.atom_name_vocab.insert(changed.atom_name_vocab.end() - 1, "ZZ9");
  EXPECT_NE(changed.content_hash(), cfg.content_hash());
}

TEST(Encoding, AlanineAlphaCarbonLayout) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const Structure s = make_structure({make_residue(
      'A', 1, "ALA",
      {make_atom(1, "N", "N", Vec3(0, 0, 0)), make_atom(2, "CA", "C", Vec3(1.46, 0, 0)),
       make_atom(3, "C", "C", Vec3(2.0, 1.4, 0)), make_atom(4, "O", "O", Vec3(1.3, 2.4, 0))})});
  const std::vector<SecondaryStructure> ss{SecondaryStructure::H};
  const std::vector<double> rsa{0.25};
  const NodeFeatures f = encode_node_features(s, ss, rsa, cfg);
  ASSERT_EQ(f.dim, cfg.dimension());
  const std::size_t ca = 1;
  for (std::size_t j = 0; j < f.dim; ++j) {
    double expected = 0.0;
    if (j == cfg.element_offset() + cfg.element_slot("C")) expected = 1.0;
    if (j == cfg.residue_offset() + 0) expected = 1.0;
    if (j == cfg.atom_name_offset() + cfg.atom_name_slot("CA")) expected = 1.0;
    if (j == cfg.ss_offset() + 0) expected = 1.0;
    if (j == f.dim - 1) expected = 0.25;
    EXPECT_EQ(f.at(ca, j), expected) << j;
  }
  EXPECT_EQ(cfg.residue_vocab[0], "ALA");
  EXPECT_NE(cfg.atom_name_slot("CA"), cfg.atom_name_vocab.size() - 1);
}

TEST(Encoding, SelenomethionineUsesSeleniumAndUnk) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const Structure s = make_structure(
      {make_residue('A', 1, "MSE", {make_atom(1, "SE", "SE", Vec3(0, 0, 0))}, true)});
  const std::vector<SecondaryStructure> ss{SecondaryStructure::C};
  const std::vector<double> rsa{1.0};
  const NodeFeatures f = encode_node_features(s, ss, rsa, cfg);
  const std::size_t se = cfg.element_slot("SE");
  EXPECT_EQ(cfg.element_vocab[se], "SE");
  EXPECT_EQ(f.at(0, cfg.element_offset() + se), 1.0);
  EXPECT_EQ(f.at(0, cfg.residue_offset() + cfg.residue_vocab.size() - 1), 1.0);

  FeatureConfig no_se = cfg;
  no_se.element_vocab.erase(no_se.element_vocab.begin() + static_cast<long>(se));
  const NodeFeatures g = encode_node_features(s, ss, rsa, no_se);
  EXPECT_EQ(g.at(0, no_se.element_offset() + no_se.element_vocab.size() - 1), 1.0);
}

TEST(Encoding, EveryRowHasFourOnesAndBoundedRsa) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const Structure s = read_pdb_file(structure_path("1ejg"));
  const NodeFeatures f = compute_node_features(s, cfg);
  ASSERT_EQ(f.atom_count, s.atom_count());
  for (std::size_t i = 0; i < f.atom_count; ++i) {
    int ones = 0;
    for (std::size_t j = 0; j < cfg.rsa_offset(); ++j) {
      const double v = f.at(i, j);
      ASSERT_TRUE(v == 0.0 || v == 1.0);
      ones += v == 1.0;
    }
    EXPECT_EQ(ones, 4) << i;
    const auto block_sum = [&](std::size_t from, std::size_t to) {
      double sum = 0.0;
      for (std::size_t j = from; j < to; ++j) sum += f.at(i, j);
      return sum;
    };
    EXPECT_EQ(block_sum(cfg.element_offset(), cfg.residue_offset()), 1.0);
    EXPECT_EQ(block_sum(cfg.residue_offset(), cfg.atom_name_offset()), 1.0);
    EXPECT_EQ(block_sum(cfg.atom_name_offset(), cfg.ss_offset()), 1.0);
    EXPECT_EQ(block_sum(cfg.ss_offset(), cfg.rsa_offset()), 1.0);
    EXPECT_GE(f.at(i, cfg.rsa_offset()), 0.0);
    EXPECT_LE(f.at(i, cfg.rsa_offset()), 1.0);
  }
}

TEST(Encoding, IdenticalEnvironmentsGiveIdenticalRows) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const Structure s = leading_residues("1ubi", 20);
  const NodeFeatures a = compute_node_features(s, cfg);
  const NodeFeatures b = compute_node_features(s, cfg);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.config_hash, cfg.content_hash());
}

TEST(Encoding, DimensionMismatchAndShapeErrors) {
  const FeatureConfig cfg = FeatureConfig::defaults();
  const Structure s = leading_residues("1ubi", 3);
  try {
    compute_node_features(s, cfg, SasaFrame::Global, cfg.dimension() + 1);
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  const std::vector<SecondaryStructure> ss(2, SecondaryStructure::C);
  const std::vector<double> rsa(3, 0.0);
  try {
    encode_node_features(s, ss, rsa, cfg);
    FAIL() << "expected ShapeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(HBond, MatchesElectrostaticFormula) {
  const Vec3 n(0, 0, 0), h(1.01, 0, 0), o(2.9, 0.2, 0), c(4.1, 0.3, 0);
  const double expected =
      0.084 * 332.0 * (1.0 / (o - n).norm() + 1.0 / (c - h).norm() - 1.0 / (o - h).norm() - 1.0 / (c - n).norm());
  EXPECT_NEAR(hbond_energy(n, h, c, o), expected, 1e-12);
  EXPECT_LT(expected, kHBondThreshold);
  const Vec3 far(30, 0, 0);
  EXPECT_GT(hbond_energy(n, h, far, far + Vec3(1.23, 0, 0)), kHBondThreshold);
}

TEST(Dssp, IsolatedDipeptideIsCoil) {
  const Structure s = leading_residues("1ubi", 2);
  const auto ss = assign_secondary_structure(s);
  ASSERT_EQ(ss.size(), 2u);
  for (auto c : ss) EXPECT_EQ(c, SecondaryStructure::C);
}

TEST(Dssp, MissingBackboneIsCoil) {
  const Structure s = make_structure({make_residue('A', 1, "GLY", {make_atom(1, "CA", "C", Vec3::Zero())})});
  EXPECT_EQ(assign_secondary_structure(s)[0], SecondaryStructure::C);
}

TEST(Dssp, IdealHelixInteriorIsHelix) {
  const Structure s = read_pdb_file(source_path("tests/data/ideal_helix.pdb"));
  ASSERT_EQ(s.residue_count(), 12u);
  const auto ss = assign_secondary_structure(s);
  for (std::size_t i = 2; i < 10; ++i) EXPECT_EQ(ss_letter(ss[i]), 'H') << i + 1;
  EXPECT_EQ(dssp_agreement(s, read_dssp_reference(source_path("tests/data/ideal_helix.dssp.txt"))), 1.0);
}

TEST(Dssp, IdealSheetInteriorIsStrand) {
  const Structure s = read_pdb_file(source_path("tests/data/ideal_sheet.pdb"));
  const auto ref = read_dssp_reference(source_path("tests/data/ideal_sheet.dssp.txt"));
  const auto ss = assign_secondary_structure(s);
  std::size_t strands = 0;
  s.for_each_residue([&](const Residue& r) {
    const char want = ref.at({r.chain_id, r.residue_id, r.insertion_code});
    if (want == 'E') {
      ++strands;
      EXPECT_EQ(ss_letter(ss[r.index]), 'E') << r.chain_id << r.residue_id;
    }
  });
  EXPECT_GE(strands, 6u);
  EXPECT_EQ(dssp_agreement(s, ref), 1.0);
}

TEST(Dssp, AgreesWithReferenceOnRealStructures) {
  for (const std::string id : {"1ubi", "1ejg", "1ake"}) {
    const Structure s = read_pdb_file(structure_path(id));
    std::size_t n = 0;
    const double agree = dssp_agreement(s, read_dssp_reference(source_path("tests/data/" + id + ".dssp.txt")), &n);
    EXPECT_GT(n, 40u) << id;
    EXPECT_GE(agree, 0.80) << id;
  }
}

TEST(Dssp, RigidMotionInvariant) {
  const Structure s = read_pdb_file(structure_path("1ubi"));
  const auto base = assign_secondary_structure(s);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t)
    EXPECT_EQ(assign_secondary_structure(transformed(s, random_rotation(rng), random_translation(rng))), base);
}
