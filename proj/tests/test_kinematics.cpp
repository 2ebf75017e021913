#include <random>

#include <gtest/gtest.h>

#include "limbdyn/reference_data.hpp"

using namespace limbdyn;

namespace {

ChainGeometry reference_geometry() { return reference_model().geometry(); }

Vec4 random_rom_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> theta(0.0, deg_to_rad(120.0));
  std::uniform_real_distribution<double> phi(-deg_to_rad(40.0), deg_to_rad(40.0));
  std::uniform_real_distribution<double> alpha(-deg_to_rad(40.0), deg_to_rad(40.0));
  std::uniform_real_distribution<double> psi(-deg_to_rad(40.0), deg_to_rad(40.0));
  return Vec4(theta(rng), phi(rng), alpha(rng), psi(rng));
}

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x(), b.x(), tol);
  EXPECT_NEAR(a.y(), b.y(), tol);
  EXPECT_NEAR(a.z(), b.z(), tol);
}

}  // namespace

TEST(RotAxis, ZeroAngleIsIdentity) {
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    EXPECT_EQ(rot_axis<double>(a, 0.0), Rot3::Identity());
  }
}

TEST(RotAxis, QuarterTurnsByHand) {
  expect_vec_near(rot_axis<double>(Axis::Y, kPi / 2) * Vec3(0, 0, -0.1), Vec3(-0.1, 0, 0), 1e-15);
  expect_vec_near(rot_axis<double>(Axis::Z, kPi / 2) * Vec3(0.1, 0, 0), Vec3(0, 0.1, 0), 1e-15);
  expect_vec_near(rot_axis<double>(Axis::X, kPi / 2) * Vec3(0, 0.1, 0), Vec3(0, 0, 0.1), 1e-15);
}

TEST(ChainRotations, ZeroConfiguration) {
  for (const auto& r : chain_rotations<double>(Vec4::Zero())) EXPECT_EQ(r, Rot3::Identity());
}

TEST(ChainRotations, KneeOnly) {
  const auto r = chain_rotations<double>(Vec4(kPi / 2, 0, 0, 0));
  const Rot3 rx = rot_axis<double>(Axis::X, kPi / 2);
  for (const auto& m : r) EXPECT_TRUE(m.isApprox(rx, 1e-15));
}

TEST(ChainRotations, AbductionOnly) {
  const auto r = chain_rotations<double>(Vec4(0, kPi / 2, 0, 0));
  EXPECT_EQ(r[kUpperShank], Rot3::Identity());
  EXPECT_TRUE(r[kLowerShank].isApprox(rot_axis<double>(Axis::Z, kPi / 2), 1e-15));
}

TEST(ChainRotations, OrthonormalAcrossRom) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    for (const auto& r : chain_rotations<double>(random_rom_state(rng))) {
      EXPECT_LT((r.transpose() * r - Rot3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    }
  }
}

TEST(AngularVelocities, ZeroRates) {
  for (const auto& w : angular_velocities<double>(Vec4(0.3, 0.2, -0.1, 0.4), Vec4::Zero())) {
    EXPECT_EQ(w, Vec3::Zero());
  }
}

TEST(AngularVelocities, KneeRateAtZero) {
  for (const auto& w : angular_velocities<double>(Vec4::Zero(), Vec4(1, 0, 0, 0))) EXPECT_EQ(w, Vec3(1, 0, 0));
}

TEST(AngularVelocities, AbductionRateAtZero) {
  const auto w = angular_velocities<double>(Vec4::Zero(), Vec4(0, 1, 0, 0));
  EXPECT_EQ(w[kUpperShank], Vec3::Zero());
  for (std::size_t b = kLowerShank; b <= kFootPlate; ++b) EXPECT_EQ(w[b], Vec3(0, 0, 1));
}

TEST(AngularVelocities, LinearInRates) {
  const Vec4 q(0.4, -0.2, 0.3, 0.1);
  const Vec4 qd(0.7, -1.1, 0.5, 2.0);
  const auto w1 = angular_velocities<double>(q, qd);
  const auto w2 = angular_velocities<double>(q, Vec4(2.0 * qd));
  for (std::size_t b = 0; b < 4; ++b) expect_vec_near(w2[b], 2.0 * w1[b], 1e-14);
}

TEST(ComPositions, ZeroConfigurationReproducesTable) {
  const SystemModel m = reference_model();
  const auto p = com_positions<double>(Vec4::Zero(), m.geometry());
  for (std::size_t b = 0; b < 4; ++b) expect_vec_near(p[b], m.links[b].com0, 1e-15);
}

TEST(ComPositions, KneeQuarterTurn) {
  const auto p = com_positions<double>(Vec4(kPi / 2, 0, 0, 0), reference_geometry());
  expect_vec_near(p[kUpperShank], Vec3(0.021, 0.147, 0.008), 1e-15);
}

TEST(ComPositions, AnklePointFixedUnderAbduction) {
  const ChainGeometry g = reference_geometry();
  for (double phi : {-0.5, 0.2, 1.0}) {
    const auto r = chain_rotations<double>(Vec4(0, phi, 0, 0));
    expect_vec_near(ankle_point<double>(r, g), Vec3(0, 0, -g.shank_length), 1e-15);
  }
}

TEST(ComPositions, RigidDistancesPreserved) {
  const ChainGeometry g = reference_geometry();
  const auto p0 = com_positions<double>(Vec4::Zero(), g);
  const Vec3 ankle0(0, 0, -g.shank_length);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec4 q = random_rom_state(rng);
    const auto p = com_positions<double>(q, g);
    const Vec3 ankle = ankle_point<double>(chain_rotations<double>(q), g);
    EXPECT_NEAR(p[kUpperShank].norm(), p0[kUpperShank].norm(), 1e-12);
    EXPECT_NEAR(p[kLowerShank].norm(), p0[kLowerShank].norm(), 1e-12);
    EXPECT_NEAR((p[kFootFrame] - ankle).norm(), (p0[kFootFrame] - ankle0).norm(), 1e-12);
    EXPECT_NEAR((p[kFootPlate] - ankle).norm(), (p0[kFootPlate] - ankle0).norm(), 1e-12);
  }
}

TEST(ComVelocities, ZeroRates) {
  for (const auto& v : com_velocities<double>(Vec4(0.1, 0.2, 0.3, 0.4), Vec4::Zero(), reference_geometry())) {
    EXPECT_EQ(v, Vec3::Zero());
  }
}

TEST(ComVelocities, ExactMatchesCentralDifferences) {
  const ChainGeometry g = reference_geometry();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rate(-2.0, 2.0);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Vec4 q = random_rom_state(rng);
    const Vec4 qd(rate(rng), rate(rng), rate(rng), rate(rng));
    const auto v = com_velocities<double>(q, qd, g);
    const auto pp = com_positions<double>(Vec4(q + h * qd), g);
    const auto pm = com_positions<double>(Vec4(q - h * qd), g);
    for (std::size_t b = 0; b < 4; ++b) {
      const Vec3 fd = (pp[b] - pm[b]) / (2 * h);
      EXPECT_LT((fd - v[b]).norm(), 1e-6 * std::max(1.0, v[b].norm())) << "body " << b;
    }
  }
}

TEST(ComVelocities, ModesAgreeForShankBodies) {
  const ChainGeometry g = reference_geometry();
  const Vec4 q(0.5, -0.3, 0.2, 0.4);
  const Vec4 qd(1.0, -0.5, 0.8, -1.2);
  const auto a = com_velocities<double>(q, qd, g, VelocityMode::exact);
  const auto b = com_velocities<double>(q, qd, g, VelocityMode::knee_lever);
  EXPECT_EQ(a[kUpperShank], b[kUpperShank]);
  EXPECT_EQ(a[kLowerShank], b[kLowerShank]);
  // Foot bodies pivot about the ankle, so the knee-origin form differs.
  EXPECT_GT((a[kFootFrame] - b[kFootFrame]).norm(), 1e-3);
}

TEST(BodyJacobians, ReproduceVelocities) {
  const ChainGeometry g = reference_geometry();
  const Vec4 q(0.2, 0.1, -0.3, 0.25);
  const Vec4 qd(0.3, -0.6, 1.1, 0.4);
  const auto jac = body_jacobians<double>(q, g);
  const auto v = com_velocities<double>(q, qd, g);
  const auto w = angular_velocities<double>(q, qd);
  for (std::size_t b = 0; b < 4; ++b) {
    expect_vec_near(jac.linear[b] * qd, v[b], 1e-14);
    expect_vec_near(jac.angular[b] * qd, w[b], 1e-14);
  }
}
