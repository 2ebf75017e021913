#pragma once

// Serial-chain kinematics of the four moving bodies (upper shank + shank,
// lower shank, foot frame, foot plate + foot).
//
// Coordinates are ordered (theta, phi, alpha, psi):
//   theta  knee flexion/extension about i_a,        positive = extension
//   phi    abduction/adduction about k_b,           positive = adduction
//   alpha  plantar/dorsiflexion about i_c,          positive = dorsiflexion
//   psi    supination/pronation about j_d,          positive = supination
// World frame F has its origin at the knee point O, z up along the shank at
// the zero configuration and y pointing forward (toward the toes).
//
// Everything is templated on the scalar so the same code runs on complex
// numbers for complex-step differentiation.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace limbdyn {

template <typename S>
using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Rot3T = Eigen::Matrix<S, 3, 3>;
template <typename S>
using Vec4T = Eigen::Matrix<S, 4, 1>;

using Vec3 = Vec3T<double>;
using Rot3 = Rot3T<double>;
using Vec4 = Vec4T<double>;
using Mat4 = Eigen::Matrix4d;

enum class Axis { X, Y, Z };

enum Coord : std::size_t { kTheta = 0, kPhi = 1, kAlpha = 2, kPsi = 3 };
inline constexpr std::array<std::string_view, 4> kCoordNames = {"theta", "phi", "alpha", "psi"};

enum BodyIndex : std::size_t { kUpperShank = 0, kLowerShank = 1, kFootFrame = 2, kFootPlate = 3 };
inline constexpr std::array<std::string_view, 4> kBodyNames = {"us-s", "ls", "ff", "fp-f"};

/// How COM velocities are formed. `exact` differentiates the chain;
/// `knee_lever` uses omega x R^{OC} about the knee for every body, which
/// is only exact for bodies whose joint axes pass through O.
enum class VelocityMode { exact, knee_lever };

template <typename S>
struct GeneralizedStateT {
  Vec4T<S> q = Vec4T<S>::Zero();
  Vec4T<S> qd = Vec4T<S>::Zero();
};
using GeneralizedState = GeneralizedStateT<double>;

template <typename S>
using BodyVectors = std::array<Vec3T<S>, 4>;

template <typename S>
Rot3T<S> rot_axis(Axis axis, S angle) {
  using std::cos;
  using std::sin;
  const S c = cos(angle);
  const S s = sin(angle);
  const S one(1.0);
  const S zero(0.0);
  Rot3T<S> r;
  switch (axis) {
    case Axis::X:
      r << one, zero, zero, zero, c, -s, zero, s, c;
      break;
    case Axis::Y:
      r << c, zero, s, zero, one, zero, -s, zero, c;
      break;
    case Axis::Z:
      r << c, -s, zero, s, c, zero, zero, zero, one;
      break;
  }
  return r;
}

/// Plain cross product; Eigen's cross() conjugates for complex scalars,
/// which would break complex-step derivatives.
template <typename S>
Vec3T<S> cross(const Vec3T<S>& a, const Vec3T<S>& b) {
  return Vec3T<S>(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

/// R_A = Rx(theta), R_B = R_A Rz(phi), R_C = R_B Rx(alpha), R_D = R_C Ry(psi).
template <typename S>
std::array<Rot3T<S>, 4> chain_rotations(const Vec4T<S>& q) {
  std::array<Rot3T<S>, 4> r;
  r[kUpperShank] = rot_axis<S>(Axis::X, q[kTheta]);
  r[kLowerShank] = r[kUpperShank] * rot_axis<S>(Axis::Z, q[kPhi]);
  r[kFootFrame] = r[kLowerShank] * rot_axis<S>(Axis::X, q[kAlpha]);
  r[kFootPlate] = r[kFootFrame] * rot_axis<S>(Axis::Y, q[kPsi]);
  return r;
}

/// World-frame joint axes (i_a, k_b, i_c, j_d).
template <typename S>
BodyVectors<S> joint_axes(const std::array<Rot3T<S>, 4>& r) {
  return {Vec3T<S>(r[kUpperShank].col(0)), Vec3T<S>(r[kLowerShank].col(2)),
          Vec3T<S>(r[kFootFrame].col(0)), Vec3T<S>(r[kFootPlate].col(1))};
}

template <typename S>
BodyVectors<S> angular_velocities(const Vec4T<S>& q, const Vec4T<S>& qd) {
  const BodyVectors<S> e = joint_axes<S>(chain_rotations<S>(q));
  BodyVectors<S> w;
  w[kUpperShank] = qd[kTheta] * e[0];
  w[kLowerShank] = w[kUpperShank] + qd[kPhi] * e[1];
  w[kFootFrame] = w[kLowerShank] + qd[kAlpha] * e[2];
  w[kFootPlate] = w[kFootFrame] + qd[kPsi] * e[3];
  return w;
}

/// Body-fixed COM offsets. 'us-s' and 'ls' are measured from the knee point
/// O; 'ff' and 'fp-f' from the ankle point, which sits on the shank axis
/// shank_length below O.
struct ChainGeometry {
  double shank_length = 0.418;
  std::array<Vec3, 4> com_offsets{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

  Vec3 ankle_point_body() const { return Vec3(0.0, 0.0, -shank_length); }

  /// Builds offsets from zero-configuration world COMs (knee origin).
  static ChainGeometry from_world_coms(double shank_length, const std::array<Vec3, 4>& com0) {
    ChainGeometry g;
    g.shank_length = shank_length;
    const Vec3 ankle(0.0, 0.0, -shank_length);
    g.com_offsets[kUpperShank] = com0[kUpperShank];
    g.com_offsets[kLowerShank] = com0[kLowerShank];
    g.com_offsets[kFootFrame] = com0[kFootFrame] - ankle;
    g.com_offsets[kFootPlate] = com0[kFootPlate] - ankle;
    return g;
  }
};

template <typename S>
Vec3T<S> ankle_point(const std::array<Rot3T<S>, 4>& r, const ChainGeometry& geom) {
  return r[kUpperShank] * geom.ankle_point_body().cast<S>();
}

template <typename S>
BodyVectors<S> com_positions(const Vec4T<S>& q, const ChainGeometry& geom) {
  const auto r = chain_rotations<S>(q);
  const Vec3T<S> ankle = ankle_point<S>(r, geom);
  BodyVectors<S> p;
  p[kUpperShank] = r[kUpperShank] * geom.com_offsets[kUpperShank].cast<S>();
  p[kLowerShank] = r[kLowerShank] * geom.com_offsets[kLowerShank].cast<S>();
  p[kFootFrame] = ankle + r[kFootFrame] * geom.com_offsets[kFootFrame].cast<S>();
  p[kFootPlate] = ankle + r[kFootPlate] * geom.com_offsets[kFootPlate].cast<S>();
  return p;
}

template <typename S>
BodyVectors<S> com_velocities(const Vec4T<S>& q, const Vec4T<S>& qd, const ChainGeometry& geom,
                              VelocityMode mode = VelocityMode::exact) {
  const auto r = chain_rotations<S>(q);
  const BodyVectors<S> w = angular_velocities<S>(q, qd);
  const BodyVectors<S> p = com_positions<S>(q, geom);
  BodyVectors<S> v;
  // Both shank bodies pivot about O, so the two modes coincide for them.
  v[kUpperShank] = cross<S>(w[kUpperShank], p[kUpperShank]);
  v[kLowerShank] = cross<S>(w[kLowerShank], p[kLowerShank]);
  if (mode == VelocityMode::knee_lever) {
    v[kFootFrame] = cross<S>(w[kFootFrame], p[kFootFrame]);
    v[kFootPlate] = cross<S>(w[kFootPlate], p[kFootPlate]);
    return v;
  }
  const Vec3T<S> ankle = ankle_point<S>(r, geom);
  const Vec3T<S> ankle_vel = cross<S>(w[kUpperShank], ankle);
  v[kFootFrame] = ankle_vel + cross<S>(w[kFootFrame], p[kFootFrame] - ankle);
  v[kFootPlate] = ankle_vel + cross<S>(w[kFootPlate], p[kFootPlate] - ankle);
  return v;
}

/// Partial velocities: column j of `linear[b]` is dV_b/dqd_j, likewise for
/// `angular[b]`. Velocities are linear in the rates, so unit-rate evaluation
/// gives the Jacobians exactly.
template <typename S>
struct BodyJacobiansT {
  std::array<Eigen::Matrix<S, 3, 4>, 4> linear;
  std::array<Eigen::Matrix<S, 3, 4>, 4> angular;
};
using BodyJacobians = BodyJacobiansT<double>;

template <typename S>
BodyJacobiansT<S> body_jacobians(const Vec4T<S>& q, const ChainGeometry& geom,
                                 VelocityMode mode = VelocityMode::exact) {
  BodyJacobiansT<S> jac;
  for (std::size_t j = 0; j < 4; ++j) {
    Vec4T<S> unit = Vec4T<S>::Zero();
    unit[j] = S(1.0);
    const auto w = angular_velocities<S>(q, unit);
    const auto v = com_velocities<S>(q, unit, geom, mode);
    for (std::size_t b = 0; b < 4; ++b) {
      jac.angular[b].col(j) = w[b];
      jac.linear[b].col(j) = v[b];
    }
  }
  return jac;
}

}  // namespace limbdyn
