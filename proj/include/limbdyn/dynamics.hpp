#pragma once

// Lagrangian dynamics of the four-body leg + robot system.
//
// Equations of motion are written as  M(q) qdd + b(q, qd) = Q,  where b
// collects velocity-product terms plus the gradient of the potential
// (gravity and passive springs), and Q holds the applied torques and the
// knee damper projected onto the coordinates.

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "limbdyn/errors.hpp"
#include "limbdyn/kinematics.hpp"

namespace limbdyn {

struct RigidLink {
  std::string name;
  double mass = 0.0;                                  // kg
  Vec3 com0 = Vec3::Zero();                           // m, world COM at q = 0
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();  // kg·m² about the COM, body axes

  void validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("link '" + name + "': mass must be positive");
    if (!com0.allFinite() || !inertia.allFinite()) throw ConfigError("link '" + name + "': non-finite data");
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 0.0) {
      throw ConfigError("link '" + name + "': inertia must be symmetric");
    }
    const Eigen::Vector3d d = inertia.diagonal();
    if (!(d.array() > 0.0).all()) throw ConfigError("link '" + name + "': inertia diagonal must be positive");
  }

  /// Principal-moment triangle inequality. Reported, not enforced: the
  /// tabulated 'ff' tensor (120, 40, 190 kg·cm²) fails it.
  bool satisfies_triangle_inequality() const {
    const Eigen::Vector3d d = inertia.diagonal();
    return d[0] + d[1] >= d[2] && d[1] + d[2] >= d[0] && d[0] + d[2] >= d[1];
  }
};

/// Symmetric tensor from diagonal moments and the three off-diagonal entries.
inline Eigen::Matrix3d inertia_tensor(double xx, double yy, double zz, double xy, double xz, double yz) {
  Eigen::Matrix3d i;
  i << xx, xy, xz, xy, yy, yz, xz, yz, zz;
  return i;
}

/// K(q) = c4 q^4 + c3 q^3 + c2 q^2 + c1 q + c0 in Nm/rad.
struct StiffnessPolynomial {
  std::string joint;
  std::array<double, 5> coeffs{};  // c4, c3, c2, c1, c0

  static constexpr double kValidRange = 0.7;  // rad

  template <typename S>
  S evaluate_unchecked(S q) const {
    S k(coeffs[0]);
    for (std::size_t i = 1; i < coeffs.size(); ++i) k = k * q + S(coeffs[i]);
    return k;
  }

  double stiffness(double q) const {
    check(q);
    return evaluate_unchecked(q);
  }

  /// Elastic torque K(q)·q (the generalized force is its negative).
  double torque(double q) const { return stiffness(q) * q; }

  /// Closed-form ∫₀^q K(t)·t dt.
  double energy(double q) const {
    check(q);
    const auto& c = coeffs;
    const double q2 = q * q;
    return q2 * (c[4] / 2.0 + q * (c[3] / 3.0 + q * (c[2] / 4.0 + q * (c[1] / 5.0 + q * (c[0] / 6.0)))));
  }

  /// Positivity on ±0.6 rad, sampled every milliradian.
  void validate() const {
    for (int i = -600; i <= 600; ++i) {
      const double q = i * 1e-3;
      if (!(evaluate_unchecked(q) > 0.0)) {
        throw ConfigError("stiffness polynomial for " + joint + " is not positive on [-0.6, 0.6] rad");
      }
    }
  }

 private:
  void check(double q) const {
    if (!(std::abs(q) <= kValidRange)) {
      throw RangeError("stiffness fit for " + joint + " evaluated at " + std::to_string(q) +
                       " rad, outside ±0.7 rad");
    }
  }
};

struct PassiveJointSet {
  double knee_stiffness = 3.58;  // Nm/rad
  double knee_damping = 0.1;     // Nm·s/rad
  StiffnessPolynomial k_alpha{"alpha", {313.9, 203.2, 59.3, 13.8, 6.6}};
  StiffnessPolynomial k_phi{"phi", {3163.5, -554.7, -112.5, 7.3, 7.6}};
  StiffnessPolynomial k_psi{"psi", {5010.1, -1739.5, 402.1, -17.1, 11.2}};
  bool springs_enabled = true;

  void validate() const {
    if (!(knee_stiffness > 0.0)) throw ConfigError("knee_stiffness must be positive");
    if (!(knee_damping > 0.0)) throw ConfigError("knee_damping must be positive");
    k_alpha.validate();
    k_phi.validate();
    k_psi.validate();
  }
};

struct TorqueSet {
  double theta = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
  double psi = 0.0;  // torque produced by the foot about the S/P axis

  Vec4 vector() const { return Vec4(theta, phi, alpha, psi); }
  static TorqueSet from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct SystemModel {
  std::array<RigidLink, 4> links;
  double shank_length = 0.418;
  PassiveJointSet passive;
  double gravity = 9.81;  // along -k_f
  VelocityMode velocity_mode = VelocityMode::exact;

  ChainGeometry geometry() const {
    return ChainGeometry::from_world_coms(
        shank_length, {links[0].com0, links[1].com0, links[2].com0, links[3].com0});
  }

  /// Non-fatal data problems.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (const auto& l : links) {
      if (!l.satisfies_triangle_inequality()) {
        out.push_back("link '" + l.name + "': inertia diagonal violates the triangle inequality");
      }
    }
    return out;
  }

  void validate() const {
    for (const auto& l : links) l.validate();
    if (!(shank_length > 0.0)) throw ConfigError("shank_length must be positive");
    if (!std::isfinite(gravity)) throw ConfigError("gravity must be finite");
    passive.validate();
  }
};

// ---------------------------------------------------------------------------
// Energies

inline double kinetic_energy(const SystemModel& model, const GeneralizedState& s) {
  const ChainGeometry geom = model.geometry();
  const auto r = chain_rotations<double>(s.q);
  const auto w = angular_velocities<double>(s.q, s.qd);
  const auto v = com_velocities<double>(s.q, s.qd, geom, model.velocity_mode);
  double ke = 0.0;
  for (std::size_t b = 0; b < 4; ++b) {
    const Eigen::Matrix3d iw = r[b] * model.links[b].inertia * r[b].transpose();
    ke += 0.5 * model.links[b].mass * v[b].squaredNorm() + 0.5 * w[b].dot(iw * w[b]);
  }
  return ke;
}

inline double gravity_potential(const SystemModel& model, const Vec4& q) {
  const auto p = com_positions<double>(q, model.geometry());
  double pe = 0.0;
  for (std::size_t b = 0; b < 4; ++b) pe += model.links[b].mass * model.gravity * p[b].z();
  return pe;
}

inline double elastic_potential(const PassiveJointSet& passive, const Vec4& q) {
  if (!passive.springs_enabled) return 0.0;
  return 0.5 * passive.knee_stiffness * q[kTheta] * q[kTheta] + passive.k_phi.energy(q[kPhi]) +
         passive.k_alpha.energy(q[kAlpha]) + passive.k_psi.energy(q[kPsi]);
}

inline double potential_energy(const SystemModel& model, const Vec4& q) {
  return gravity_potential(model, q) + elastic_potential(model.passive, q);
}

/// dPE/dq, analytic.
inline Vec4 potential_gradient(const SystemModel& model, const Vec4& q) {
  // Positions are always the true chain positions, so gravity uses the exact
  // partial velocities whatever the kinetic-energy mode is.
  const BodyJacobians jac = body_jacobians<double>(q, model.geometry(), VelocityMode::exact);
  Vec4 g = Vec4::Zero();
  for (std::size_t b = 0; b < 4; ++b) {
    g += model.links[b].mass * model.gravity * jac.linear[b].row(2).transpose();
  }
  const PassiveJointSet& p = model.passive;
  if (p.springs_enabled) {
    g[kTheta] += p.knee_stiffness * q[kTheta];
    g[kPhi] += p.k_phi.torque(q[kPhi]);
    g[kAlpha] += p.k_alpha.torque(q[kAlpha]);
    g[kPsi] += p.k_psi.torque(q[kPsi]);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Generalized forces

/// Projects the motor torques, their reactions and the knee damper through
/// the partial angular velocities of the bodies they act on.
inline Vec4 generalized_forces(const GeneralizedState& s, const TorqueSet& applied, double knee_damping) {
  const auto e = joint_axes<double>(chain_rotations<double>(s.q));
  ChainGeometry unused;
  const BodyJacobians jac = body_jacobians<double>(s.q, unused);
  const double damper = -knee_damping * s.qd[kTheta];

  struct Load {
    Vec3 torque;
    std::size_t body;
  };
  const std::array<Load, 8> loads = {{
      {applied.theta * e[0], kUpperShank},
      {damper * e[0], kUpperShank},
      {applied.phi * e[1], kLowerShank},
      {-applied.phi * e[1], kUpperShank},
      {applied.alpha * e[2], kFootFrame},
      {-applied.alpha * e[2], kLowerShank},
      {applied.psi * e[3], kFootPlate},
      {-applied.psi * e[3], kFootFrame},
  }};
  Vec4 q = Vec4::Zero();
  for (const Load& l : loads) q += jac.angular[l.body].transpose() * l.torque;
  return q;
}

// ---------------------------------------------------------------------------
// Mass matrix and bias

template <typename S>
Eigen::Matrix<S, 4, 4> mass_matrix_t(const SystemModel& model, const Vec4T<S>& q) {
  const auto r = chain_rotations<S>(q);
  const BodyJacobiansT<S> jac = body_jacobians<S>(q, model.geometry(), model.velocity_mode);
  Eigen::Matrix<S, 4, 4> m = Eigen::Matrix<S, 4, 4>::Zero();
  for (std::size_t b = 0; b < 4; ++b) {
    const Rot3T<S> iw = r[b] * model.links[b].inertia.cast<S>() * r[b].transpose();
    m += S(model.links[b].mass) * jac.linear[b].transpose() * jac.linear[b];
    m += jac.angular[b].transpose() * iw * jac.angular[b];
  }
  return m;
}

inline Mat4 mass_matrix(const SystemModel& model, const Vec4& q) {
  Mat4 m = mass_matrix_t<double>(model, q);
  return 0.5 * (m + m.transpose());
}

/// Velocity-product terms from body accelerations at zero qdd (exact
/// velocity mode only).
inline Vec4 velocity_bias_recursive(const SystemModel& model, const GeneralizedState& s) {
  const ChainGeometry geom = model.geometry();
  const auto r = chain_rotations<double>(s.q);
  const auto e = joint_axes<double>(r);
  const auto w = angular_velocities<double>(s.q, s.qd);
  const auto p = com_positions<double>(s.q, geom);
  const Vec3 ankle = ankle_point<double>(r, geom);
  const BodyJacobians jac = body_jacobians<double>(s.q, geom, VelocityMode::exact);

  BodyVectors<double> dw;  // angular acceleration with qdd = 0
  dw[kUpperShank] = Vec3::Zero();
  dw[kLowerShank] = w[kUpperShank].cross(s.qd[kPhi] * e[1]);
  dw[kFootFrame] = dw[kLowerShank] + w[kLowerShank].cross(s.qd[kAlpha] * e[2]);
  dw[kFootPlate] = dw[kFootFrame] + w[kFootFrame].cross(s.qd[kPsi] * e[3]);

  auto about = [](const Vec3& alpha, const Vec3& omega, const Vec3& rel) -> Vec3 {
    return alpha.cross(rel) + omega.cross(omega.cross(rel));
  };
  BodyVectors<double> a;
  a[kUpperShank] = about(dw[kUpperShank], w[kUpperShank], p[kUpperShank]);
  a[kLowerShank] = about(dw[kLowerShank], w[kLowerShank], p[kLowerShank]);
  const Vec3 a_ankle = about(dw[kUpperShank], w[kUpperShank], ankle);
  a[kFootFrame] = a_ankle + about(dw[kFootFrame], w[kFootFrame], p[kFootFrame] - ankle);
  a[kFootPlate] = a_ankle + about(dw[kFootPlate], w[kFootPlate], p[kFootPlate] - ankle);

  Vec4 bias = Vec4::Zero();
  for (std::size_t b = 0; b < 4; ++b) {
    const Eigen::Matrix3d iw = r[b] * model.links[b].inertia * r[b].transpose();
    const Vec3 moment = iw * dw[b] + w[b].cross(iw * w[b]);
    bias += jac.linear[b].transpose() * (model.links[b].mass * a[b]) + jac.angular[b].transpose() * moment;
  }
  return bias;
}

/// dM/dq_k by complex-step differentiation (no subtractive cancellation).
inline std::array<Mat4, 4> mass_matrix_derivatives(const SystemModel& model, const Vec4& q) {
  using C = std::complex<double>;
  constexpr double h = 1e-30;
  std::array<Mat4, 4> d;
  for (std::size_t k = 0; k < 4; ++k) {
    Vec4T<C> qc = q.cast<C>();
    qc[k] += C(0.0, h);
    d[k] = mass_matrix_t<C>(model, qc).imag() / h;
  }
  return d;
}

/// Velocity-product terms from the Lagrangian directly:
/// b_i = sum_jk (dM_ij/dq_k - 1/2 dM_jk/dq_i) qd_j qd_k. Valid for both
/// velocity modes.
inline Vec4 velocity_bias_lagrangian(const SystemModel& model, const GeneralizedState& s) {
  const auto dm = mass_matrix_derivatives(model, s.q);
  Mat4 mdot = Mat4::Zero();
  for (std::size_t k = 0; k < 4; ++k) mdot += dm[k] * s.qd[k];
  Vec4 bias = mdot * s.qd;
  for (std::size_t i = 0; i < 4; ++i) bias[i] -= 0.5 * s.qd.dot(dm[i] * s.qd);
  return bias;
}

struct EquationsOfMotion {
  Mat4 mass;
  Vec4 bias;
};

inline EquationsOfMotion mass_matrix_and_bias(const SystemModel& model, const GeneralizedState& s) {
  const Vec4 vel = model.velocity_mode == VelocityMode::exact ? velocity_bias_recursive(model, s)
                                                              : velocity_bias_lagrangian(model, s);
  return {mass_matrix(model, s.q), vel + potential_gradient(model, s.q)};
}

// ---------------------------------------------------------------------------
// Inverse and forward dynamics

namespace detail {

/// Q = B T + Q_damper; B is the torque-to-coordinate projection.
struct ForceMap {
  Mat4 projection;
  Vec4 damper;
};

inline ForceMap force_map(const GeneralizedState& s, double knee_damping) {
  ForceMap f;
  for (std::size_t j = 0; j < 4; ++j) {
    Vec4 unit = Vec4::Zero();
    unit[j] = 1.0;
    f.projection.col(j) = generalized_forces({s.q, Vec4::Zero()}, TorqueSet::from_vector(unit), 0.0);
  }
  f.damper = generalized_forces(s, TorqueSet{}, knee_damping);
  return f;
}

}  // namespace detail

inline TorqueSet inverse_dynamics(const SystemModel& model, const GeneralizedState& s, const Vec4& qdd) {
  const EquationsOfMotion eom = mass_matrix_and_bias(model, s);
  const detail::ForceMap f = detail::force_map(s, model.passive.knee_damping);
  const Vec4 rhs = eom.mass * qdd + eom.bias - f.damper;
  return TorqueSet::from_vector(f.projection.partialPivLu().solve(rhs));
}

/// Unconstrained accelerations for a full torque set.
inline Vec4 forward_dynamics(const SystemModel& model, const GeneralizedState& s, const TorqueSet& applied) {
  const EquationsOfMotion eom = mass_matrix_and_bias(model, s);
  const Vec4 q = generalized_forces(s, applied, model.passive.knee_damping);
  return eom.mass.llt().solve(q - eom.bias);
}

struct MotorTorques {
  double theta = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
};

struct ConstrainedAccelerations {
  double theta_ddot = 0.0;
  double phi_ddot = 0.0;
  double alpha_ddot = 0.0;
  double psi_torque = 0.0;

  Vec4 qdd(double coupling) const { return Vec4(theta_ddot, phi_ddot, alpha_ddot, coupling * phi_ddot); }
};

inline constexpr double kConstraintTolerance = 1e-9;

/// Imposes psi = c·phi and solves for the three free accelerations together
/// with the S/P torque that maintains the constraint.
inline ConstrainedAccelerations forward_dynamics_constrained(const SystemModel& model, const GeneralizedState& s,
                                                             const MotorTorques& motors, double coupling) {
  if (std::abs(s.q[kPsi] - coupling * s.q[kPhi]) > kConstraintTolerance ||
      std::abs(s.qd[kPsi] - coupling * s.qd[kPhi]) > kConstraintTolerance) {
    throw ConsistencyError("state violates psi = c·phi (or its rate) beyond 1e-9");
  }
  const EquationsOfMotion eom = mass_matrix_and_bias(model, s);
  const detail::ForceMap f = detail::force_map(s, model.passive.knee_damping);

  // Unknowns x = (theta_dd, phi_dd, alpha_dd, T_psi):
  //   M [x0, x1, x2, c x1]^T - B_psi x3 = B_{θφα} T_m + Q_d - b
  Mat4 a;
  a.col(0) = eom.mass.col(kTheta);
  a.col(1) = eom.mass.col(kPhi) + coupling * eom.mass.col(kPsi);
  a.col(2) = eom.mass.col(kAlpha);
  a.col(3) = -f.projection.col(kPsi);
  const Vec4 rhs = f.projection.col(kTheta) * motors.theta + f.projection.col(kPhi) * motors.phi +
                   f.projection.col(kAlpha) * motors.alpha + f.damper - eom.bias;
  const Vec4 x = a.partialPivLu().solve(rhs);
  return {x[0], x[1], x[2], x[3]};
}

}  // namespace limbdyn
