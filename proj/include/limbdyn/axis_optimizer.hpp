#pragma once

// Placement of the robot's S/P axis: the foot plate is carried by
// Rz(phi) Rx(alpha) about the ankle point and by Ry(psi) about a point L
// below it. The optimizer fits eleven robot poses and the common offset L
// to the two-hinge target sweep.

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "limbdyn/ankle_model.hpp"
#include "limbdyn/differential_evolution.hpp"
#include "limbdyn/kinematics.hpp"
#include "limbdyn/units.hpp"

namespace limbdyn {

inline constexpr Eigen::Index kDesignSize = 1 + 3 * static_cast<Eigen::Index>(kTargetCount);

/// Flattened as (L, phi_1..phi_11, alpha_1..alpha_11, psi_1..psi_11).
struct DesignVector {
  double offset = 0.0;  // L, metres below B'
  std::array<double, kTargetCount> phi{};
  std::array<double, kTargetCount> alpha{};
  std::array<double, kTargetCount> psi{};

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd w(kDesignSize);
    w[0] = offset;
    for (std::size_t i = 0; i < kTargetCount; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      w[1 + k] = phi[i];
      w[1 + 11 + k] = alpha[i];
      w[1 + 22 + k] = psi[i];
    }
    return w;
  }

  static DesignVector unflatten(const Eigen::VectorXd& w) {
    if (w.size() != kDesignSize) throw ConfigError("design vector must have 34 elements");
    DesignVector d;
    d.offset = w[0];
    for (std::size_t i = 0; i < kTargetCount; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      d.phi[i] = w[1 + k];
      d.alpha[i] = w[1 + 11 + k];
      d.psi[i] = w[1 + 22 + k];
    }
    return d;
  }
};

inline Bounds default_axis_bounds(double offset_limit = 0.10, double angle_limit = deg_to_rad(60.0)) {
  Bounds b;
  b.lower = Eigen::VectorXd::Constant(kDesignSize, -angle_limit);
  b.upper = Eigen::VectorXd::Constant(kDesignSize, angle_limit);
  b.lower[0] = -offset_limit;
  b.upper[0] = offset_limit;
  return b;
}

/// Rz(phi) Rx(alpha) ( Ry(psi) (x0 - a) + a ),  a = (0, 0, -L)
inline Vec3 design_point(double offset, double phi, double alpha, double psi, const Vec3& initial) {
  const Vec3 pivot(0.0, 0.0, -offset);
  return rot_axis<double>(Axis::Z, phi) * rot_axis<double>(Axis::X, alpha) *
         (rot_axis<double>(Axis::Y, psi) * (initial - pivot) + pivot);
}

inline FootTriple design_points(double offset, double phi, double alpha, double psi,
                                const FootTriple& initial) {
  return {design_point(offset, phi, alpha, psi, initial.p), design_point(offset, phi, alpha, psi, initial.m),
          design_point(offset, phi, alpha, psi, initial.n)};
}

/// Mean over the eleven samples of the summed P/M/N distances, in metres.
inline double axis_cost(const DesignVector& w, const TargetSet& targets, const FootTriple& initial) {
  double total = 0.0;
  for (std::size_t i = 0; i < kTargetCount; ++i) {
    const FootTriple d = design_points(w.offset, w.phi[i], w.alpha[i], w.psi[i], initial);
    const FootTriple& t = targets.samples[i];
    total += (t.p - d.p).norm() + (t.m - d.m).norm() + (t.n - d.n).norm();
  }
  return total / static_cast<double>(kTargetCount);
}

struct OptimizationResult {
  DesignVector best;
  double best_cost = 0.0;
  std::vector<double> cost_history;
};

inline OptimizationResult optimize_axis(const TargetSet& targets, const FootTriple& initial,
                                        const Bounds& bounds, const DEConfig& config) {
  if (bounds.size() != kDesignSize) throw ConfigError("axis bounds must have 34 elements");
  const CostFunction cost = [&](const Eigen::VectorXd& w) {
    return axis_cost(DesignVector::unflatten(w), targets, initial);
  };
  DEResult de = de_minimize(cost, bounds, config);
  return {DesignVector::unflatten(de.best), de.best_cost, std::move(de.cost_history)};
}

}  // namespace limbdyn
