#pragma once

// Two-hinge ankle-foot model (talocrural + subtalar hinges) and the
// inversion/eversion sweep that produces optimizer target points.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Geometry>

#include "limbdyn/errors.hpp"
#include "limbdyn/kinematics.hpp"
#include "limbdyn/units.hpp"

namespace limbdyn {

struct HingeAxis {
  Vec3 direction = Vec3::UnitX();
  Vec3 point = Vec3::Zero();

  HingeAxis() = default;
  HingeAxis(const Vec3& dir, const Vec3& through) : direction(dir.normalized()), point(through) {}

  /// Rigid rotation of `x` by `angle` about this axis.
  Vec3 rotate(const Vec3& x, double angle) const {
    const Eigen::AngleAxisd aa(angle, direction);
    return point + aa.toRotationMatrix() * (x - point);
  }
};

/// Sole points: P (heel), M (lateral metatarsal head), N (medial metatarsal
/// head), relative to the ankle point B at the neutral pose.
struct FootTriple {
  Vec3 p = Vec3::Zero();
  Vec3 m = Vec3::Zero();
  Vec3 n = Vec3::Zero();
};

struct TwoHingeModel {
  HingeAxis talocrural;
  HingeAxis subtalar;
  FootTriple neutral;

  void validate() const {
    for (const HingeAxis* axis : {&talocrural, &subtalar}) {
      if (std::abs(axis->direction.norm() - 1.0) > 1e-12 || !axis->direction.allFinite()) {
        throw ConfigError("hinge axis direction must be a finite unit vector");
      }
    }
    const Vec3 a = neutral.m - neutral.p;
    const Vec3 b = neutral.n - neutral.p;
    if (a.cross(b).norm() <= 1e-9 * a.norm() * b.norm()) {
      throw ConfigError("sole points P, M, N must not be collinear");
    }
  }
};

/// Anatomical parameters used to build the default two-hinge model.
/// Angles in radians; lengths as fractions of stature.
struct AnkleParameters {
  double height = 1.7;
  double talocrural_incline = deg_to_rad(8.0);
  double subtalar_incline = deg_to_rad(42.0);
  double subtalar_deviation = deg_to_rad(23.0);
  double foot_length_ratio = 0.152;
  double foot_breadth_ratio = 0.055;
  double ankle_height_ratio = 0.039;
  // Fractions of foot length, measured forward of the ankle point.
  double heel_position = -0.19;
  double metatarsal_position = 0.55;
};

/// +x is lateral for the right leg, +y forward, +z up. The talocrural axis
/// dips laterally in the coronal plane; the subtalar axis rises anteriorly
/// and deviates medially.
inline TwoHingeModel make_two_hinge_model(const AnkleParameters& p) {
  TwoHingeModel model;
  const Vec3 origin = Vec3::Zero();
  model.talocrural = HingeAxis(
      Vec3(std::cos(p.talocrural_incline), 0.0, -std::sin(p.talocrural_incline)), origin);
  const double ci = std::cos(p.subtalar_incline);
  model.subtalar =
      HingeAxis(Vec3(-std::sin(p.subtalar_deviation) * ci, std::cos(p.subtalar_deviation) * ci,
                     std::sin(p.subtalar_incline)),
                origin);
  const double foot = p.foot_length_ratio * p.height;
  const double half_breadth = 0.5 * p.foot_breadth_ratio * p.height;
  const double sole = -p.ankle_height_ratio * p.height;
  model.neutral.p = Vec3(0.0, p.heel_position * foot, sole);
  model.neutral.m = Vec3(half_breadth, p.metatarsal_position * foot, sole);
  model.neutral.n = Vec3(-half_breadth, p.metatarsal_position * foot, sole);
  return model;
}

/// Rotates the neutral sole points by `gamma` about the subtalar axis (fixed
/// in the talus) and then carries the talus by `beta` about the talocrural
/// axis (fixed in the shank).
inline FootTriple foot_pose(const TwoHingeModel& model, double beta, double gamma) {
  if (std::abs(beta) > kPi / 2 || std::abs(gamma) > kPi / 2) {
    throw RangeError("foot_pose: hinge angles must lie within ±90°");
  }
  auto place = [&](const Vec3& x) {
    return model.talocrural.rotate(model.subtalar.rotate(x, gamma), beta);
  };
  return {place(model.neutral.p), place(model.neutral.m), place(model.neutral.n)};
}

/// beta = slope * gamma + offset
struct HingeCoupling {
  double slope = -0.3;
  double offset = 0.0;
  double operator()(double gamma) const { return slope * gamma + offset; }
};

inline constexpr std::size_t kTargetCount = 11;

struct TargetSet {
  std::array<FootTriple, kTargetCount> samples;
};

/// Eleven equally spaced subtalar angles from gamma_lo (eversion) to
/// gamma_hi (inversion).
inline TargetSet generate_ie_sweep(const TwoHingeModel& model, double gamma_lo, double gamma_hi,
                                   const HingeCoupling& coupling = {}) {
  if (!(gamma_hi > gamma_lo)) {
    throw ConfigError("generate_ie_sweep: gamma range must be ordered with non-zero width");
  }
  TargetSet set;
  for (std::size_t i = 0; i < kTargetCount; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(kTargetCount - 1);
    const double gamma = std::lerp(gamma_lo, gamma_hi, t);
    set.samples[i] = foot_pose(model, coupling(gamma), gamma);
  }
  return set;
}

}  // namespace limbdyn
