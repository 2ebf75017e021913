#pragma once

// Subject scaling. The tabulated 'us-s' and 'fp-f' bodies combine a robot
// part with the reference subject's shank and foot. A new subject is built by
// removing the reference human segment, scaling it, and recombining.

#include <cmath>
#include <string>
#include <vector>

#include "limbdyn/dynamics.hpp"
#include "limbdyn/errors.hpp"

namespace limbdyn {

struct SubjectProfile {
  double height = 1.7;  // m
  double mass = 65.0;   // kg

  void validate() const {
    if (!(height >= 1.4 && height <= 2.1)) throw ConfigError("subject height must lie in [1.4, 2.1] m");
    if (!(mass >= 30.0 && mass <= 150.0)) throw ConfigError("subject mass must lie in [30, 150] kg");
  }

  bool operator==(const SubjectProfile&) const = default;
};

/// Segment fractions from standard anthropometric tables: masses as a
/// fraction of body mass, lengths as a fraction of stature, COM and radii of
/// gyration as fractions of the segment length.
struct Anthropometry {
  double shank_mass = 0.0465;
  double foot_mass = 0.0145;
  double foot_length = 0.152;
  double shank_com = 0.433;         // from the knee
  double shank_gyration = 0.302;    // transverse axes, about the COM
  double shank_axial_gyration = 0.1;
  double foot_com_forward = 0.30;   // of foot length, ahead of the ankle
  double foot_com_below = 0.12;     // of foot length, below the ankle
  double foot_gyration = 0.475;     // of the ankle-to-metatarsal length
  double foot_ankle_to_metatarsal = 0.6;
  double foot_axial_gyration = 0.1;  // of foot length, about the long axis
};

/// Rigid combination of two bodies. COMs and tensors share world axes at
/// the zero configuration.
inline RigidLink combine_links(const std::string& name, const RigidLink& a, const RigidLink& b) {
  RigidLink out;
  out.name = name;
  out.mass = a.mass + b.mass;
  out.com0 = (a.mass * a.com0 + b.mass * b.com0) / out.mass;
  auto shifted = [&](const RigidLink& l) {
    const Vec3 d = l.com0 - out.com0;
    return Eigen::Matrix3d(l.inertia + l.mass * (d.squaredNorm() * Eigen::Matrix3d::Identity() - d * d.transpose()));
  };
  out.inertia = shifted(a) + shifted(b);
  return out;
}

/// Inverse of combine_links: the body that, combined with `part`, yields `whole`.
inline RigidLink subtract_link(const std::string& name, const RigidLink& whole, const RigidLink& part) {
  RigidLink out;
  out.name = name;
  out.mass = whole.mass - part.mass;
  if (!(out.mass > 0.0)) throw ConfigError("cannot remove '" + part.name + "' from '" + whole.name + "'");
  out.com0 = (whole.mass * whole.com0 - part.mass * part.com0) / out.mass;
  auto parallel = [](double m, const Vec3& d) {
    return Eigen::Matrix3d(m * (d.squaredNorm() * Eigen::Matrix3d::Identity() - d * d.transpose()));
  };
  const Eigen::Matrix3d about_whole = whole.inertia - part.inertia - parallel(part.mass, part.com0 - whole.com0);
  out.inertia = about_whole - parallel(out.mass, out.com0 - whole.com0);
  out.inertia = 0.5 * (out.inertia + out.inertia.transpose());
  return out;
}

struct HumanSegments {
  RigidLink shank;
  RigidLink foot;
};

/// Human shank and foot for a subject whose ankle sits `shank_l` below the knee.
inline HumanSegments human_segments(const SubjectProfile& s, double shank_l, const Anthropometry& a = {}) {
  HumanSegments h;
  h.shank.name = "shank";
  h.shank.mass = a.shank_mass * s.mass;
  h.shank.com0 = Vec3(0.0, 0.0, -a.shank_com * shank_l);
  const double it = h.shank.mass * std::pow(a.shank_gyration * shank_l, 2);
  const double ia = h.shank.mass * std::pow(a.shank_axial_gyration * shank_l, 2);
  h.shank.inertia = inertia_tensor(it, it, ia, 0.0, 0.0, 0.0);

  const double foot_l = a.foot_length * s.height;
  h.foot.name = "foot";
  h.foot.mass = a.foot_mass * s.mass;
  h.foot.com0 = Vec3(0.0, a.foot_com_forward * foot_l, -shank_l - a.foot_com_below * foot_l);
  const double ft = h.foot.mass * std::pow(a.foot_gyration * a.foot_ankle_to_metatarsal * foot_l, 2);
  const double fa = h.foot.mass * std::pow(a.foot_axial_gyration * foot_l, 2);
  // y runs along the foot.
  h.foot.inertia = inertia_tensor(ft, fa, ft, 0.0, 0.0, 0.0);
  return h;
}

inline constexpr double kRobotMinStature = 1.6;
inline constexpr double kRobotMaxStature = 1.9;

struct ScaledModel {
  SystemModel model;
  std::vector<std::string> warnings;
};

/// Builds the system model for `profile` from the reference model, which
/// is taken to hold the `reference` subject. Robot parts keep their
/// properties; the foot assembly follows the ankle as the shank lengthens.
inline ScaledModel scale_subject(const SubjectProfile& profile, const SystemModel& reference_model,
                                 const SubjectProfile& reference = {}, const Anthropometry& table = {}) {
  profile.validate();
  ScaledModel out{reference_model, {}};
  if (profile.height < kRobotMinStature || profile.height > kRobotMaxStature) {
    out.warnings.push_back("subject stature " + std::to_string(profile.height) +
                           " m lies outside the robot's 1.6-1.9 m fitting range");
  }
  if (profile == reference) return out;

  const double shank_l = reference_model.shank_length * (profile.height / reference.height);
  const HumanSegments ref = human_segments(reference, reference_model.shank_length, table);
  const HumanSegments sub = human_segments(profile, shank_l, table);
  const double ankle_shift = shank_l - reference_model.shank_length;

  const RigidLink robot_upper = subtract_link("us", reference_model.links[kUpperShank], ref.shank);
  RigidLink robot_plate = subtract_link("fp", reference_model.links[kFootPlate], ref.foot);
  robot_plate.com0.z() -= ankle_shift;
  robot_upper.validate();
  robot_plate.validate();

  RigidLink foot_frame = reference_model.links[kFootFrame];
  foot_frame.com0.z() -= ankle_shift;

  out.model.shank_length = shank_l;
  out.model.links[kUpperShank] = combine_links("us-s", robot_upper, sub.shank);
  out.model.links[kFootFrame] = foot_frame;
  out.model.links[kFootPlate] = combine_links("fp-f", robot_plate, sub.foot);
  return out;
}

}  // namespace limbdyn
