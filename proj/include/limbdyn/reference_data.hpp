#pragma once

// Published constants for the 1.7 m / 65 kg reference subject and the
// prototype's actuators. Inertial data is kept in its tabulated units
// (cm, kg·cm²) and converted through the same helpers the config loader
// uses, so a config echo reloads bit-for-bit.

#include <array>
#include <string>

#include "limbdyn/dynamics.hpp"
#include "limbdyn/units.hpp"

namespace limbdyn {

struct LinkTableRow {
  const char* name;
  double mass_kg;
  std::array<double, 3> com_cm;
  // xx, yy, zz, xy, xz, yz
  std::array<double, 6> inertia_kgcm2;
};

inline constexpr std::array<LinkTableRow, 4> kReferenceLinkTable = {{
    {"us-s", 5.072, {2.1, 0.8, -14.7}, {780, 1050, 510, 0, -160, 30}},
    {"ls", 2.034, {-3.8, -1.1, -29.7}, {170, 280, 220, -20, -80, -20}},
    {"ff", 0.958, {-0.1, 4.5, -40.0}, {120, 40, 190, 0, 0, 0}},
    {"fp-f", 1.666, {0.0, 6.7, -45.2}, {170, 20, 160, 0, 0, 0}},
}};

inline RigidLink link_from_table(const std::string& name, double mass_kg, const std::array<double, 3>& com_cm,
                                 const std::array<double, 6>& i) {
  RigidLink link;
  link.name = name;
  link.mass = mass_kg;
  link.com0 = Vec3(cm_to_m(com_cm[0]), cm_to_m(com_cm[1]), cm_to_m(com_cm[2]));
  link.inertia = inertia_tensor(kgcm2_to_kgm2(i[0]), kgcm2_to_kgm2(i[1]), kgcm2_to_kgm2(i[2]),
                                kgcm2_to_kgm2(i[3]), kgcm2_to_kgm2(i[4]), kgcm2_to_kgm2(i[5]));
  return link;
}

inline SystemModel reference_model() {
  SystemModel model;
  for (std::size_t b = 0; b < 4; ++b) {
    const auto& row = kReferenceLinkTable[b];
    model.links[b] = link_from_table(row.name, row.mass_kg, row.com_cm, row.inertia_kgcm2);
  }
  return model;
}

/// Experimentally identified A/A coupling (radians):
/// psi = c·phi,  alpha = a·phi + b.
struct CouplingLaw {
  double a = -0.943;
  double b = -0.08;
  double c = 0.818;

  double alpha(double phi) const { return a * phi + b; }
  double psi(double phi) const { return c * phi; }
};

}  // namespace limbdyn
