#pragma once

#include <numbers>

namespace limbdyn {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Inertial data is tabulated in cm and kg·cm².
constexpr double cm_to_m(double cm) { return cm / 100.0; }
constexpr double m_to_cm(double m) { return m * 100.0; }
constexpr double kgcm2_to_kgm2(double v) { return v / 10000.0; }
constexpr double kgm2_to_kgcm2(double v) { return v * 10000.0; }

constexpr double rpm_to_rad_s(double rpm) { return rpm * (2.0 * kPi / 60.0); }

}  // namespace limbdyn
