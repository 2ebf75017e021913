#pragma once

// Passive-assistance (CPM) control loop: reference generators, PI
// controllers, actuator envelopes, and the fixed-step closed-loop simulator.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "limbdyn/dynamics.hpp"
#include "limbdyn/errors.hpp"
#include "limbdyn/kinematics.hpp"
#include "limbdyn/reference_data.hpp"
#include "limbdyn/rk4.hpp"
#include "limbdyn/units.hpp"

namespace limbdyn {

struct TrajectorySample {
  Vec4 q = Vec4::Zero();
  Vec4 qd = Vec4::Zero();
  Vec4 qdd = Vec4::Zero();
};

/// The 15 s sinusoidal test motion used for torque sizing (degrees):
///   theta = 45 (1 - cos wt), phi = 15 cos wt, alpha = -20 cos wt, psi = 10 cos wt
inline TrajectorySample gen_sinusoid(double t, double period = 15.0) {
  const double w = 2.0 * kPi / period;
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  const Vec4 amp(deg_to_rad(45.0), deg_to_rad(15.0), deg_to_rad(-20.0), deg_to_rad(10.0));
  TrajectorySample out;
  out.q << amp[0] * (1.0 - c), amp[1] * c, amp[2] * c, amp[3] * c;
  out.qd << amp[0] * w * s, -amp[1] * w * s, -amp[2] * w * s, -amp[3] * w * s;
  out.qdd << amp[0] * w * w * c, -amp[1] * w * w * c, -amp[2] * w * w * c, -amp[3] * w * w * c;
  return out;
}

enum class TrajectoryKind { sinusoid, isokinetic };

/// Cyclic motion between state 1 (knee at theta_lo, foot inverted at
/// phi_hi) and state 2 (knee at theta_hi, foot everted at phi_lo); alpha and
/// psi follow phi through the coupling law.
struct ReferenceTrajectory {
  TrajectoryKind kind = TrajectoryKind::isokinetic;
  double period = 15.0;  // s
  double dwell = 2.0;    // s, isokinetic only
  double theta_lo = 0.0;
  double theta_hi = deg_to_rad(80.0);
  double phi_lo = deg_to_rad(-20.0);
  double phi_hi = deg_to_rad(20.0);
  CouplingLaw coupling;

  double ramp_time() const { return 0.5 * period - dwell; }

  void validate() const {
    if (!(period > 0.0)) throw ConfigError("trajectory period must be positive");
    if (kind == TrajectoryKind::isokinetic && !(dwell >= 0.0 && ramp_time() > 0.0)) {
      throw ConfigError("trajectory dwell must leave a positive ramp time");
    }
    // Robot ROM: knee flexion past 0 is physical but the rig starts at 0.
    if (!(theta_lo <= theta_hi) || theta_lo < deg_to_rad(-10.0) || theta_hi > deg_to_rad(140.0)) {
      throw ConfigError("theta range outside the knee range of motion");
    }
    if (!(phi_lo <= phi_hi) || phi_lo < deg_to_rad(-60.0) || phi_hi > deg_to_rad(60.0)) {
      throw ConfigError("phi range outside ±60°");
    }
    for (double phi : {phi_lo, phi_hi}) {
      const double a = coupling.alpha(phi);
      const double p = coupling.psi(phi);
      if (a < deg_to_rad(-70.0) || a > deg_to_rad(60.0) || std::abs(p) > deg_to_rad(50.0)) {
        throw ConfigError("coupled alpha/psi leave the robot's range of motion");
      }
    }
  }
};

/// Progress s ∈ [0, 1] from state 1 to state 2 and its time derivatives.
struct Progress {
  double s = 0.0;
  double sd = 0.0;
  double sdd = 0.0;
};

inline Progress isokinetic_progress(double t, const ReferenceTrajectory& traj) {
  const double tr = traj.ramp_time();
  const double tau = std::fmod(t, traj.period);
  if (tau < tr) return {tau / tr, 1.0 / tr, 0.0};
  if (tau < tr + traj.dwell) return {1.0, 0.0, 0.0};
  if (tau < 2.0 * tr + traj.dwell) return {1.0 - (tau - tr - traj.dwell) / tr, -1.0 / tr, 0.0};
  return {0.0, 0.0, 0.0};
}

inline Progress sinusoid_progress(double t, const ReferenceTrajectory& traj) {
  const double w = 2.0 * kPi / traj.period;
  return {0.5 * (1.0 - std::cos(w * t)), 0.5 * w * std::sin(w * t), 0.5 * w * w * std::cos(w * t)};
}

inline TrajectorySample sample_reference(double t, const ReferenceTrajectory& traj) {
  const Progress p =
      traj.kind == TrajectoryKind::isokinetic ? isokinetic_progress(t, traj) : sinusoid_progress(t, traj);
  const double dtheta = traj.theta_hi - traj.theta_lo;
  const double dphi = traj.phi_lo - traj.phi_hi;
  const double phi = traj.phi_hi + dphi * p.s;
  const double phid = dphi * p.sd;
  const double phidd = dphi * p.sdd;
  const CouplingLaw& c = traj.coupling;
  TrajectorySample out;
  out.q << traj.theta_lo + dtheta * p.s, phi, c.alpha(phi), c.psi(phi);
  out.qd << dtheta * p.sd, phid, c.a * phid, c.c * phid;
  out.qdd << dtheta * p.sdd, phidd, c.a * phidd, c.c * phidd;
  return out;
}

inline TrajectorySample gen_isokinetic(double t, const ReferenceTrajectory& traj) {
  ReferenceTrajectory iso = traj;
  iso.kind = TrajectoryKind::isokinetic;
  return sample_reference(t, iso);
}

// ---------------------------------------------------------------------------
// PI control

struct PIGains {
  double kp = 0.0;  // Nm/rad
  double ki = 0.0;  // Nm/(rad·s)
};

using AxisGains = std::array<PIGains, 3>;  // theta, phi, alpha

inline AxisGains simulation_gains() { return {{{120.0, 60.0}, {4000.0, 60.0}, {600.0, 80.0}}}; }
inline AxisGains experiment_gains() { return {{{60.0, 30.0}, {2000.0, 30.0}, {150.0, 20.0}}}; }

struct PIState {
  double integral = 0.0;                 // rad·s
  std::optional<double> previous_error;  // empty before the first step
};

struct PIOutput {
  double torque = 0.0;
  PIState state;
  bool saturated = false;
};

/// u = kp e + ki ∫e with a trapezoidal integral, clamped to ±limit. While
/// clamped the integral holds its previous value.
inline PIOutput pi_step(const PIGains& gains, double error, const PIState& in, double dt, double limit) {
  const double prev = in.previous_error.value_or(error);
  const double integral = in.integral + 0.5 * dt * (prev + error);
  const double u = gains.kp * error + gains.ki * integral;
  PIOutput out;
  out.state.previous_error = error;
  if (std::abs(u) > limit) {
    out.torque = std::copysign(limit, u);
    out.state.integral = in.integral;
    out.saturated = true;
  } else {
    out.torque = u;
    out.state.integral = integral;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Actuators

struct MotorSpec {
  double torque_constant = 0.5;  // Nm/A
  double rated_torque = 6.0;     // Nm, motor side
  double rated_speed = rpm_to_rad_s(55.0);  // rad/s, motor side
  double gear_ratio = 10.0;                 // joint : motor

  void validate() const {
    if (!(torque_constant > 0.0 && rated_torque > 0.0 && rated_speed > 0.0 && gear_ratio >= 1.0)) {
      throw ConfigError("motor spec values must be positive with gear_ratio >= 1");
    }
  }

  double stall_torque_joint() const { return 2.0 * rated_torque * gear_ratio; }
  double no_load_speed_joint() const { return 2.0 * rated_speed / gear_ratio; }
  /// Slope of the joint-side torque–speed line (back-EMF damping), Nm·s/rad.
  double back_emf_damping() const { return stall_torque_joint() / no_load_speed_joint(); }
};

using AxisMotors = std::array<MotorSpec, 3>;

inline AxisMotors reference_motors() {
  return {{{0.5, 6.0, rpm_to_rad_s(55.0), 10.0},
           {3.0, 0.2, rpm_to_rad_s(9.5), 7.5},
           {6.0, 2.6, rpm_to_rad_s(9.1), 1.0}}};
}

/// Joint-side torque available at `joint_speed` on a straight torque–speed
/// line from stall (2× rated) to no-load (2× rated speed).
inline double motor_limit(const MotorSpec& m, double joint_speed) {
  const double motor_speed = std::abs(joint_speed) * m.gear_ratio;
  return m.stall_torque_joint() * std::max(0.0, 1.0 - motor_speed / (2.0 * m.rated_speed));
}

// ---------------------------------------------------------------------------
// Closed-loop simulation

/// `torque_source`: the PI output is applied directly as joint torque.
/// `dc_motor`: the PI output is a voltage-equivalent command (stall torque at
/// that voltage); the delivered torque follows the motor's torque–speed line.
enum class ActuatorModel { torque_source, dc_motor };

struct SimOptions {
  ActuatorModel actuator = ActuatorModel::dc_motor;
  double dt = 1e-3;
  double duration = 30.0;
  double rms_start = 15.0;  // samples before this time are excluded from RMS
  bool enforce_motor_limits = true;
};

struct SimResult {
  std::vector<double> time;
  std::vector<Vec4> reference;
  std::vector<Vec4> actual;
  std::vector<Vec4> torque;  // theta, phi, alpha motors and the S/P constraint torque
  std::vector<Vec4> rate;    // actual joint rates
  double rms_start = 0.0;

  std::size_t size() const { return time.size(); }
};

/// sqrt(mean((ref - actual)^2)) over samples with t >= from_time.
inline double rms_error(const SimResult& r, std::size_t axis, double from_time = 0.0) {
  if (axis > 3) throw ConfigError("rms_error: axis index out of range");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.time[i] + 1e-12 < from_time) continue;
    const double e = r.reference[i][axis] - r.actual[i][axis];
    sum += e * e;
    ++n;
  }
  if (n == 0) throw ConfigError("rms_error: empty series");
  return std::sqrt(sum / static_cast<double>(n));
}

/// Integrates the psi-constrained dynamics with RK4 under three PI loops
/// (theta, phi, alpha). Torque commands are held over each step and clamped
/// to the motor envelope at the step's starting speed.
inline SimResult simulate(const SystemModel& model, const ReferenceTrajectory& traj, const AxisGains& gains,
                          const AxisMotors& motors, const SimOptions& opt = {}) {
  if (!(opt.dt > 0.0 && opt.dt <= 0.01)) throw ConfigError("simulation dt must lie in (0, 0.01] s");
  if (!(opt.duration >= 0.0)) throw ConfigError("simulation duration must be non-negative");
  const double c = traj.coupling.c;
  const auto steps = static_cast<std::size_t>(std::llround(opt.duration / opt.dt));

  // Free coordinates and rates: (theta, phi, alpha, theta_d, phi_d, alpha_d).
  using Free = Eigen::Matrix<double, 6, 1>;
  auto full_state = [c](const Free& x) {
    GeneralizedState s;
    s.q << x[0], x[1], x[2], c * x[1];
    s.qd << x[3], x[4], x[5], c * x[4];
    return s;
  };

  const TrajectorySample start = sample_reference(0.0, traj);
  Free x;
  x << start.q[kTheta], start.q[kPhi], start.q[kAlpha], 0.0, 0.0, 0.0;

  SimResult out;
  out.rms_start = opt.rms_start;
  out.time.reserve(steps + 1);
  out.reference.reserve(steps + 1);
  out.actual.reserve(steps + 1);
  out.torque.reserve(steps + 1);
  out.rate.reserve(steps + 1);

  std::array<PIState, 3> pi{};
  const std::array<std::size_t, 3> axes = {kTheta, kPhi, kAlpha};

  auto command = [&](double t, const GeneralizedState& s, bool commit) {
    const TrajectorySample ref = sample_reference(t, traj);
    MotorTorques m;
    std::array<double, 3> u{};
    constexpr double kUnlimited = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 3; ++k) {
      const double speed = s.qd[axes[k]];
      const double envelope = opt.enforce_motor_limits ? motor_limit(motors[k], speed) : kUnlimited;
      const double error = ref.q[axes[k]] - s.q[axes[k]];
      if (opt.actuator == ActuatorModel::torque_source) {
        const PIOutput o = pi_step(gains[k], error, pi[k], opt.dt, envelope);
        u[k] = o.torque;
        if (commit) pi[k] = o.state;
      } else {
        const double supply = opt.enforce_motor_limits ? motors[k].stall_torque_joint() : kUnlimited;
        const PIOutput o = pi_step(gains[k], error, pi[k], opt.dt, supply);
        u[k] = std::clamp(o.torque - motors[k].back_emf_damping() * speed, -envelope, envelope);
        if (commit) pi[k] = o.state;
      }
    }
    m.theta = u[0];
    m.phi = u[1];
    m.alpha = u[2];
    return std::pair{ref, m};
  };

  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * opt.dt;
    const GeneralizedState s = full_state(x);
    if (!s.q.allFinite() || !s.qd.allFinite()) {
      throw SimulationError("simulation diverged at t = " + std::to_string(t) + " s", t);
    }
    const auto [ref, motor] = command(t, s, true);
    const ConstrainedAccelerations acc = forward_dynamics_constrained(model, s, motor, c);

    out.time.push_back(t);
    out.reference.push_back(ref.q);
    out.actual.push_back(s.q);
    out.rate.push_back(s.qd);
    out.torque.push_back(Vec4(motor.theta, motor.phi, motor.alpha, acc.psi_torque));
    if (i == steps) break;

    auto deriv = [&](double, const Free& y) {
      const ConstrainedAccelerations a = forward_dynamics_constrained(model, full_state(y), motor, c);
      Free d;
      d << y[3], y[4], y[5], a.theta_ddot, a.phi_ddot, a.alpha_ddot;
      return d;
    };
    x = rk4_step(deriv, t, x, opt.dt);
  }
  return out;
}

}  // namespace limbdyn
