#pragma once

#include <utility>

namespace limbdyn {

/// Classic fixed-step fourth-order Runge–Kutta. `deriv(t, x)` returns dx/dt;
/// State needs vector-space operators (Eigen vectors work).
template <typename State, typename Deriv>
State rk4_step(Deriv&& deriv, double t, const State& x, double dt) {
  const State k1 = deriv(t, x);
  const State k2 = deriv(t + 0.5 * dt, State(x + (0.5 * dt) * k1));
  const State k3 = deriv(t + 0.5 * dt, State(x + (0.5 * dt) * k2));
  const State k4 = deriv(t + dt, State(x + dt * k3));
  return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace limbdyn
