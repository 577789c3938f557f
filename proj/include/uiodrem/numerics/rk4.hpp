#pragma once

#include <cmath>
#include <functional>

#include "uiodrem/numerics/trajectory.hpp"
#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

template <typename Scalar>
using VectorField = std::function<VectorX<Scalar>(Scalar t, const VectorX<Scalar>& x)>;

/// One classical RK4 step of x' = field(t, x).
template <typename Scalar, typename Field>
VectorX<Scalar> rk4_step(const Field& field, Scalar t, const VectorX<Scalar>& x, Scalar dt) {
  const Scalar half = Scalar(0.5) * dt;
  const VectorX<Scalar> k1 = field(t, x);
  const VectorX<Scalar> k2 = field(t + half, VectorX<Scalar>(x + half * k1));
  const VectorX<Scalar> k3 = field(t + half, VectorX<Scalar>(x + half * k2));
  const VectorX<Scalar> k4 = field(t + dt, VectorX<Scalar>(x + dt * k3));
  return x + dt / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

struct TimeSpan {
  double start = 0.0;
  double end = 1.0;
};

/// Number of fixed steps covering [start, end] with step dt; the end point is
/// snapped to the grid when it lies within 1e-9 steps of it.
inline std::size_t step_count(const TimeSpan& span, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  const double steps = (span.end - span.start) / dt;
  if (steps < -1e-9) throw ConfigError("time span must be non-decreasing");
  return static_cast<std::size_t>(std::floor(steps + 1e-9));
}

/// Fixed-step RK4 trajectory with a single channel "x". Throws
/// DivergenceError at the first non-finite state.
inline Trajectory integrate_rk4(const VectorField<double>& field, const Vector& x0, TimeSpan span, double dt) {
  const std::size_t steps = step_count(span, dt);
  Trajectory traj(span.start, dt);
  traj.add_channel("x", static_cast<std::size_t>(x0.size()));
  traj.reserve(steps + 1);
  if (!x0.allFinite()) throw DivergenceError("integrate_rk4: non-finite initial state", span.start);
  Vector x = x0;
  traj.append_row({x.data(), static_cast<std::size_t>(x.size())});
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = span.start + static_cast<double>(k) * dt;
    x = rk4_step<double>(field, t, x, dt);
    if (!x.allFinite()) throw DivergenceError("integrate_rk4: non-finite state", t + dt);
    traj.append_row({x.data(), static_cast<std::size_t>(x.size())});
  }
  return traj;
}

}  // namespace uiodrem
