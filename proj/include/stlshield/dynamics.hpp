#pragma once

#include "stlshield/control_affine.hpp"

namespace stlshield {

/// Planar unicycle pose; theta is kept in (-pi, pi].
struct UnicycleState {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;

  Vector to_vector() const { return Vector{{px, py, theta}}; }
  static UnicycleState from_vector(const Vector& x);
};

/// Maps an angle into (-pi, pi].
double wrap_angle(double a);

enum class Integrator { Euler, Rk4 };

struct SimConfig {
  double dt = 1.0 / 30.0;
  Integrator integrator = Integrator::Rk4;
  double duration = 60.0;
};

/// x = (px, py, theta), u = (v, omega):
///   xdot = [cos theta, 0; sin theta, 0; 0, 1] u,  U = [-0.2, 0.2] x [-pi/4, pi/4]
ControlAffineSystem unicycle_system();

/// xdot = u in the plane, each axis bounded by +-speed_cap.
ControlAffineSystem single_integrator(double speed_cap = 0.2);

/// One zero-order-hold step of length dt. The heading coordinate, if any, is
/// wrapped into (-pi, pi]. Throws NumericError on non-finite results.
Vector step(const ControlAffineSystem& sys, const Vector& x, const Vector& u, double dt,
            Integrator integrator = Integrator::Rk4);

/// Minimum-norm least-squares tracking input
///   u = g(x)^+ (target_rate - gain * (x - target)),
/// which yields Vdot = -gain * V for V = ||x - target|| whenever the desired
/// rate lies in the range of g. The heading residual is wrapped.
Vector lyapunov_nominal(const ControlAffineSystem& sys, const Vector& x, const Vector& target,
                        const Vector& target_rate, double gain = 2.0);

Vector lyapunov_nominal(const UnicycleState& x, const Vector& target, const Vector& target_rate,
                        double gain = 2.0);

}  // namespace stlshield
