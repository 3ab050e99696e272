#include "stlshield/dynamics.hpp"

#include "stlshield/errors.hpp"

#include <cmath>
#include <numbers>

namespace stlshield {

UnicycleState UnicycleState::from_vector(const Vector& x) {
  if (x.size() != 3) throw InputError("unicycle state needs 3 coordinates");
  return {x[0], x[1], wrap_angle(x[2])};
}

double wrap_angle(double a) {
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

ControlAffineSystem unicycle_system() {
  ControlAffineSystem sys;
  sys.n = 3;
  sys.m = 2;
  sys.drift = [](const Vector&) -> Vector { return Vector::Zero(3); };
  sys.forcing = [](const Vector& x) -> Matrix {
    Matrix g = Matrix::Zero(3, 2);
    g(0, 0) = std::cos(x[2]);
    g(1, 0) = std::sin(x[2]);
    g(2, 1) = 1.0;
    return g;
  };
  sys.input_box = {Vector{{-0.2, -std::numbers::pi / 4}}, Vector{{0.2, std::numbers::pi / 4}}};
  sys.heading_index = 2;
  return sys;
}

ControlAffineSystem single_integrator(double speed_cap) {
  if (!(speed_cap > 0.0)) throw InputError("single integrator speed cap must be positive");
  ControlAffineSystem sys;
  sys.n = 2;
  sys.m = 2;
  sys.drift = [](const Vector&) -> Vector { return Vector::Zero(2); };
  sys.forcing = [](const Vector&) -> Matrix { return Matrix::Identity(2, 2); };
  sys.input_box = {Vector::Constant(2, -speed_cap), Vector::Constant(2, speed_cap)};
  return sys;
}

Vector step(const ControlAffineSystem& sys, const Vector& x, const Vector& u, double dt,
            Integrator integrator) {
  if (!(dt > 0.0)) throw InputError("step dt must be positive");
  if (x.size() != sys.n || u.size() != sys.m) throw InputError("step: state or input dimension mismatch");
  Vector next;
  if (integrator == Integrator::Euler) {
    next = x + dt * sys.xdot(x, u);
  } else {
    const Vector k1 = sys.xdot(x, u);
    const Vector k2 = sys.xdot(x + 0.5 * dt * k1, u);
    const Vector k3 = sys.xdot(x + 0.5 * dt * k2, u);
    const Vector k4 = sys.xdot(x + dt * k3, u);
    next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!next.allFinite()) throw NumericError("integration produced a non-finite state");
  if (sys.heading_index >= 0) next[sys.heading_index] = wrap_angle(next[sys.heading_index]);
  return next;
}

Vector lyapunov_nominal(const ControlAffineSystem& sys, const Vector& x, const Vector& target,
                        const Vector& target_rate, double gain) {
  if (!(gain > 0.0)) throw InputError("lyapunov gain must be positive");
  if (x.size() != sys.n || target.size() != sys.n || target_rate.size() != sys.n)
    throw InputError("lyapunov_nominal: dimension mismatch");
  Vector err = x - target;
  if (sys.heading_index >= 0) err[sys.heading_index] = wrap_angle(err[sys.heading_index]);
  const Vector desired = target_rate - sys.drift(x) - gain * err;
  const Matrix g = sys.forcing(x);
  return g.completeOrthogonalDecomposition().solve(desired);
}

Vector lyapunov_nominal(const UnicycleState& x, const Vector& target, const Vector& target_rate,
                        double gain) {
  static const ControlAffineSystem sys = unicycle_system();
  return lyapunov_nominal(sys, x.to_vector(), target, target_rate, gain);
}

}  // namespace stlshield
