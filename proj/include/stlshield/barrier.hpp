#pragma once

#include "stlshield/certificate.hpp"
#include "stlshield/control_affine.hpp"
#include "stlshield/signal.hpp"

#include <string>

namespace stlshield {

/// Time-varying barrier around one satisfying expert signal s:
///
///   h(x, t) = rho0^2 - L^2 (x - s(t))^T Q (x - s(t))
///
/// Its zero superlevel set is a tube of radius rho0 / L (in ||.||_Q) around
/// s; every signal that stays inside the tube satisfies the specification the
/// expert was certified against.
class TimeVaryingBarrier {
 public:
  TimeVaryingBarrier(Signal expert, double rho0, double lipschitz, WeightMatrix weights);

  const Signal& expert() const { return expert_; }
  /// Central differences of the expert on its own grid (one-sided at the ends).
  const Signal& expert_rate() const { return rate_; }
  double rho0() const { return rho0_; }
  double lipschitz() const { return lipschitz_; }
  const WeightMatrix& weights() const { return weights_; }

  double value(const Vector& x, double t) const;

  struct Gradient {
    Vector dx;
    double dt = 0.0;
  };
  /// dh/dx = -2 L^2 Q (x - s(t)), dh/dt = 2 L^2 (x - s(t))^T Q sdot(t).
  Gradient gradients(const Vector& x, double t) const;

  /// Expert velocity at t: the stored central difference on grid points,
  /// the slope of the interpolating segment in between.
  Vector expert_velocity(double t) const;

 private:
  Vector offset(const Vector& x, double t) const;

  Signal expert_;
  Signal rate_;
  double rho0_;
  double lipschitz_;
  WeightMatrix weights_;
};

/// Refuses (InputError) experts with rho0 < 0: they do not satisfy the specification.
TimeVaryingBarrier synthesize(Signal expert, double rho0, const stl::LipschitzCertificate& cert);

double barrier_value(const TimeVaryingBarrier& b, const Vector& x, double t);
TimeVaryingBarrier::Gradient barrier_gradients(const TimeVaryingBarrier& b, const Vector& x, double t);

struct FilterResult {
  Vector u;            ///< filtered and clamped to the input box
  Vector unclamped;    ///< QP solution before clamping
  bool active = false; ///< the barrier constraint modified u_nom
  bool saturated = false;
  /// a . unclamped + c, the constraint value before clamping.
  double residual = 0.0;
};

/// min ||u - u_nom|| s.t. dh/dx (f + g u) + dh/dt >= -alpha_gain * h, then
/// clamp to the input box. With a = g^T dh/dx and
/// c = dh/dx . f + dh/dt + alpha_gain * h the solution is the projection of
/// u_nom onto the halfspace a . u + c >= 0. When a = 0 the input cannot move
/// the constraint and u_nom is returned.
FilterResult filter_input(const TimeVaryingBarrier& b, const ControlAffineSystem& sys,
                          const Vector& x, double t, const Vector& u_nom, double alpha_gain = 2.0);

/// {"rho0", "L", "weights", "expert": <csv path>}
std::string barrier_json(const TimeVaryingBarrier& b, const std::string& expert_csv_path);

}  // namespace stlshield
