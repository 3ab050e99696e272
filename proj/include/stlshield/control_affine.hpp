#pragma once

#include "stlshield/signal.hpp"

#include <functional>

namespace stlshield {

/// Per-coordinate input bounds [lo_i, hi_i].
struct InputBox {
  Vector lo;
  Vector hi;

  Vector clamp(const Vector& u) const { return u.cwiseMax(lo).cwiseMin(hi); }
};

/// xdot = f(x) + g(x) u
struct ControlAffineSystem {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::function<Vector(const Vector&)> drift;
  std::function<Matrix(const Vector&)> forcing;
  InputBox input_box;
  /// State coordinate holding an angle kept in (-pi, pi], or -1 for none.
  Eigen::Index heading_index = -1;

  Vector xdot(const Vector& x, const Vector& u) const { return drift(x) + forcing(x) * u; }
};

}  // namespace stlshield
