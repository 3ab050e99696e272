#pragma once

#include "stlshield/formula.hpp"
#include "stlshield/signal.hpp"

#include <string>
#include <string_view>

namespace stlshield::stl {

/// |rho(s, 0) - rho(z, 0)| <= L * sup_{t in [a, b]} ||s(t) - z(t)||_Q
struct LipschitzCertificate {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
  WeightMatrix weights = WeightMatrix::identity(1);
};

/// Compositional bound by structural recursion:
///   atom          (L_atom, [0, 0])
///   TRUE          (0, [0, 0])
///   !f            same as f
///   f & g, f | g  (max L, hull of both windows)
///   f U[a,b] g    (max L, [min(a_f, a + a_g), b + max(b_f, b_g)])
/// The bound is conservative by construction.
LipschitzCertificate certify(const Formula& f, const WeightMatrix& weights);

/// {"L": ..., "window": [a, b], "weights": [...]}
std::string certificate_json(const LipschitzCertificate& cert);
LipschitzCertificate parse_certificate_json(std::string_view text);

}  // namespace stlshield::stl
