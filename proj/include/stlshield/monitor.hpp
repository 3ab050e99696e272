#pragma once

#include "stlshield/formula.hpp"
#include "stlshield/signal.hpp"

#include <optional>
#include <vector>

namespace stlshield::stl {

/// Per-sample evaluation of a formula over a whole signal.
///
/// Dense-time quantifiers are discretized to the sample grid: an interval
/// [a, b] at sample i ranges over samples i + ceil(a/dt) .. i + floor(b/dt).
/// Windows running past the last sample are clamped (and flagged); a window
/// that starts past the last sample leaves the value undefined.
struct RobustnessTrace {
  std::vector<double> values;  ///< NaN where undefined
  std::vector<char> clamped;
};

struct SatisfactionTrace {
  std::vector<signed char> values;  ///< 1 true, 0 false, -1 undefined
  std::vector<char> clamped;
};

/// Quantitative semantics: atoms give their margin, TRUE gives +inf, Not
/// negates, And/Or take min/max, and
///   rho(f U[a,b] g, t) = max_{t' in [t+a, t+b]} min(rho(g, t'), min_{t'' in [t, t']} rho(f, t'')).
RobustnessTrace robustness_trace(const Formula& f, const Signal& s);

/// Boolean semantics; Until's universal part ranges over [t+a, t'].
SatisfactionTrace satisfaction_trace(const Formula& f, const Signal& s);

/// Robustness at time t (must be a sample time). Throws DomainError when t is
/// off the grid or the formula's windows leave the signal.
double eval_robustness(const Formula& f, const Signal& s, double t);

bool eval_boolean(const Formula& f, const Signal& s, double t);

/// Earliest t' attaining the maximum in an Until's robustness at time t.
std::optional<double> until_witness(const Formula& f, const Signal& s, double t);

}  // namespace stlshield::stl
