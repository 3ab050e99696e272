#pragma once

#include "stlshield/signal.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace stlshield::stl {

/// State predicate mu(x) = (h(x) >= 0) with a Lipschitz-continuous margin h.
///
/// Built-in kinds use signed distances, so their margins are 1-Lipschitz in
/// the 2-norm. Halfspace normals are normalized on construction (the offset
/// is scaled with them, so the zero set is unchanged).
class Predicate {
 public:
  enum class Kind { Halfspace, Ball, BoxInf, Custom };
  using MarginFn = std::function<double(const Vector&)>;

  /// offset - normal . x >= 0
  static Predicate halfspace(std::string id, Vector normal, double offset);
  /// radius - ||x - center||_2 >= 0
  static Predicate ball(std::string id, Vector center, double radius);
  /// radius - ||x - center||_inf >= 0
  static Predicate box_inf(std::string id, Vector center, double radius);
  /// User margin with an asserted Lipschitz constant. Debug builds sample
  /// random point pairs and warn on stderr when the assertion looks false.
  static Predicate custom(std::string id, Eigen::Index dim, MarginFn h, double lipschitz);

  const std::string& id() const { return id_; }
  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double lipschitz() const { return lipschitz_; }

  /// Normal (halfspace) or center (ball, box_inf).
  const Vector& vector() const { return vec_; }
  /// Offset (halfspace) or radius (ball, box_inf).
  double scalar() const { return scalar_; }

  double margin(const Vector& x) const;

 private:
  Predicate() = default;

  std::string id_;
  Kind kind_ = Kind::Ball;
  Eigen::Index dim_ = 0;
  double lipschitz_ = 1.0;
  Vector vec_;
  double scalar_ = 0.0;
  MarginFn fn_;
};

double predicate_margin(const Predicate& p, const Vector& x);

/// Largest |h(x) - h(y)| / ||x - y|| seen over random pairs in the box [lo, hi].
double audit_lipschitz(const Predicate& p, const Vector& lo, const Vector& hi, int pairs,
                       std::uint64_t seed);

using PredicateTable = std::map<std::string, std::shared_ptr<const Predicate>, std::less<>>;

/// JSON array of {"id", "kind", ...}. Kinds and their parameters:
///   halfspace: normal, offset    ball: center, radius    box_inf: center, radius
PredicateTable parse_predicates_json(std::string_view text);

}  // namespace stlshield::stl
