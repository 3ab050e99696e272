#include "stlshield/predicate.hpp"

#include "stlshield/errors.hpp"
#include "stlshield/random.hpp"

#include <json.hpp>

#include <cmath>
#include <iostream>

namespace stlshield::stl {

namespace {

void require_finite(const Vector& v, const std::string& what) {
  if (v.size() == 0 || !v.allFinite()) throw InputError(what + " must be a finite, non-empty vector");
}

}  // namespace

Predicate Predicate::halfspace(std::string id, Vector normal, double offset) {
  require_finite(normal, "halfspace normal");
  const double len = normal.norm();
  if (!(len > 0.0)) throw InputError("halfspace normal must be non-zero");
  if (!std::isfinite(offset)) throw InputError("halfspace offset must be finite");
  Predicate p;
  p.id_ = std::move(id);
  p.kind_ = Kind::Halfspace;
  p.dim_ = normal.size();
  p.vec_ = normal / len;
  p.scalar_ = offset / len;
  return p;
}

Predicate Predicate::ball(std::string id, Vector center, double radius) {
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InputError("ball radius must be >= 0");
  Predicate p;
  p.id_ = std::move(id);
  p.kind_ = Kind::Ball;
  p.dim_ = center.size();
  p.vec_ = std::move(center);
  p.scalar_ = radius;
  return p;
}

Predicate Predicate::box_inf(std::string id, Vector center, double radius) {
  Predicate p = ball(std::move(id), std::move(center), radius);
  p.kind_ = Kind::BoxInf;
  return p;
}

Predicate Predicate::custom(std::string id, Eigen::Index dim, MarginFn h, double lipschitz) {
  if (dim <= 0) throw InputError("custom predicate dimension must be positive");
  if (!h) throw InputError("custom predicate needs a margin function");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw InputError("custom predicate Lipschitz constant must be positive");
  Predicate p;
  p.id_ = std::move(id);
  p.kind_ = Kind::Custom;
  p.dim_ = dim;
  p.lipschitz_ = lipschitz;
  p.fn_ = std::move(h);
#ifndef NDEBUG
  const double seen = audit_lipschitz(p, Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0),
                                      256, 0x5eedULL);
  if (seen > lipschitz * (1.0 + 1e-9))
    std::cerr << "warning: predicate '" << p.id_ << "' declares Lipschitz constant " << lipschitz
              << " but sampled pairs reach " << seen << "\n";
#endif
  return p;
}

double Predicate::margin(const Vector& x) const {
  if (x.size() != dim_)
    throw InputError("predicate '" + id_ + "' expects dimension " + std::to_string(dim_) +
                     ", got " + std::to_string(x.size()));
  switch (kind_) {
    case Kind::Halfspace: return scalar_ - vec_.dot(x);
    case Kind::Ball: return scalar_ - (x - vec_).norm();
    case Kind::BoxInf: return scalar_ - (x - vec_).lpNorm<Eigen::Infinity>();
    case Kind::Custom: return fn_(x);
  }
  return 0.0;
}

double predicate_margin(const Predicate& p, const Vector& x) { return p.margin(x); }

double audit_lipschitz(const Predicate& p, const Vector& lo, const Vector& hi, int pairs,
                       std::uint64_t seed) {
  Rng rng(seed);
  auto draw = [&] {
    Vector v(p.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(lo[i], hi[i]);
    return v;
  };
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vector x = draw();
    const Vector y = draw();
    const double d = (x - y).norm();
    if (d > 0.0) worst = std::max(worst, std::abs(p.margin(x) - p.margin(y)) / d);
  }
  return worst;
}

namespace {

Vector json_vector(const nlohmann::json& j, const std::string& key, const std::string& id) {
  if (!j.contains(key) || !j[key].is_array())
    throw InputError("predicate '" + id + "': missing array field '" + key + "'");
  const auto& arr = j[key];
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw InputError("predicate '" + id + "': '" + key + "' must hold numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

double json_number(const nlohmann::json& j, const std::string& key, const std::string& id) {
  if (!j.contains(key) || !j[key].is_number())
    throw InputError("predicate '" + id + "': missing numeric field '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

PredicateTable parse_predicates_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("predicate json: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("predicate json must be an array");
  PredicateTable table;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string() ||
        !entry.contains("kind") || !entry["kind"].is_string())
      throw InputError("predicate json entries need string 'id' and 'kind'");
    const auto id = entry["id"].get<std::string>();
    const auto kind = entry["kind"].get<std::string>();
    Predicate p = [&] {
      if (kind == "halfspace")
        return Predicate::halfspace(id, json_vector(entry, "normal", id), json_number(entry, "offset", id));
      if (kind == "ball")
        return Predicate::ball(id, json_vector(entry, "center", id), json_number(entry, "radius", id));
      if (kind == "box_inf")
        return Predicate::box_inf(id, json_vector(entry, "center", id), json_number(entry, "radius", id));
      throw InputError("predicate '" + id + "': unknown kind '" + kind + "'");
    }();
    if (!table.emplace(id, std::make_shared<const Predicate>(std::move(p))).second)
      throw InputError("predicate '" + id + "' declared twice");
  }
  return table;
}

}  // namespace stlshield::stl
