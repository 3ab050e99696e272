#include "stlshield/certificate.hpp"

#include "stlshield/errors.hpp"

#include <json.hpp>

#include <algorithm>

namespace stlshield::stl {

namespace {

struct Bound {
  double L;
  double a;
  double b;
};

Bound bound(const Formula& f) {
  switch (f.op()) {
    case Op::True: return {0.0, 0.0, 0.0};
    case Op::Atom: return {f.predicate().lipschitz(), 0.0, 0.0};
    case Op::Not: return bound(f.lhs());
    case Op::And:
    case Op::Or: {
      const Bound x = bound(f.lhs());
      const Bound y = bound(f.rhs());
      return {std::max(x.L, y.L), std::min(x.a, y.a), std::max(x.b, y.b)};
    }
    case Op::Until: {
      const Bound x = bound(f.lhs());
      const Bound y = bound(f.rhs());
      return {std::max(x.L, y.L), std::min(x.a, y.a + f.lower()), f.upper() + std::max(x.b, y.b)};
    }
  }
  return {0.0, 0.0, 0.0};
}

}  // namespace

LipschitzCertificate certify(const Formula& f, const WeightMatrix& weights) {
  if (f.dim() != 0 && f.dim() != weights.dim())
    throw InputError("certify: weights have dimension " + std::to_string(weights.dim()) +
                     " but the formula's predicates have " + std::to_string(f.dim()));
  const Bound b = bound(f);
  return {b.L, b.a, b.b, weights};
}

std::string certificate_json(const LipschitzCertificate& cert) {
  nlohmann::ordered_json j;
  j["L"] = cert.L;
  j["window"] = {cert.a, cert.b};
  auto w = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < cert.weights.dim(); ++i) w.push_back(cert.weights.diag()[i]);
  j["weights"] = std::move(w);
  return j.dump();
}

LipschitzCertificate parse_certificate_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& w = j.at("weights");
    Vector diag(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) diag[static_cast<Eigen::Index>(i)] = w[i].get<double>();
    const auto& win = j.at("window");
    if (win.size() != 2) throw InputError("certificate window must have two entries");
    LipschitzCertificate cert{j.at("L").get<double>(), win[0].get<double>(), win[1].get<double>(),
                              WeightMatrix(diag)};
    if (cert.L < 0.0 || cert.a > cert.b) throw InputError("certificate needs L >= 0 and a <= b");
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("certificate json: ") + e.what());
  }
}

}  // namespace stlshield::stl
