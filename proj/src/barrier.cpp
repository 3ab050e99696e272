#include "stlshield/barrier.hpp"

#include "stlshield/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace stlshield {

namespace {

Signal central_differences(const Signal& s) {
  const std::size_t n = s.size();
  std::vector<Vector> rate(n);
  rate.front() = (s[1] - s[0]) / s.dt();
  rate.back() = (s[n - 1] - s[n - 2]) / s.dt();
  for (std::size_t k = 1; k + 1 < n; ++k) rate[k] = (s[k + 1] - s[k - 1]) / (2.0 * s.dt());
  return Signal(s.t0(), s.dt(), std::move(rate));
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string("non-finite ") + what);
}

}  // namespace

TimeVaryingBarrier::TimeVaryingBarrier(Signal expert, double rho0, double lipschitz,
                                       WeightMatrix weights)
    : expert_(std::move(expert)),
      rate_(central_differences(expert_)),
      rho0_(rho0),
      lipschitz_(lipschitz),
      weights_(std::move(weights)) {
  if (!std::isfinite(rho0_)) throw NumericError("barrier rho0 must be finite");
  if (rho0_ < 0.0) throw InputError("expert does not satisfy specification (rho0 < 0)");
  if (!(lipschitz_ >= 0.0) || !std::isfinite(lipschitz_))
    throw InputError("barrier Lipschitz constant must be finite and >= 0");
  if (weights_.dim() != expert_.dim())
    throw InputError("barrier weights have dimension " + std::to_string(weights_.dim()) +
                     " but the expert has " + std::to_string(expert_.dim()));
}

Vector TimeVaryingBarrier::offset(const Vector& x, double t) const {
  if (x.size() != expert_.dim())
    throw InputError("barrier state has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(expert_.dim()));
  return x - expert_.at(t);
}

double TimeVaryingBarrier::value(const Vector& x, double t) const {
  const Vector e = offset(x, t);
  return rho0_ * rho0_ -
         lipschitz_ * lipschitz_ * (weights_.diag().array() * e.array().square()).sum();
}

Vector TimeVaryingBarrier::expert_velocity(double t) const {
  if (const long k = expert_.grid_index(t); k >= 0) return rate_[static_cast<std::size_t>(k)];
  expert_.at(t);  // range check
  const double r = (t - expert_.t0()) / expert_.dt();
  auto k = static_cast<std::size_t>(std::floor(r));
  k = std::min(k, expert_.size() - 2);
  return (expert_[k + 1] - expert_[k]) / expert_.dt();
}

TimeVaryingBarrier::Gradient TimeVaryingBarrier::gradients(const Vector& x, double t) const {
  const Vector e = offset(x, t);
  const double l2 = lipschitz_ * lipschitz_;
  const Vector qe = weights_.diag().cwiseProduct(e);
  return {-2.0 * l2 * qe, 2.0 * l2 * qe.dot(expert_velocity(t))};
}

TimeVaryingBarrier synthesize(Signal expert, double rho0, const stl::LipschitzCertificate& cert) {
  return TimeVaryingBarrier(std::move(expert), rho0, cert.L, cert.weights);
}

double barrier_value(const TimeVaryingBarrier& b, const Vector& x, double t) { return b.value(x, t); }

TimeVaryingBarrier::Gradient barrier_gradients(const TimeVaryingBarrier& b, const Vector& x,
                                               double t) {
  return b.gradients(x, t);
}

FilterResult filter_input(const TimeVaryingBarrier& b, const ControlAffineSystem& sys,
                          const Vector& x, double t, const Vector& u_nom, double alpha_gain) {
  if (!(alpha_gain > 0.0)) throw InputError("alpha_gain must be positive");
  if (u_nom.size() != sys.m)
    throw InputError("nominal input has dimension " + std::to_string(u_nom.size()) +
                     ", system expects " + std::to_string(sys.m));
  require_finite(x, "state");
  require_finite(u_nom, "nominal input");
  const Vector f = sys.drift(x);
  const Matrix g = sys.forcing(x);
  require_finite(f, "drift");
  if (!g.allFinite()) throw NumericError("non-finite forcing matrix");

  const auto grad = b.gradients(x, t);
  const Vector a = g.transpose() * grad.dx;
  const double c = grad.dx.dot(f) + grad.dt + alpha_gain * b.value(x, t);
  if (!a.allFinite() || !std::isfinite(c)) throw NumericError("non-finite barrier constraint");

  FilterResult out;
  out.unclamped = u_nom;
  const double slack = a.dot(u_nom) + c;
  const double a2 = a.squaredNorm();
  if (slack < 0.0 && a2 > 0.0) {
    out.unclamped = u_nom - (slack / a2) * a;
    out.active = true;
  }
  require_finite(out.unclamped, "filtered input");
  out.residual = a.dot(out.unclamped) + c;
  out.u = sys.input_box.clamp(out.unclamped);
  out.saturated = (out.u - out.unclamped).cwiseAbs().maxCoeff() > 0.0;
  return out;
}

std::string barrier_json(const TimeVaryingBarrier& b, const std::string& expert_csv_path) {
  nlohmann::ordered_json j;
  j["rho0"] = b.rho0();
  j["L"] = b.lipschitz();
  auto w = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < b.weights().dim(); ++i) w.push_back(b.weights().diag()[i]);
  j["weights"] = std::move(w);
  j["expert"] = expert_csv_path;
  return j.dump();
}

}  // namespace stlshield
