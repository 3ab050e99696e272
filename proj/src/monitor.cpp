#include "stlshield/monitor.hpp"

#include "stlshield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace stlshield::stl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
constexpr double kGridTol = 1e-9;

struct Offsets {
  long first;
  long last;
};

Offsets grid_offsets(double a, double b, double dt) {
  const auto first = static_cast<long>(std::ceil(a / dt - kGridTol));
  const auto last = static_cast<long>(std::floor(b / dt + kGridTol));
  if (first > last) {
    std::ostringstream os;
    os << "interval [" << a << ", " << b << "] contains no sample at spacing dt = " << dt;
    throw DomainError(os.str());
  }
  return {first, last};
}

/// Bottom-up evaluation over the whole grid, memoized on shared subtrees.
template <class Value, class Semantics>
class Evaluator {
 public:
  struct Trace {
    std::vector<Value> values;
    std::vector<char> clamped;
  };

  explicit Evaluator(const Signal& s) : s_(s), n_(static_cast<long>(s.size())) {}

  const Trace& eval(const Formula& f) {
    if (const auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    Trace out = compute(f);
    return memo_.emplace(f.id(), std::move(out)).first->second;
  }

 private:
  Trace compute(const Formula& f) {
    Trace out{std::vector<Value>(static_cast<std::size_t>(n_)),
              std::vector<char>(static_cast<std::size_t>(n_), 0)};
    switch (f.op()) {
      case Op::True:
        std::fill(out.values.begin(), out.values.end(), Semantics::top());
        break;
      case Op::Atom:
        if (f.dim() != s_.dim())
          throw InputError("predicate '" + f.predicate().id() + "' has dimension " +
                           std::to_string(f.dim()) + " but the signal has " +
                           std::to_string(s_.dim()));
        for (long i = 0; i < n_; ++i)
          out.values[idx(i)] = Semantics::atom(f.predicate().margin(s_[idx(i)]));
        break;
      case Op::Not: {
        const Trace& x = eval(f.lhs());
        for (long i = 0; i < n_; ++i) out.values[idx(i)] = Semantics::negate(x.values[idx(i)]);
        out.clamped = x.clamped;
        break;
      }
      case Op::And:
      case Op::Or: {
        const Trace& x = eval(f.lhs());
        const Trace& y = eval(f.rhs());
        const bool conj = f.op() == Op::And;
        for (long i = 0; i < n_; ++i) {
          const auto k = idx(i);
          out.values[k] = conj ? Semantics::meet(x.values[k], y.values[k])
                               : Semantics::join(x.values[k], y.values[k]);
          out.clamped[k] = x.clamped[k] || y.clamped[k];
        }
        break;
      }
      case Op::Until: until(f, out); break;
    }
    return out;
  }

  void until(const Formula& f, Trace& out) {
    const Trace& x = eval(f.lhs());
    const Trace& y = eval(f.rhs());
    const Offsets off = grid_offsets(f.lower(), f.upper(), s_.dt());
    for (long i = 0; i < n_; ++i) {
      const long lo = i + off.first;
      const long hi = std::min(i + off.last, n_ - 1);
      char clamped = i + off.last > n_ - 1;
      if (lo > n_ - 1) {
        out.values[idx(i)] = Semantics::undefined();
        out.clamped[idx(i)] = 1;
        continue;
      }
      out.values[idx(i)] = Semantics::until(x.values, y.values, i, lo, hi);
      for (long j = i; j <= hi; ++j) clamped = clamped || x.clamped[idx(j)];
      for (long j = lo; j <= hi; ++j) clamped = clamped || y.clamped[idx(j)];
      out.clamped[idx(i)] = clamped;
    }
  }

  static std::size_t idx(long i) { return static_cast<std::size_t>(i); }

  const Signal& s_;
  long n_;
  std::unordered_map<const void*, Trace> memo_;
};

struct Quantitative {
  static double top() { return kInf; }
  static double undefined() { return kUndefined; }
  static double atom(double margin) { return margin; }
  static double negate(double v) { return -v; }
  static double meet(double x, double y) {
    if (std::isnan(x) || std::isnan(y)) return kUndefined;
    return std::min(x, y);
  }
  static double join(double x, double y) {
    if (std::isnan(x) || std::isnan(y)) return kUndefined;
    return std::max(x, y);
  }
  static double until(const std::vector<double>& x, const std::vector<double>& y, long i, long lo,
                      long hi) {
    double running = kInf;
    for (long j = i; j < lo; ++j) running = meet(running, x[static_cast<std::size_t>(j)]);
    double best = -kInf;
    for (long j = lo; j <= hi; ++j) {
      running = meet(running, x[static_cast<std::size_t>(j)]);
      best = join(best, meet(y[static_cast<std::size_t>(j)], running));
    }
    return best;
  }
};

struct Boolean {
  static signed char top() { return 1; }
  static signed char undefined() { return -1; }
  static signed char atom(double margin) { return margin >= 0.0 ? 1 : 0; }
  static signed char negate(signed char v) { return v < 0 ? v : static_cast<signed char>(1 - v); }
  static signed char meet(signed char x, signed char y) {
    if (x < 0 || y < 0) return -1;
    return std::min(x, y);
  }
  static signed char join(signed char x, signed char y) {
    if (x < 0 || y < 0) return -1;
    return std::max(x, y);
  }
  static signed char until(const std::vector<signed char>& x, const std::vector<signed char>& y,
                           long /*i*/, long lo, long hi) {
    signed char all_x = 1;
    signed char found = 0;
    for (long j = lo; j <= hi; ++j) {
      all_x = meet(all_x, x[static_cast<std::size_t>(j)]);
      found = join(found, meet(y[static_cast<std::size_t>(j)], all_x));
    }
    return found;
  }
};

long sample_index(const Signal& s, double t) {
  const long k = s.grid_index(t);
  if (k < 0) {
    std::ostringstream os;
    os << "evaluation time " << t << " is not a sample time of the signal (t0 = " << s.t0()
       << ", dt = " << s.dt() << ", horizon = " << s.horizon() << ")";
    throw DomainError(os.str());
  }
  return k;
}

[[noreturn]] void undefined_at(double t) {
  std::ostringstream os;
  os << "formula windows at time " << t << " run past the end of the signal";
  throw DomainError(os.str());
}

}  // namespace

RobustnessTrace robustness_trace(const Formula& f, const Signal& s) {
  Evaluator<double, Quantitative> ev(s);
  const auto& tr = ev.eval(f);
  return {tr.values, tr.clamped};
}

SatisfactionTrace satisfaction_trace(const Formula& f, const Signal& s) {
  Evaluator<signed char, Boolean> ev(s);
  const auto& tr = ev.eval(f);
  return {tr.values, tr.clamped};
}

double eval_robustness(const Formula& f, const Signal& s, double t) {
  const auto k = static_cast<std::size_t>(sample_index(s, t));
  const double v = robustness_trace(f, s).values[k];
  if (std::isnan(v)) undefined_at(t);
  return v;
}

bool eval_boolean(const Formula& f, const Signal& s, double t) {
  const auto k = static_cast<std::size_t>(sample_index(s, t));
  const signed char v = satisfaction_trace(f, s).values[k];
  if (v < 0) undefined_at(t);
  return v == 1;
}

std::optional<double> until_witness(const Formula& f, const Signal& s, double t) {
  if (f.op() != Op::Until) throw InputError("until_witness needs an Until formula");
  const long i = sample_index(s, t);
  const long n = static_cast<long>(s.size());
  const auto x = robustness_trace(f.lhs(), s).values;
  const auto y = robustness_trace(f.rhs(), s).values;
  const Offsets off = grid_offsets(f.lower(), f.upper(), s.dt());
  const long lo = i + off.first;
  const long hi = std::min(i + off.last, n - 1);
  if (lo > n - 1) return std::nullopt;
  double running = kInf;
  for (long j = i; j < lo; ++j) running = std::min(running, x[static_cast<std::size_t>(j)]);
  double best = -kInf;
  std::optional<double> at;
  for (long j = lo; j <= hi; ++j) {
    running = std::min(running, x[static_cast<std::size_t>(j)]);
    const double v = std::min(y[static_cast<std::size_t>(j)], running);
    if (std::isnan(v)) return std::nullopt;
    if (!at || v > best) {
      best = v;
      at = s.time_at(static_cast<std::size_t>(j));
    }
  }
  return at;
}

}  // namespace stlshield::stl
