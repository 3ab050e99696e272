#include "stlshield/signal.hpp"

#include "number_format.hpp"
#include "stlshield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace stlshield {

namespace {

constexpr double kGridTol = 1e-9;

std::string window_str(double a, double b) {
  std::ostringstream os;
  os << "[" << a << ", " << b << "]";
  return os.str();
}

}  // namespace

WeightMatrix::WeightMatrix(Vector diag) : diag_(std::move(diag)) {
  if (diag_.size() == 0) throw InputError("weight matrix must have at least one entry");
  bool any_positive = false;
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    if (!(diag_[i] >= 0.0) || !std::isfinite(diag_[i]))
      throw InputError("weight matrix entries must be finite and non-negative");
    any_positive = any_positive || diag_[i] > 0.0;
  }
  if (!any_positive) throw InputError("weight matrix needs at least one positive entry");
}

WeightMatrix WeightMatrix::identity(Eigen::Index n) { return WeightMatrix(Vector::Ones(n)); }

double weighted_norm(const Vector& v, const WeightMatrix& q) {
  if (v.size() != q.dim())
    throw InputError("weighted_norm: vector has dimension " + std::to_string(v.size()) +
                     ", weights have " + std::to_string(q.dim()));
  return std::sqrt((q.diag().array() * v.array().square()).sum());
}

Signal::Signal(double t0, double dt, std::vector<Vector> samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InputError("signal dt must be positive");
  if (!std::isfinite(t0_)) throw InputError("signal t0 must be finite");
  if (samples_.size() < 2) throw InputError("signal needs at least two samples");
  const auto n = samples_.front().size();
  if (n == 0) throw InputError("signal samples must be non-empty vectors");
  for (const auto& x : samples_)
    if (x.size() != n) throw InputError("signal samples have inconsistent dimensions");
}

long Signal::grid_index(double t) const {
  const double r = (t - t0_) / dt_;
  const double k = std::round(r);
  if (std::abs(r - k) > kGridTol || k < 0 || k > static_cast<double>(samples_.size() - 1))
    return -1;
  return static_cast<long>(k);
}

Vector Signal::at(double t) const {
  const double h = horizon();
  const double slack = kGridTol * dt_;
  if (!(t >= t0_ - slack && t <= h + slack)) {
    std::ostringstream os;
    os << "time " << t << " outside signal horizon " << window_str(t0_, h);
    throw DomainError(os.str());
  }
  if (const long k = grid_index(t); k >= 0) return samples_[static_cast<std::size_t>(k)];
  const double r = (t - t0_) / dt_;
  auto k = static_cast<std::size_t>(std::floor(r));
  k = std::min(k, samples_.size() - 2);
  const double frac = r - static_cast<double>(k);
  return (1.0 - frac) * samples_[k] + frac * samples_[k + 1];
}

Vector sample_at(const Signal& s, double t) { return s.at(t); }

WindowedNorm semi_norm(const Signal& s, double a, double b, const WeightMatrix& q) {
  if (a > b) throw InputError("semi_norm: empty window " + window_str(a, b));
  const double slack = kGridTol * s.dt();
  if (a > s.horizon() + slack || b < s.t0() - slack)
    throw DomainError("semi_norm: window " + window_str(a, b) + " lies outside horizon " +
                      window_str(s.t0(), s.horizon()));
  WindowedNorm out;
  if (a < s.t0() - slack || b > s.horizon() + slack) out.clamped = true;
  a = std::clamp(a, s.t0(), s.horizon());
  b = std::clamp(b, s.t0(), s.horizon());

  double best = std::max(weighted_norm(s.at(a), q), weighted_norm(s.at(b), q));
  const double first = std::ceil((a - s.t0()) / s.dt() - kGridTol);
  const double last = std::floor((b - s.t0()) / s.dt() + kGridTol);
  for (double k = std::max(first, 0.0); k <= last && k < static_cast<double>(s.size()); k += 1.0)
    best = std::max(best, weighted_norm(s[static_cast<std::size_t>(k)], q));
  out.value = best;
  return out;
}

Signal signal_difference(const Signal& s, const Signal& z) {
  if (s.dim() != z.dim())
    throw InputError("signal_difference: dimensions " + std::to_string(s.dim()) + " and " +
                     std::to_string(z.dim()) + " differ");
  const double start = std::max(s.t0(), z.t0());
  const double end = std::min(s.horizon(), z.horizon());
  const double dt = std::min(s.dt(), z.dt());
  const double slack = kGridTol * dt;
  if (end - start < dt - slack)
    throw InputError("signal_difference: horizons " + window_str(s.t0(), s.horizon()) + " and " +
                     window_str(z.t0(), z.horizon()) + " do not overlap by a full sample");
  const auto count = static_cast<std::size_t>(std::floor((end - start) / dt + kGridTol)) + 1;
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = std::min(start + static_cast<double>(k) * dt, end);
    out.push_back(s.at(t) - z.at(t));
  }
  return Signal(start, dt, std::move(out));
}

Signal scaled(const Signal& s, double lambda) {
  std::vector<Vector> out;
  out.reserve(s.size());
  for (const auto& x : s.samples()) out.push_back(lambda * x);
  return Signal(s.t0(), s.dt(), std::move(out));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto begin = cell.find_first_not_of(" \t\r");
    const auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos ? std::string{}
                                               : cell.substr(begin, end - begin + 1));
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw InputError("signal csv: bad number '" + cell + "' on line " + std::to_string(row));
  return v;
}

}  // namespace

Signal read_signal_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("signal csv: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t")
    throw InputError("signal csv: header must be t,x1,...,xn");
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i))
      throw InputError("signal csv: expected column x" + std::to_string(i) + ", found '" +
                       header[i] + "'");
  const auto n = static_cast<Eigen::Index>(header.size() - 1);

  std::vector<double> times;
  std::vector<Vector> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InputError("signal csv: line " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " columns, expected " +
                       std::to_string(header.size()));
    times.push_back(parse_cell(cells[0], lineno));
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = parse_cell(cells[static_cast<std::size_t>(i) + 1], lineno);
    samples.push_back(std::move(x));
  }
  if (samples.size() < 2) throw InputError("signal csv: need at least two rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw InputError("signal csv: times must be strictly increasing");
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double expected = times.front() + static_cast<double>(k) * dt;
    if (std::abs(times[k] - expected) > 1e-9 * dt)
      throw InputError("signal csv: non-uniform spacing at row " + std::to_string(k + 2));
  }
  return Signal(times.front(), dt, std::move(samples));
}

Signal read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open signal file " + path.string());
  return read_signal_csv(in);
}

void write_signal_csv(std::ostream& out, const Signal& s) {
  out << "t";
  for (Eigen::Index i = 1; i <= s.dim(); ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    out << detail::format_number(s.time_at(k));
    for (Eigen::Index i = 0; i < s.dim(); ++i) out << "," << detail::format_number(s[k][i]);
    out << "\n";
  }
}

}  // namespace stlshield
