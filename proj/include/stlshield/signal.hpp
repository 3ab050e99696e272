#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace stlshield {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Diagonal, non-negative weighting for ||x||_Q = sqrt(x^T Q x).
class WeightMatrix {
 public:
  explicit WeightMatrix(Vector diag);

  static WeightMatrix identity(Eigen::Index n);

  const Vector& diag() const { return diag_; }
  Eigen::Index dim() const { return diag_.size(); }

 private:
  Vector diag_;
};

double weighted_norm(const Vector& v, const WeightMatrix& q);

/// Uniformly sampled signal on [t0, t0 + (size-1)*dt], linearly interpolated
/// between samples. Immutable once constructed.
class Signal {
 public:
  Signal(double t0, double dt, std::vector<Vector> samples);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double horizon() const { return t0_ + static_cast<double>(samples_.size() - 1) * dt_; }
  Eigen::Index dim() const { return samples_.front().size(); }
  std::size_t size() const { return samples_.size(); }

  const Vector& operator[](std::size_t k) const { return samples_[k]; }
  const std::vector<Vector>& samples() const { return samples_; }

  /// Time of sample k.
  double time_at(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }

  /// Value at time t. Exact sample values at grid points, linear in between.
  Vector at(double t) const;

  /// Nearest sample index when t lies on the grid (within 1e-9 * dt), or -1.
  long grid_index(double t) const;

 private:
  double t0_;
  double dt_;
  std::vector<Vector> samples_;
};

Vector sample_at(const Signal& s, double t);

struct WindowedNorm {
  double value = 0.0;
  /// The requested window reached past the signal and was clamped to it.
  bool clamped = false;
};

/// sup over t in [a, b] of ||s(t)||_Q. The window is in absolute signal time.
/// Since s is piecewise linear, the supremum is attained on the grid points
/// inside the window or at the (interpolated) window endpoints.
WindowedNorm semi_norm(const Signal& s, double a, double b, const WeightMatrix& q);

/// Pointwise s - z on the overlap of both horizons, sampled at the finer dt.
Signal signal_difference(const Signal& s, const Signal& z);

/// Pointwise scaling (lambda * s), same grid.
Signal scaled(const Signal& s, double lambda);

/// CSV with header `t,x1,...,xn`. Rows must be uniformly spaced in t.
Signal read_signal_csv(std::istream& in);
Signal read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(std::ostream& out, const Signal& s);

}  // namespace stlshield
