#include "oracles.hpp"

#include "stlshield/errors.hpp"
#include "stlshield/signal.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace stlshield;

namespace {

Signal constant(Vector v, std::size_t n = 11, double dt = 0.5) {
  return Signal(0.0, dt, std::vector<Vector>(n, std::move(v)));
}

Vector v1(double x) { return Vector{{x}}; }
Vector v2(double x, double y) { return Vector{{x, y}}; }

}  // namespace

TEST_CASE("sample_at interpolates and rejects times outside the horizon") {
  const Signal c = constant(v2(1, 2));
  CHECK(sample_at(c, 0.0) == v2(1, 2));
  CHECK(sample_at(c, 3.3) == v2(1, 2));

  const Signal ramp(0.0, 1.0, {v1(0), v1(2)});
  CHECK(sample_at(ramp, 0.5)(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sample_at(ramp, 2.0), DomainError);
  CHECK_THROWS_AS(sample_at(ramp, -0.1), DomainError);
}

TEST_CASE("grid samples come back bit-exact") {
  Rng rng(7);
  const Signal s = oracle::random_signal(rng, 3, 200, 1.0 / 30.0, 0.7);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Vector x = s.at(s.t0() + static_cast<double>(k) * s.dt());
    CHECK(x == s[k]);
  }
}

TEST_CASE("signal construction is validated") {
  CHECK_THROWS_AS(Signal(0.0, 0.0, {v1(0), v1(1)}), InputError);
  CHECK_THROWS_AS(Signal(0.0, 0.1, {v1(0)}), InputError);
  CHECK_THROWS_AS(Signal(0.0, 0.1, {v1(0), v2(1, 1)}), InputError);
  CHECK_THROWS_AS(WeightMatrix(Vector{{0.0, 0.0}}), InputError);
  CHECK_THROWS_AS(WeightMatrix(Vector{{1.0, -1.0}}), InputError);
}

TEST_CASE("weighted_norm") {
  CHECK(weighted_norm(Vector{{3, 4, 7}}, WeightMatrix(Vector{{1, 1, 0}})) == 5.0);
  CHECK(weighted_norm(Vector::Zero(3), WeightMatrix::identity(3)) == 0.0);
  CHECK(weighted_norm(v2(3, 4), WeightMatrix::identity(2)) == 5.0);
  CHECK_THROWS_AS(weighted_norm(v2(3, 4), WeightMatrix::identity(3)), InputError);

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vector v = Vector::Random(4) * 5.0;
    Vector q(4);
    for (int k = 0; k < 4; ++k) q(k) = rng.uniform();
    q(0) = std::max(q(0), 1e-3);
    CHECK(weighted_norm(v, WeightMatrix(q)) <= v.norm() + 1e-12);
  }
}

TEST_CASE("semi_norm examples") {
  CHECK(semi_norm(constant(v2(3, 4)), 0.0, 5.0, WeightMatrix::identity(2)).value == 5.0);
  const Signal ramp(0.0, 1.0, {v2(0, 0), v2(1, 0), v2(2, 0)});
  CHECK(semi_norm(ramp, 0.0, 2.0, WeightMatrix::identity(2)).value == 2.0);
  CHECK(semi_norm(ramp, 0.25, 1.5, WeightMatrix::identity(2)).value == doctest::Approx(1.5));
  CHECK_THROWS_AS(semi_norm(ramp, 1.0, 0.5, WeightMatrix::identity(2)), InputError);
  CHECK_THROWS_AS(semi_norm(ramp, 3.0, 4.0, WeightMatrix::identity(2)), DomainError);

  const auto clamped = semi_norm(ramp, 1.0, 9.0, WeightMatrix::identity(2));
  CHECK(clamped.clamped);
  CHECK(clamped.value == 2.0);
  CHECK_FALSE(semi_norm(ramp, 0.0, 2.0, WeightMatrix::identity(2)).clamped);
}

TEST_CASE("semi_norm matches an exhaustive scan") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index dim = rng.range(1, 3);
    const Signal s = oracle::random_signal(rng, dim, static_cast<std::size_t>(rng.range(2, 60)), 0.05);
    double a = rng.uniform(0.0, s.horizon());
    double b = rng.uniform(0.0, s.horizon());
    if (a > b) std::swap(a, b);
    Vector q(dim);
    for (Eigen::Index k = 0; k < dim; ++k) q(k) = rng.uniform(0.1, 2.0);
    CHECK(semi_norm(s, a, b, WeightMatrix(q)).value == doctest::Approx(oracle::window_max(s, a, b, q)).epsilon(1e-12));
    const auto full = semi_norm(s, s.t0(), s.horizon(), WeightMatrix::identity(dim));
    double scan = 0.0;
    for (const auto& x : s.samples()) scan = std::max(scan, x.norm());
    CHECK(full.value == doctest::Approx(scan).epsilon(1e-12));
  }
}

TEST_CASE("semi_norm is homogeneous and subadditive") {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const Signal s = oracle::random_signal(rng, 2, 40, 0.1);
    const Signal z = oracle::random_signal(rng, 2, 40, 0.1);
    const double lambda = rng.uniform(-4, 4);
    const double a = rng.uniform(0.0, 1.5), b = a + rng.uniform(0.0, 2.0);
    const WeightMatrix q(Vector{{1.0, rng.uniform(0.0, 1.0)}});
    const double ns = semi_norm(s, a, b, q).value;
    const double nz = semi_norm(z, a, b, q).value;
    CHECK(std::abs(semi_norm(scaled(s, lambda), a, b, q).value - std::abs(lambda) * ns) <= 1e-9);
    std::vector<Vector> sum;
    for (std::size_t k = 0; k < s.size(); ++k) sum.push_back(s[k] + z[k]);
    CHECK(semi_norm(Signal(0.0, 0.1, sum), a, b, q).value <= ns + nz + 1e-9);
  }
}

TEST_CASE("signal_difference") {
  Rng rng(2);
  const Signal s = oracle::random_signal(rng, 2, 30, 0.1);
  const Signal zero = signal_difference(s, s);
  for (const auto& x : zero.samples()) CHECK(x.norm() == 0.0);

  const Signal d = signal_difference(constant(v1(2)), constant(v1(1)));
  for (const auto& x : d.samples()) CHECK(x(0) == 1.0);

  CHECK_THROWS_AS(signal_difference(constant(v1(2)), constant(v2(1, 1))), InputError);
  const Signal late(100.0, 0.5, {v1(0), v1(1)});
  CHECK_THROWS_AS(signal_difference(constant(v1(2)), late), InputError);

  // Mixed grids resample onto the finer spacing.
  const Signal coarse(0.0, 1.0, {v1(0), v1(2), v1(4)});
  const Signal fine(0.0, 0.5, {v1(0), v1(0), v1(0), v1(0), v1(0)});
  const Signal mixed = signal_difference(coarse, fine);
  CHECK(mixed.dt() == 0.5);
  CHECK(mixed.at(1.5)(0) == doctest::Approx(3.0));
}

TEST_CASE("csv round trip and validation") {
  Rng rng(9);
  const Signal s = oracle::random_signal(rng, 2, 25, 0.1, 1.0);
  std::stringstream io;
  write_signal_csv(io, s);
  const Signal back = read_signal_csv(io);
  REQUIRE(back.size() == s.size());
  CHECK(back.dt() == doctest::Approx(s.dt()).epsilon(1e-12));
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(back[k] == s[k]);

  std::istringstream uneven("t,x1\n0,1\n0.1,2\n0.3,3\n");
  CHECK_THROWS_AS(read_signal_csv(uneven), InputError);
  std::istringstream header("time,x1\n0,1\n1,2\n");
  CHECK_THROWS_AS(read_signal_csv(header), InputError);
  std::istringstream junk("t,x1\n0,1\n1,abc\n");
  CHECK_THROWS_AS(read_signal_csv(junk), InputError);
}
