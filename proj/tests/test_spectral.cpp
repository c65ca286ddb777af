#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ictk/spectral.hpp"

using namespace ictk;

namespace {

double max_diff(const PhysicalField& a, const PhysicalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

bool bit_equal(const SpectralField& a, const SpectralField& b) {
  if (a.raw().size() != b.raw().size()) return false;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    if (a.raw()[i] != b.raw()[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("transform roundtrip and coefficient convention") {
  const Grid2D g(64);
  const SpectralField f = random_field(g, Rank::Vector, 7, 20);
  CHECK(max_diff(to_spectral(to_physical(f)), f) < 1e-13);
  CHECK(hermitian_defect(f) == 0.0);

  // sin(3 x1 + 2 x2) = (e^{i xi.x} - e^{-i xi.x}) / 2i
  const PhysicalField s = sample(g, Rank::Scalar, [](double x1, double x2, double* o) { o[0] = std::sin(3 * x1 + 2 * x2); });
  const SpectralField c = to_spectral(s);
  CHECK(std::abs(c.at(0, 3, 2) - cplx(0.0, -0.5)) < 1e-14);
  CHECK(std::abs(c.at(0, g.index(-3), g.index(-2)) - cplx(0.0, 0.5)) < 1e-14);
}

TEST_CASE("heat semigroup damps each mode by exp(-|xi|^2 t)") {
  const Grid2D g(32);
  const double t = 0.037;
  const PhysicalField s = sample(g, Rank::Scalar, [](double x1, double x2, double* o) {
    o[0] = std::cos(2 * x1) + 0.5 * std::sin(x1 - 3 * x2);
  });
  const PhysicalField want = sample(g, Rank::Scalar, [t](double x1, double x2, double* o) {
    o[0] = std::exp(-4 * t) * std::cos(2 * x1) + 0.5 * std::exp(-10 * t) * std::sin(x1 - 3 * x2);
  });
  CHECK(max_diff(to_physical(heat_semigroup(to_spectral(s), t)), want) < 1e-14);

  const SpectralField f = random_field(g, Rank::Scalar, 3, 10);
  CHECK(max_diff(heat_semigroup(heat_semigroup(f, 0.01), 0.02), heat_semigroup(f, 0.03)) < 1e-14);
}

TEST_CASE("Leray projection") {
  const Grid2D g(64);
  const SpectralField v = random_field(g, Rank::Vector, 11, 20);
  const SpectralField Pv = leray_project(v);
  CHECK(max_abs_coeff(div(Pv)) < 1e-12);
  CHECK(max_diff(leray_project(Pv), Pv) < 1e-14);
  const SpectralField gs = grad(random_field(g, Rank::Scalar, 12, 20));
  CHECK(max_abs_coeff(leray_project(gs)) < 1e-12);
  // the remainder is a gradient: curl (v - Pv) = 0
  const SpectralField r = v - Pv;
  const SpectralField c = directional_derivative(r.component(1), 1, 0) - directional_derivative(r.component(0), 0, 1);
  CHECK(max_abs_coeff(c) < 1e-12);
}

TEST_CASE("derivatives against sampled closed forms") {
  const Grid2D g(32);
  const PhysicalField s = sample(g, Rank::Scalar, [](double x1, double x2, double* o) { o[0] = std::sin(x1) * std::cos(2 * x2); });
  const PhysicalField lap = sample(g, Rank::Scalar, [](double x1, double x2, double* o) { o[0] = -5 * std::sin(x1) * std::cos(2 * x2); });
  const PhysicalField gr = sample(g, Rank::Vector, [](double x1, double x2, double* o) {
    o[0] = std::cos(x1) * std::cos(2 * x2);
    o[1] = -2 * std::sin(x1) * std::sin(2 * x2);
  });
  const SpectralField f = to_spectral(s);
  CHECK(max_diff(to_physical(laplacian(f)), lap) < 1e-12);
  CHECK(max_diff(to_physical(grad(f)), gr) < 1e-13);
  CHECK(max_diff(to_physical(inv_laplacian(laplacian(f))), s) < 1e-14);
  CHECK(max_diff(to_physical(div(grad(f))), lap) < 1e-12);
}

TEST_CASE("parallel and serial kernels agree bit for bit") {
  const Grid2D g(64);
  const SpectralField v = random_field(g, Rank::Vector, 5, 30);
  const SpectralField T = op_D(v, Exec::Serial);
  CHECK(bit_equal(op_D(v, Exec::Parallel), T));
  CHECK(bit_equal(leray_project(v, Exec::Parallel), leray_project(v, Exec::Serial)));
  CHECK(bit_equal(op_newD(v, Exec::Parallel), op_newD(v, Exec::Serial)));
  CHECK(bit_equal(op_R(v, Exec::Parallel), op_R(v, Exec::Serial)));
  CHECK(bit_equal(op_Q(T, Exec::Parallel), op_Q(T, Exec::Serial)));
  CHECK(bit_equal(heat_semigroup(v, 0.1, Exec::Parallel), heat_semigroup(v, 0.1, Exec::Serial)));
  CHECK(bit_equal(littlewood_paley(v, 8, Exec::Parallel), littlewood_paley(v, 8, Exec::Serial)));
}

TEST_CASE("Littlewood-Paley shells sum to the identity away from the zero mode") {
  const Grid2D g(64);
  const SpectralField f = random_field(g, Rank::Scalar, 9, 30);
  SpectralField sum(g, Rank::Scalar);
  for (long long N = 1; N <= 64; N *= 2) sum += littlewood_paley(f, N);
  CHECK(max_diff(sum, drop_zero_mode(f)) < 1e-14);
  CHECK_THROWS_AS(littlewood_paley(f, 3), std::invalid_argument);
}

TEST_CASE("duhamel mode integral closed form") {
  const double mu = 5.0, lam = 2.0, t = 0.3;
  CHECK(duhamel_mode_integral(mu, lam, t) == doctest::Approx((std::exp(-lam * t) - std::exp(-mu * t)) / (mu - lam)).epsilon(1e-14));
  CHECK(duhamel_mode_integral(4.0, 4.0, t) == doctest::Approx(t * std::exp(-4.0 * t)).epsilon(1e-14));
  CHECK(duhamel_mode_integral(4.0, 4.0 + 1e-9, t) == doctest::Approx(t * std::exp(-4.0 * t)).epsilon(1e-8));
  CHECK_THROWS(duhamel_mode_integral(-1.0, 0.0, t));
}

TEST_CASE("norms of closed-form fields") {
  const Grid2D g(64);
  const PhysicalField one = sample(g, Rank::Scalar, [](double, double, double* o) { o[0] = 1.0; });
  CHECK(lp_norm(one, 2.0) == doctest::Approx(2 * kPi).epsilon(1e-14));
  const PhysicalField s = sample(g, Rank::Scalar, [](double x1, double, double* o) { o[0] = std::sin(x1); });
  // int sin^2 = 2 pi^2
  CHECK(lp_norm(s, 2.0) == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-13));
  CHECK(sup_norm(to_spectral(s)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid and rank mismatches throw") {
  const SpectralField a = random_field(Grid2D(16), Rank::Scalar, 1, 4);
  const SpectralField b = random_field(Grid2D(32), Rank::Scalar, 1, 4);
  CHECK_THROWS_AS(a + b, GridMismatch);
  CHECK_THROWS_AS(op_Q(a), RankMismatch);
}

TEST_CASE("snapshot roundtrip is exact") {
  const SpectralField f = random_field(Grid2D(32), Rank::SymTensor, 21, 12);
  const auto path = std::filesystem::temp_directory_path() / "ictk_snapshot_test.cff";
  write_snapshot(path.string(), f);
  const SpectralField r = read_snapshot(path.string());
  CHECK(r.rank() == Rank::SymTensor);
  CHECK(bit_equal(r, f));
  std::filesystem::remove(path);
}
