#include <doctest.h>

#include <cmath>
#include <random>

#include "ictk/geometry.hpp"

using namespace ictk;

TEST_CASE("direction sets are rational unit vectors with the expected layout") {
  const DirectionSets& s = direction_sets();
  REQUIRE(s.lambda_u.size() == 4);
  REQUIRE(s.lambda_b.size() == 12);
  CHECK(s.J == 16);
  for (const Direction& d : s.joint) CHECK(d.p * d.p + d.q * d.q == d.d * d.d);
  for (int a = 0; a < 4; ++a) {
    CHECK(s.lambda_b[a].p == s.lambda_u[a].p);
    CHECK(s.lambda_b[a + 4].p == -s.lambda_u[a].p);
    CHECK(s.lambda_b[a + 4].q == -s.lambda_u[a].q);
  }
  // the perpendicular tensors of lambda_u span the symmetric matrices
  const auto& L = sym_right_inverse();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double m = 0.0;
      for (int a = 0; a < 4; ++a) {
        const Sym2 o = Sym2::outer(s.lambda_u[a].perp());
        const double col[3] = {o.a11, o.a22, std::sqrt(2.0) * o.a12};
        m += col[r] * L[a][c];
      }
      CHECK(m == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("symmetric decomposition reconstructs and stays positive in the ball") {
  CHECK(eps_u() > 0.0);
  const SymDecomp id = sym_decompose(Sym2::identity());
  CHECK((sym_reconstruct(id) - Sym2::identity()).frobenius() < 1e-15);
  for (double c : id.coeffs) CHECK(c > 0.0);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 200; ++s) {
    double e[3] = {nd(rng), nd(rng), nd(rng)};
    const double len = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    // on the sphere of radius eps_u: the coefficients stay nonnegative
    const double r = eps_u() * (1.0 - 1e-12) / len;
    const Sym2 R{1.0 + r * e[0], 1.0 + r * e[1], r * e[2] / std::sqrt(2.0)};
    const SymDecomp d = sym_decompose(R);
    CHECK((sym_reconstruct(d) - R).frobenius() < 1e-13);
    for (double c : d.coeffs) CHECK(c >= -1e-13);
  }
}

TEST_CASE("out-of-ball inputs are rejected with their margin") {
  const Sym2 R{1.0 + 2.0 * eps_u(), 1.0, 0.0};
  try {
    sym_decompose(R);
    FAIL("expected OutOfBall");
  } catch (const OutOfBall& e) {
    CHECK(e.distance == doctest::Approx(2.0 * eps_u()));
    CHECK(e.margin < 0.0);
  }
}

TEST_CASE("tensor-vector decomposition identities") {
  const Sym2 R{1.02, 0.99, 0.01};
  for (Vec2 g : {Vec2{0.0, 0.0}, Vec2{3.0, 0.0}, Vec2{-1.2, 2.5}, Vec2{0.7, -0.4}}) {
    const TVDecomp t = tv_decompose(R, g);
    CHECK(t.pressure == doctest::Approx(-(1.0 + g.x * g.x + g.y * g.y)).epsilon(1e-15));
    const Sym2 want = R - Sym2::identity() * t.pressure;
    CHECK((tv_tensor_sum(t) - want).frobenius() < 1e-12);
    const Vec2 v = tv_vector_sum(t);
    CHECK(std::hypot(v.x - g.x, v.y - g.y) < 1e-12);
  }
}
