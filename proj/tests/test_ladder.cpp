#include <doctest.h>

#include <cmath>
#include <random>

#include "ictk/cascade.hpp"
#include "ictk/ladder.hpp"

using namespace ictk;

namespace {

LadderParams toy() {
  LadderParams p;
  p.A = 2.0;
  p.b = 2.0;
  p.K = 1;
  return p;
}

LadderParams asymptotic(int K) {
  LadderParams p;
  p.mode = LadderMode::Asymptotic;
  p.A = 1e5;
  p.b = 131072.0;
  p.K = K;
  return p;
}

}  // namespace

TEST_CASE("field ladder integer tables") {
  const LadderParams p = toy();
  const FrequencyLadder L = build_ladder(p);
  CHECK(L.levels() == p.K + 2);
  CHECK(L.N(1, 0) == 1);
  CHECK(L.field_N(1, 0) == p.m_star);
  for (int k = 0; k < L.levels(); ++k) {
    for (int j = 1; j <= p.J; ++j) {
      if (j == 1 && k == 0) continue;
      const double e = std::pow(p.b, k + (j - 1.0) / p.J);
      CHECK(L.N(j, k) == p.m_star * static_cast<long long>(std::ceil(std::pow(p.A, e))));
      CHECK(L.logN(j, k) == doctest::Approx(std::log(static_cast<double>(L.N(j, k)))));
    }
  }
  // nondecreasing along the joint order and across levels
  for (int k = 0; k < L.levels(); ++k)
    for (int j = 2; j <= p.J; ++j) CHECK(L.N(j, k) >= L.N(j - 1, k));
  // the toy ladder ties here (20 = 20), so only the weak order holds
  CHECK(L.N(1, 1) >= L.N(p.J, 0));
  CHECK_THROWS_AS(L.M(1, 0), std::out_of_range);
}

TEST_CASE("asymptotic ladder certification at the target parameters") {
  const FrequencyLadder L = build_ladder(asymptotic(6));
  CHECK_THROWS_AS(L.N(1, 1), std::logic_error);
  const LadderCertificate c = certify_ladder(L);
  CHECK(c.certified());
  CHECK(c.c_max > 0.0);
  for (const auto& ch : c.checks) CHECK_MESSAGE(ch.pass(), ch.name);
  // log N_{j,k} = log m_star + b^{k + (j-1)/J} log A up to ceiling
  const double want = std::log(5.0) + std::pow(131072.0, 3.0 + 4.0 / 16.0) * std::log(1e5);
  CHECK(L.logN(5, 3) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("gamma below b^{-1/J} is rejected in asymptotic mode") {
  LadderParams p = asymptotic(2);
  p.b = 2.0;
  p.gamma = 0.5;
  CHECK_THROWS_AS(build_ladder(p), std::runtime_error);
  p.gamma = 1.5;
  CHECK_THROWS_AS(build_ladder(p), std::invalid_argument);
}

TEST_CASE("scale separation stays exact at astronomically large frequencies") {
  const FrequencyLadder L = build_ladder(asymptotic(6));
  for (int k = 1; k <= 6; ++k) {
    const auto table = scale_separation_table(L, k, L.log_t(k - 1));
    REQUIRE(!table.empty());
    for (const auto& e : table) {
      if (e.j == e.jp) {
        // N^2 int_0^t e^{-2 N^2 s} ds = (1 - e^{-2 N^2 t}) / 2 with N^2 t enormous
        CHECK(e.value == doctest::Approx(0.5).epsilon(1e-12));
      } else {
        CHECK(e.rel_err <= 0.10);
      }
    }
  }
}

TEST_CASE("pipe distance against a brute-force lattice search") {
  const Direction d = direction_sets().dir(2);
  const long long M = 7;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const Vec2 n = d.perp();
  for (int s = 0; s < 200; ++s) {
    const double x1 = u(rng), x2 = u(rng);
    double best = 1e9;
    for (int a = -3 * M; a <= 3 * M; ++a)
      for (int b = -3 * M; b <= 3 * M; ++b) {
        const double y1 = x1 - kTwoPi * a / M, y2 = x2 - kTwoPi * b / M;
        best = std::min(best, std::abs(y1 * n.x + y2 * n.y));
      }
    CHECK(pipe_distance(d, M, x1, x2) == doctest::Approx(best).epsilon(1e-9));
  }
  const Grid2D g(64);
  const std::vector<double> grid = pipe_distance_grid(d, M, g);
  for (int i = 0; i < g.n(); i += 5)
    for (int j = 0; j < g.n(); j += 3)
      CHECK(grid[static_cast<std::size_t>(i) * g.n() + j] == doctest::Approx(pipe_distance(d, M, g.x(i), g.x(j))).epsilon(1e-9));
}

TEST_CASE("pipe volume fraction matches Monte Carlo") {
  const Direction d = direction_sets().dir(3);
  const long long M = 5;
  const double rho = 0.1;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const int n = 200000;
  int hit = 0;
  for (int s = 0; s < n; ++s) hit += pipe_distance(d, M, u(rng), u(rng)) < rho / M;
  CHECK(static_cast<double>(hit) / n == doctest::Approx(pipe_volume_fraction(d, rho)).epsilon(0.02));
}

TEST_CASE("volume-bound delta0 keeps every cylinder within 1/(10 J)") {
  const DirectionSets& s = direction_sets();
  const double d0 = delta0_from_volume_bound(s);
  CHECK(d0 > 0.0);
  for (const auto& d : s.joint) CHECK(pipe_volume_fraction(d, 4.0 * d0) <= 1.0 / (10.0 * s.J) + 1e-15);
}

TEST_CASE("unresolvable ladders are rejected") {
  LadderParams p = toy();
  p.K = 2;
  const FrequencyLadder L = build_ladder(p);
  CHECK_THROWS_AS(require_resolvable(L, Grid2D(512), 2), GridOverflow);
}
