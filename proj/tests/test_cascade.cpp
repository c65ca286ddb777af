#include <doctest.h>

#include <cmath>

#include "ictk/cascade.hpp"

using namespace ictk;

namespace {

// small two-level cascade; b = 1.5 keeps level 1 resolvable at 256
const Cascade& toy() {
  static const Cascade C = [] {
    CascadeConfig cfg;
    cfg.ladder.b = 1.5;
    cfg.ladder.delta0 = 0.4;
    cfg.ladder.K = 1;
    cfg.grid = 256;
    return build_cascade(cfg);
  }();
  return C;
}

}  // namespace

TEST_CASE("base level is a single shear along the first direction") {
  const AmplitudeSet a = base_amplitudes(Grid2D(16));
  REQUIRE(a.a_u.size() == 4);
  REQUIRE(a.a_b.size() == 12);
  for (double v : a.a_u[0].data) CHECK(v == 1.0);
  for (int m = 1; m < 4; ++m) CHECK(sup_norm(a.a_u[m]) == 0.0);
  for (const auto& f : a.a_b) CHECK(sup_norm(f) == 0.0);
}

TEST_CASE("choose_c is the largest admissible power of two") {
  StressSet s;
  s.sup_u = 3.0;
  s.sup_c = 1.0;
  s.sup_b = 2.0;
  const double c = choose_c(s, 0.5);
  const double need = 4.0, room = 0.5 * eps_u();
  CHECK(c * need <= room);
  CHECK(2.0 * c * need > room);
  CHECK(std::log2(c) == doctest::Approx(std::round(std::log2(c))));
}

TEST_CASE("toy cascade levels and amplitude identity on chi = 1") {
  const Cascade& C = toy();
  REQUIRE(C.K() == 1);
  CHECK(C.levels[1].amps.c > 0.0);
  CHECK(C.levels[1].amps.ball_margin > 0.0);
  const RegionMasks rm = build_region_masks(1, C.ladder, C.grid);
  std::vector<std::uint8_t> chi_one(C.grid.size());
  for (std::size_t q = 0; q < chi_one.size(); ++q) chi_one[q] = rm.chi_samples.comp(0)[q] == 1.0;
  const AmplitudeIdentity id = check_amplitude_identity(C.levels[0].stress, C.levels[1].amps, chi_one);
  CHECK(id.points > 0);
  CHECK(id.vector_residual <= 1e-10);
  CHECK(id.tracefree_u <= 1e-10);
  CHECK(id.tracefree_c <= 1e-10);
}

TEST_CASE("fields are divergences of their potentials") {
  const Cascade& C = toy();
  const double t0 = C.ladder.t(0);
  for (const auto& lvl : C.levels) {
    const PrincipalState P = principal_fields(lvl, 3.0 * t0);
    CHECK(sup_norm(P.vbar - div(P.Rbar)) <= 1e-10);
    CHECK(sup_norm(P.hbar - div(P.Hbar)) <= 1e-10);
    CHECK(sup_norm(div(P.vbar)) <= 1e-11 * sup_norm(P.vbar));
  }
  const auto D = duhamel_fields(C, 0, {t0, 5.0 * t0});
  for (const auto& d : D) {
    CHECK(sup_norm(d.v - div(d.R)) <= 1e-10);
    CHECK(sup_norm(d.h - div(d.H)) <= 1e-10);
    CHECK(sup_norm(div(d.v)) <= 1e-11 * sup_norm(d.v));
  }
}

TEST_CASE("serial and parallel principal fields agree") {
  const Cascade& C = toy();
  const double t = 2.0 * C.ladder.t(0);
  const PrincipalState a = principal_fields(C.levels[1], t, Exec::Parallel);
  const PrincipalState b = principal_fields(C.levels[1], t, Exec::Serial);
  CHECK(max_abs_coeff(a.vbar - b.vbar) <= 1e-15 * max_abs_coeff(a.vbar));
  CHECK(max_abs_coeff(a.Hbar - b.Hbar) <= 1e-15 * max_abs_coeff(a.Hbar));
}

TEST_CASE("mild equation residual converges at second order") {
  const Cascade& C = toy();
  const double t0 = C.ladder.t(0);
  const EquationResidual e = equation_residual(C, 2.0 * t0, 0.2 * t0);
  CHECK(e.ratio_v == doctest::Approx(4.0).epsilon(0.25));
  CHECK(e.extrap_v <= 1e-6 * e.scale_v);
  // this toy carries no magnetic Duhamel field, so its residual is roundoff against the velocity scale
  CHECK(e.scale_h <= 1e-12 * e.scale_v);
  CHECK(e.res_h <= 1e-12 * e.scale_v);
  CHECK(e.div_v <= 1e-10);
}
