// Serial vs OpenMP timings for the per-mode kernels and the cascade-level field evaluation.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "ictk/harness.hpp"

using namespace ictk;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm the FFTW plan cache
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const std::string& name, const std::function<void(Exec)>& fn, int reps) {
  const double s = time_ms([&] { fn(Exec::Serial); }, reps);
  const double p = time_ms([&] { fn(Exec::Parallel); }, reps);
  std::printf("%-28s %10.3f %10.3f %8.2fx\n", name.c_str(), s, p, s / p);
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  const int n = argc > 1 ? std::stoi(argv[1]) : 512;
  const int reps = argc > 2 ? std::stoi(argv[2]) : 10;
  const Grid2D g(n);
  const SpectralField v = random_field(g, Rank::Vector, 1, n / 2 - 1);
  const SpectralField T = random_field(g, Rank::SymTensor, 2, n / 2 - 1);
  volatile double sink = 0.0;

  std::printf("grid %d, %d repetitions, times in ms\n", n, reps);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial", "parallel", "speedup");
  row("heat_semigroup", [&](Exec ex) { sink = sink + max_abs_coeff(heat_semigroup(v, 1e-3, ex)); }, reps);
  row("leray_project", [&](Exec ex) { sink = sink + max_abs_coeff(leray_project(v, ex)); }, reps);
  row("op_D", [&](Exec ex) { sink = sink + max_abs_coeff(op_D(v, ex)); }, reps);
  row("op_Q", [&](Exec ex) { sink = sink + max_abs_coeff(op_Q(T, ex)); }, reps);
  row("op_R", [&](Exec ex) { sink = sink + max_abs_coeff(op_R(v, ex)); }, reps);
  row("littlewood_paley N=16", [&](Exec ex) { sink = sink + max_abs_coeff(littlewood_paley(v, 16, ex)); }, reps);

  row("identity suite (4 fields)", [&](Exec ex) { sink = sink + operator_identity_suite(128, 4, 7, ex).max_rel[0]; }, 1);

  RunConfig cfg = default_config();
  cfg.grid = 256;
  cfg.ladder.b = 1.5;
  cfg.ladder.delta0 = 0.4;
  CascadeConfig cc = cascade_config(cfg);
  cc.exec = Exec::Serial;
  const Cascade C = build_cascade(cc);
  const double t = 2.0 * C.ladder.t(0);
  row("principal_fields k=1", [&](Exec ex) { sink = sink + sup_norm(principal_fields(C.levels[1], t, ex).vbar); }, reps);
  row("duhamel_fields k=0", [&](Exec ex) { sink = sink + sup_norm(duhamel_fields(C, 0, {t}, ex)[0].v); }, 2);
  (void)sink;
  return 0;
}
