#include "ictk/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ictk {

namespace {

// sin(N eta . x) on the grid through an integer phase table, so every sample is
// sin(2 pi m / n) for an exactly reduced m
std::vector<double> lattice_wave(const Grid2D& g, const Direction& d, long long N) {
  if ((N * d.p) % d.d != 0 || (N * d.q) % d.d != 0)
    throw std::invalid_argument("frequency " + std::to_string(N) + " puts N eta off the integer lattice");
  const long long n = g.n();
  const long long a = ((N * d.p / d.d) % n + n) % n;
  const long long b = ((N * d.q / d.d) % n + n) % n;
  std::vector<double> table(n);
  for (long long m = 0; m < n; ++m) table[m] = std::sin(kTwoPi * static_cast<double>(m) / static_cast<double>(n));
  std::vector<double> out(g.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j) out[i * n + j] = table[(a * i + b * j) % n];
  return out;
}

}  // namespace

AmplitudeSet base_amplitudes(const Grid2D& g) {
  const DirectionSets& ds = direction_sets();
  AmplitudeSet a;
  a.k = 0;
  for (std::size_t l = 0; l < ds.lambda_u.size(); ++l) {
    PhysicalField f(g, Rank::Scalar);
    if (l == 0) std::fill(f.data.begin(), f.data.end(), 1.0);
    a.a_u.push_back(std::move(f));
  }
  for (std::size_t m = 0; m < ds.lambda_b.size(); ++m) a.a_b.emplace_back(g, Rank::Scalar);
  a.ball_margin = eps_u();
  return a;
}

PotentialSet build_potentials(int k, const AmplitudeSet& a, const std::vector<PipeCutoff>& cutoffs,
                              const FrequencyLadder& L, const Grid2D& g, Exec ex) {
  const DirectionSets& ds = direction_sets();
  if (k >= 1 && static_cast<int>(cutoffs.size()) != ds.J)
    throw std::invalid_argument("build_potentials: one cutoff per direction is required for k >= 1");
  const double ell = k >= 1 ? L.ell(k) : 0.0;
  PotentialSet P;
  P.k = k;
  const std::size_t m = g.size();

  auto finish = [&](PhysicalField&& f, long long N) {
    SpectralField s = to_spectral(f);
    if (k >= 1) s = mollify_gaussian(s, ell, ex);
    s *= 1.0 / (static_cast<double>(N) * static_cast<double>(N));
    return s;
  };
  auto profile = [&](int j, const double* amp, bool vector) {
    const Direction& d = ds.dir(j);
    const long long N = L.field_N(j, k);
    const std::vector<double> w = lattice_wave(g, d, N);
    const double* phi = k >= 1 ? cutoffs[j - 1].samples.comp(0) : nullptr;
    PhysicalField f(g, vector ? Rank::Vector : Rank::Scalar);
    const Vec2 e = d.perp();
    for (std::size_t q = 0; q < m; ++q) {
      double s = w[q];
      if (amp) s *= amp[q];
      if (phi) s *= phi[q];
      if (vector) {
        f.comp(0)[q] = s * e.x;
        f.comp(1)[q] = s * e.y;
      } else {
        f.comp(0)[q] = s;
      }
    }
    return finish(std::move(f), N);
  };

  for (int j = 1; j <= ds.J; ++j) {
    const int l = ds.local(j);
    if (ds.is_u(j)) {
      P.psi_u.push_back(profile(j, a.a_u[l].comp(0), true));
    } else {
      P.psi_b.push_back(profile(j, nullptr, false));
    }
  }
  // the coupling potentials vanish identically while the b-amplitudes do
  bool any_b = false;
  for (const auto& f : a.a_b)
    for (double v : f.data) any_b = any_b || v != 0.0;
  P.has_c = any_b;
  if (any_b) {
    for (int j = 1; j <= ds.J; ++j)
      if (!ds.is_u(j)) P.psi_c.push_back(profile(j, a.a_b[ds.local(j)].comp(0), true));
  }
  return P;
}

StressSet compute_stresses(const CascadeLevel& lvl, Exec ex) {
  const DirectionSets& ds = direction_sets();
  const Grid2D& g = lvl.pots.psi_u.at(0).grid();
  SpectralField su(g, Rank::Vector), sc(g, Rank::Vector), sb(g, Rank::Scalar);
  for (int j = 1; j <= ds.J; ++j) {
    const double N = static_cast<double>(lvl.N[j - 1]);
    const int l = ds.local(j);
    if (ds.is_u(j)) {
      su.axpy(N, lvl.pots.psi_u[l]);
    } else {
      sb.axpy(N, lvl.pots.psi_b[l]);
      if (lvl.pots.has_c) sc.axpy(N, lvl.pots.psi_c[l]);
    }
  }
  StressSet s;
  s.S_u = 2.0 * op_D(su, ex);
  s.S_c = 2.0 * op_D(sc, ex);
  s.S_b = 2.0 * grad(sb, ex);
  s.sup_u = sup_norm(s.S_u);
  s.sup_c = sup_norm(s.S_c);
  s.sup_b = sup_norm(s.S_b);
  return s;
}

double choose_c(const StressSet& s, double ball_fraction) {
  const double need = std::max({s.sup_u, s.sup_c, s.sup_b * s.sup_b});
  const double room = ball_fraction * eps_u();
  double c = 1.0;
  while (c * need > room) c *= 0.5;
  return c;
}

AmplitudeSet amplitudes_next(int k, const StressSet& s, const PhysicalField& chi_next, double c) {
  const DirectionSets& ds = direction_sets();
  const Grid2D& g = chi_next.grid;
  const PhysicalField Su = to_physical(s.S_u), Sc = to_physical(s.S_c), Sb = to_physical(s.S_b);
  const std::size_t m = g.size();
  const double eps = eps_u();

  // admissibility first, so the decomposition loop below cannot throw
  std::size_t worst = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < m; ++q) {
    const Sym2 Ru{c * Su.comp(0)[q], c * Su.comp(1)[q], c * Su.comp(2)[q]};
    const Sym2 Rc{c * Sc.comp(0)[q], c * Sc.comp(1)[q], c * Sc.comp(2)[q]};
    const double margin = eps - std::max(Ru.frobenius(), Rc.frobenius());
    if (margin < worst_margin) {
      worst_margin = margin;
      worst = q;
    }
  }
  if (!(worst_margin >= 0.0)) {
    throw AmplitudeOutOfBall(k + 1, static_cast<int>(worst / g.n()), static_cast<int>(worst % g.n()), worst_margin);
  }

  AmplitudeSet a;
  a.k = k + 1;
  a.c = c;
  a.ball_margin = worst_margin;
  for (std::size_t l = 0; l < ds.lambda_u.size(); ++l) a.a_u.emplace_back(g, Rank::Scalar);
  for (std::size_t l = 0; l < ds.lambda_b.size(); ++l) a.a_b.emplace_back(g, Rank::Scalar);
  const double cm = 1.0 / std::sqrt(c), ch = std::sqrt(c);
  const double* chi = chi_next.comp(0);
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < m; ++q) {
    const Sym2 Ru = Sym2::identity() + Sym2{Su.comp(0)[q], Su.comp(1)[q], Su.comp(2)[q]} * c;
    const Sym2 Rc = Sym2::identity() + Sym2{Sc.comp(0)[q], Sc.comp(1)[q], Sc.comp(2)[q]} * c;
    const Vec2 gv{ch * Sb.comp(0)[q], ch * Sb.comp(1)[q]};
    const SymDecomp su = sym_decompose(Ru);
    const TVDecomp tv = tv_decompose(Rc, gv);
    for (int l = 0; l < 4; ++l) a.a_u[l].comp(0)[q] = cm * chi[q] * std::sqrt(su.coeffs[l]);
    for (int l = 0; l < 12; ++l) a.a_b[l].comp(0)[q] = cm * chi[q] * tv.gammas[l];
  }
  return a;
}

Cascade build_cascade(const CascadeConfig& cfg) {
  if (cfg.ladder.mode != LadderMode::Field) throw std::invalid_argument("build_cascade needs a field-mode ladder");
  Cascade C;
  C.config = cfg;
  C.ladder = build_ladder(cfg.ladder);
  C.grid = Grid2D(cfg.grid);
  require_resolvable(C.ladder, C.grid, cfg.ladder.K);
  const DirectionSets& ds = direction_sets();
  const Exec ex = cfg.exec;

  auto frequencies = [&](int k) {
    std::vector<long long> N(ds.J);
    for (int j = 1; j <= ds.J; ++j) N[j - 1] = C.ladder.field_N(j, k);
    return N;
  };

  CascadeLevel L0;
  L0.k = 0;
  L0.N = frequencies(0);
  L0.amps = base_amplitudes(C.grid);
  L0.pots = build_potentials(0, L0.amps, {}, C.ladder, C.grid, ex);
  L0.stress = compute_stresses(L0, ex);
  C.levels.push_back(std::move(L0));

  for (int k = 1; k <= cfg.ladder.K; ++k) {
    CascadeLevel& prev = C.levels.back();
    prev.c_next = choose_c(prev.stress, cfg.ball_fraction);
    const RegionMasks rm = build_region_masks(k, C.ladder, C.grid);
    CascadeLevel lv;
    lv.k = k;
    lv.N = frequencies(k);
    lv.chi_gap_cells = rm.gap_cells;
    lv.amps = amplitudes_next(k - 1, prev.stress, rm.chi_samples, prev.c_next);
    std::vector<PipeCutoff> cut;
    for (int j = 1; j <= ds.J; ++j) {
      cut.push_back(build_pipe_cutoff(j, k, C.ladder, C.grid));
      const PipeCutoff& pc = cut.back();
      lv.cutoffs.push_back({j, pc.M, pc.normalization, pc.support_violation, pc.shift_defect,
                            pc.axis_derivative_rel, pc.C_n});
    }
    lv.pots = build_potentials(k, lv.amps, cut, C.ladder, C.grid, ex);
    lv.stress = compute_stresses(lv, ex);
    C.levels.push_back(std::move(lv));
  }
  return C;
}

// ---------------------------------------------------------------- identities

AmplitudeIdentity check_amplitude_identity(const StressSet& s, const AmplitudeSet& next,
                                           const std::vector<std::uint8_t>& chi_one) {
  const DirectionSets& ds = direction_sets();
  const Grid2D& g = next.a_u.at(0).grid;
  const PhysicalField Su = to_physical(s.S_u), Sc = to_physical(s.S_c), Sb = to_physical(s.S_b);
  const std::size_t m = g.size();
  auto tf_norm = [](double a11, double a22, double a12) {
    const double d = 0.5 * (a11 - a22);
    return std::sqrt(2.0 * d * d + 2.0 * a12 * a12);
  };
  AmplitudeIdentity r;
  double su_scale = 0.0, sc_scale = 0.0, du = 0.0, dc = 0.0;
  PhysicalField V(g, Rank::Vector);
  for (std::size_t q = 0; q < m; ++q) {
    double v1 = 0.0, v2 = 0.0;
    Sym2 Tu, Tc;
    for (int l = 0; l < 4; ++l) {
      const double a = next.a_u[l].comp(0)[q];
      Tu = Tu + Sym2::outer(ds.lambda_u[l].perp()) * (a * a);
    }
    for (int l = 0; l < 12; ++l) {
      const double a = next.a_b[l].comp(0)[q];
      const Vec2 e = ds.lambda_b[l].perp();
      v1 += a * e.x;
      v2 += a * e.y;
      Tc = Tc + Sym2::outer(e) * (a * a);
    }
    V.comp(0)[q] = v1;
    V.comp(1)[q] = v2;
    if (!chi_one[q]) continue;
    ++r.points;
    const double e1 = v1 - Sb.comp(0)[q], e2 = v2 - Sb.comp(1)[q];
    r.vector_residual = std::max(r.vector_residual, std::hypot(e1, e2));
    r.vector_scale = std::max(r.vector_scale, std::hypot(Sb.comp(0)[q], Sb.comp(1)[q]));
    su_scale = std::max(su_scale, tf_norm(Su.comp(0)[q], Su.comp(1)[q], Su.comp(2)[q]));
    sc_scale = std::max(sc_scale, tf_norm(Sc.comp(0)[q], Sc.comp(1)[q], Sc.comp(2)[q]));
    du = std::max(du, tf_norm(Tu.a11 - Su.comp(0)[q], Tu.a22 - Su.comp(1)[q], Tu.a12 - Su.comp(2)[q]));
    dc = std::max(dc, tf_norm(Tc.a11 - Sc.comp(0)[q], Tc.a22 - Sc.comp(1)[q], Tc.a12 - Sc.comp(2)[q]));
  }
  r.tracefree_u = su_scale > 0.0 ? du / su_scale : du;
  r.tracefree_c = sc_scale > 0.0 ? dc / sc_scale : dc;
  const SpectralField Vs = to_spectral(V);
  const SpectralField d2v1 = directional_derivative(Vs.component(0), 0.0, 1.0);
  const SpectralField d1v2 = directional_derivative(Vs.component(1), 1.0, 0.0);
  r.curl_diag = sup_norm(d1v2 - d2v1);
  return r;
}

// ---------------------------------------------------------------- principal fields

PrincipalState principal_fields(const CascadeLevel& lvl, double t, Exec ex) {
  const DirectionSets& ds = direction_sets();
  const Grid2D& g = lvl.pots.psi_u.at(0).grid();
  SpectralField pu(g, Rank::Vector), pb(g, Rank::Scalar);
  for (int j = 1; j <= ds.J; ++j) {
    const double N = static_cast<double>(lvl.N[j - 1]);
    const double w = -N * std::exp(-N * N * t);
    if (w == 0.0) continue;
    const int l = ds.local(j);
    if (ds.is_u(j)) {
      pu.axpy(w, lvl.pots.psi_u[l]);
    } else {
      pb.axpy(w, lvl.pots.psi_b[l]);
      if (lvl.pots.has_c) pu.axpy(w, lvl.pots.psi_c[l]);
    }
  }
  PrincipalState s;
  s.t = t;
  const SpectralField lap = laplacian(pu, ex);
  s.vbar = leray_project(lap, ex);
  // D rather than the modified D: div D = Delta P, which keeps vbar = div Rbar with P applied
  s.Rbar = op_D(pu, ex);
  s.leray_gap = sup_norm(lap - s.vbar);
  s.hbar = laplacian(pb, ex);
  s.Hbar = grad(pb, ex);
  return s;
}

}  // namespace ictk
