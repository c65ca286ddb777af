#include <algorithm>
#include <cmath>
#include <map>

#include "ictk/cascade.hpp"

namespace ictk {

namespace {

// this -= w(xi) * src, w given per storage index
void accumulate(SpectralField& dst, const SpectralField& src, const std::vector<double>& w) {
  const std::size_t m = dst.grid().size();
  for (int c = 0; c < dst.ncomp(); ++c) {
    cplx* d = dst.comp(c);
    const cplx* s = src.comp(c);
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < m; ++q) d[q] -= w[q] * s[q];
  }
}

std::vector<double> kernel_weights(const Grid2D& g, double lam, double t, Exec ex) {
  std::vector<double> w(g.size());
  for_each_mode(g, ex, [&](int i, int j, double k1, double k2) {
    w[static_cast<std::size_t>(i) * g.n() + j] = duhamel_mode_integral(k1 * k1 + k2 * k2, lam, t);
  });
  return w;
}

}  // namespace

std::vector<DuhamelState> duhamel_fields(const Cascade& C, int k, const std::vector<double>& times, Exec ex) {
  if (k < 0 || k + 1 > C.K()) throw std::out_of_range("duhamel_fields needs level k+1 to be built");
  for (double t : times)
    if (!(t >= 0.0)) throw std::invalid_argument("duhamel_fields: negative time");
  const DirectionSets& ds = direction_sets();
  const CascadeLevel& up = C.levels[k + 1];
  const Grid2D& g = C.grid;
  const std::size_t m = g.size();

  // time-independent spatial parts: vbar_{k+1}(s) = sum_j e^{-N_j^2 s} V_j, hbar likewise with B_j
  std::vector<PhysicalField> V(ds.J), B(ds.J);
  std::vector<bool> hasV(ds.J, false), hasB(ds.J, false);
  for (int j = 1; j <= ds.J; ++j) {
    const double N = static_cast<double>(up.N[j - 1]);
    const int l = ds.local(j);
    const SpectralField* psi = nullptr;
    if (ds.is_u(j)) psi = &up.pots.psi_u[l];
    else if (up.pots.has_c) psi = &up.pots.psi_c[l];
    if (psi && max_abs_coeff(*psi) > 0.0) {
      V[j - 1] = to_physical((-N) * leray_project(laplacian(*psi, ex), ex));
      hasV[j - 1] = true;
    }
    if (!ds.is_u(j) && max_abs_coeff(up.pots.psi_b[l]) > 0.0) {
      B[j - 1] = to_physical((-N) * laplacian(up.pots.psi_b[l], ex));
      hasB[j - 1] = true;
    }
  }

  // group products by their decay rate lambda = N_j^2 + N_j'^2
  std::map<long long, std::vector<std::pair<int, int>>> vv, vh;
  for (int a = 0; a < ds.J; ++a) {
    if (!hasV[a]) continue;
    const long long Na = up.N[a];
    for (int b = a; b < ds.J; ++b)
      if (hasV[b]) vv[Na * Na + up.N[b] * up.N[b]].push_back({a, b});
    for (int b = 0; b < ds.J; ++b)
      if (hasB[b]) vh[Na * Na + up.N[b] * up.N[b]].push_back({a, b});
  }

  std::vector<DuhamelState> out(times.size());
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    out[ti].t = times[ti];
    out[ti].v = SpectralField(g, Rank::Vector);
    out[ti].R = SpectralField(g, Rank::SymTensor);
    out[ti].h = SpectralField(g, Rank::Scalar);
    out[ti].H = SpectralField(g, Rank::Vector);
  }

  for (const auto& [lam, pairs] : vv) {
    PhysicalField G(g, Rank::SymTensor);
    for (const auto& [a, b] : pairs) {
      const double f = a == b ? 1.0 : 2.0;
      const double *a1 = V[a].comp(0), *a2 = V[a].comp(1), *b1 = V[b].comp(0), *b2 = V[b].comp(1);
      double *t11 = G.comp(0), *t22 = G.comp(1), *t12 = G.comp(2);
#pragma omp parallel for schedule(static)
      for (std::size_t q = 0; q < m; ++q) {
        t11[q] += f * a1[q] * b1[q];
        t22[q] += f * a2[q] * b2[q];
        t12[q] += 0.5 * f * (a1[q] * b2[q] + a2[q] * b1[q]);
      }
    }
    const SpectralField D = leray_project(div(to_spectral(G), ex), ex);
    const SpectralField R = op_R(D, ex);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const std::vector<double> w = kernel_weights(g, static_cast<double>(lam), times[ti], ex);
      accumulate(out[ti].v, D, w);
      accumulate(out[ti].R, R, w);
    }
  }

  for (const auto& [lam, pairs] : vh) {
    PhysicalField G(g, Rank::Vector);
    for (const auto& [a, b] : pairs) {
      const double *a1 = V[a].comp(0), *a2 = V[a].comp(1), *s = B[b].comp(0);
      double *g1 = G.comp(0), *g2 = G.comp(1);
#pragma omp parallel for schedule(static)
      for (std::size_t q = 0; q < m; ++q) {
        g1[q] += a1[q] * s[q];
        g2[q] += a2[q] * s[q];
      }
    }
    const SpectralField D = div(to_spectral(G), ex);
    const SpectralField H = op_R1(D, ex);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const std::vector<double> w = kernel_weights(g, static_cast<double>(lam), times[ti], ex);
      accumulate(out[ti].h, D, w);
      accumulate(out[ti].H, H, w);
    }
  }
  return out;
}

// ---------------------------------------------------------------- scale separation

std::vector<SeparationEntry> scale_separation_table(const FrequencyLadder& L, int k, double log_t) {
  const int J = L.params.J;
  std::vector<SeparationEntry> out;
  for (int j = 1; j <= J; ++j) {
    for (int jp = 1; jp <= j; ++jp) {
      const double a = L.logN(j, k), b = L.logN(jp, k);
      // N_j N_j' / (N_j^2 + N_j'^2) written through d = log(N_hi / N_lo) only: log N itself can sit far
      // beyond the resolution at which log 2 would survive the addition
      const double hi = std::max(a, b), lo = std::min(a, b);
      const double d = hi - lo;
      const double log1p_term = std::log1p(std::exp(-2.0 * d));
      const double x = std::exp(2.0 * hi + log1p_term + log_t);
      const double tail = x > 700.0 ? 1.0 : -std::expm1(-x);
      SeparationEntry e;
      e.j = j;
      e.jp = jp;
      e.value = std::exp(-d - log1p_term) * tail;
      e.target = j == jp ? 0.5 : std::exp(-d);
      // off the diagonal value / target = tail / (1 + e^{-2d}); both factors stay O(1) when e^{-d} underflows
      e.rel_err = j == jp ? std::abs(e.value - e.target) / e.target : std::abs(std::exp(-log1p_term) * tail - 1.0);
      out.push_back(e);
    }
  }
  return out;
}

// ---------------------------------------------------------------- forcing

ForcingPair assemble_forcing(const Cascade& C, double t, const std::vector<DuhamelState>& duhamel) {
  const int K = C.K();
  if (K < 1) throw std::invalid_argument("assemble_forcing needs at least one Duhamel level");
  if (static_cast<int>(duhamel.size()) != K) throw std::invalid_argument("assemble_forcing: one state per level k < K");
  const Grid2D& g = C.grid;
  std::vector<PhysicalField> v(K + 1), h(K + 1), vb(K + 1), hb(K + 1);
  for (int k = 0; k < K; ++k) {
    v[k] = to_physical(duhamel[k].v);
    h[k] = to_physical(duhamel[k].h);
  }
  v[K] = PhysicalField(g, Rank::Vector);
  h[K] = PhysicalField(g, Rank::Scalar);
  for (int k = 1; k <= K; ++k) {
    const PrincipalState p = principal_fields(C.levels[k], t, C.config.exec);
    vb[k] = to_physical(p.vbar);
    hb[k] = to_physical(p.hbar);
  }
  auto minus = [](PhysicalField a, const PhysicalField& b) {
    for (std::size_t q = 0; q < a.data.size(); ++q) a.data[q] -= b.data[q];
    return a;
  };
  auto plus = [](PhysicalField a, const PhysicalField& b) {
    for (std::size_t q = 0; q < a.data.size(); ++q) a.data[q] += b.data[q];
    return a;
  };
  ForcingPair F;
  F.t = t;
  SpectralField fu(g, Rank::SymTensor), fb(g, Rank::Vector);
  for (int k = 0; k <= K; ++k) {
    PhysicalField pu, pb;
    if (k == 0) {
      // vbar_0 (x) vbar_0 is a shear self-interaction and vbar_0 hbar_0 is left out of the truncated system
      pu = sym_outer(v[0], v[0]);
      pb = scale_vector(v[0], h[0]);
    } else {
      pu = minus(sym_outer(v[k], v[k]), sym_outer(vb[k], vb[k]));
      pb = minus(scale_vector(v[k], h[k]), scale_vector(vb[k], hb[k]));
      const PhysicalField dv = minus(v[k], vb[k]), dh = minus(h[k], hb[k]);
      const PhysicalField iu = plus(sym_outer(dv, v[k]), sym_outer(vb[k], dv));
      const PhysicalField ib = plus(scale_vector(dv, h[k]), scale_vector(vb[k], dh));
      double scale = std::max(sup_norm(pu), sup_norm(pb));
      if (scale == 0.0) scale = 1.0;
      F.identity_defect = std::max(F.identity_defect, std::max(sup_norm(minus(iu, pu)), sup_norm(minus(ib, pb))) / scale);
    }
    F.f_u_level.push_back(to_spectral(pu));
    F.f_b_level.push_back(to_spectral(pb));
    fu += F.f_u_level.back();
    fb += F.f_b_level.back();
  }
  PhysicalField cu(g, Rank::SymTensor), cb(g, Rank::Vector);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      if (k1 == k2) continue;
      if (k1 < k2) {
        const PhysicalField s = sym_outer(v[k1], v[k2]);
        for (std::size_t q = 0; q < s.data.size(); ++q) cu.data[q] += 2.0 * s.data[q];
      }
      cb = plus(cb, scale_vector(v[k1], h[k2]));
    }
  }
  F.f_u_cross = to_spectral(cu);
  F.f_b_cross = to_spectral(cb);
  fu += F.f_u_cross;
  fb += F.f_b_cross;
  F.f_u = std::move(fu);
  F.f_b = std::move(fb);
  return F;
}

// ---------------------------------------------------------------- residual

EquationResidual equation_residual(const Cascade& C, double t, double dt) {
  if (!(dt > 0.0) || !(t - dt > 0.0)) throw std::invalid_argument("equation_residual: need 0 < dt < t");
  const int K = C.K();
  const Exec ex = C.config.exec;
  const Grid2D& g = C.grid;
  const std::vector<double> times{t, t - dt, t + dt, t - 0.5 * dt, t + 0.5 * dt};
  std::vector<std::vector<DuhamelState>> per_level;
  for (int k = 0; k < K; ++k) per_level.push_back(duhamel_fields(C, k, times, ex));
  auto total = [&](int ti, bool velocity) {
    SpectralField s(g, velocity ? Rank::Vector : Rank::Scalar);
    for (int k = 0; k < K; ++k) s += velocity ? per_level[k][ti].v : per_level[k][ti].h;
    return s;
  };
  std::vector<DuhamelState> at_t;
  for (int k = 0; k < K; ++k) at_t.push_back(per_level[k][0]);
  const ForcingPair F = assemble_forcing(C, t, at_t);

  const SpectralField v = total(0, true), h = total(0, false);
  const PhysicalField vp = to_physical(v), hp = to_physical(h);
  const SpectralField nl_v = leray_project(div(to_spectral(sym_outer(vp, vp)), ex), ex);
  const SpectralField nl_h = div(to_spectral(scale_vector(vp, hp)), ex);
  const SpectralField rhs_v = leray_project(div(F.f_u, ex), ex);
  const SpectralField rhs_h = div(F.f_b, ex);
  const SpectralField lap_v = laplacian(v, ex), lap_h = laplacian(h, ex);
  const SpectralField base_v = nl_v - lap_v - rhs_v;
  const SpectralField base_h = nl_h - lap_h - rhs_h;

  auto dtv = [&](int lo, int hi, double step, bool velocity) {
    SpectralField d = total(hi, velocity) - total(lo, velocity);
    d *= 1.0 / (2.0 * step);
    return d;
  };
  const SpectralField dv = dtv(1, 2, dt, true), dv2 = dtv(3, 4, 0.5 * dt, true);
  const SpectralField dh = dtv(1, 2, dt, false), dh2 = dtv(3, 4, 0.5 * dt, false);
  const SpectralField rv = dv + base_v, rv2 = dv2 + base_v;
  const SpectralField rh = dh + base_h, rh2 = dh2 + base_h;

  EquationResidual r;
  r.t = t;
  r.dt = dt;
  r.res_v = sup_norm(rv);
  r.res_v_half = sup_norm(rv2);
  r.ratio_v = r.res_v_half > 0.0 ? r.res_v / r.res_v_half : 0.0;
  r.extrap_v = sup_norm((4.0 / 3.0) * rv2 - (1.0 / 3.0) * rv);
  r.scale_v = std::max(sup_norm(dv2), sup_norm(lap_v));
  r.res_h = sup_norm(rh);
  r.res_h_half = sup_norm(rh2);
  r.ratio_h = r.res_h_half > 0.0 ? r.res_h / r.res_h_half : 0.0;
  r.extrap_h = sup_norm((4.0 / 3.0) * rh2 - (1.0 / 3.0) * rh);
  r.scale_h = std::max(sup_norm(dh2), sup_norm(lap_h));
  r.div_v = sup_norm(div(v, ex));
  return r;
}

}  // namespace ictk
