#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "ictk/harness.hpp"

namespace ictk {

namespace {

double rel_diff(const SpectralField& a, const SpectralField& b) {
  const double scale = std::max(max_abs_coeff(a), max_abs_coeff(b));
  if (scale == 0.0) return 0.0;
  return max_abs_diff(a, b) / scale;
}

// (d1 f1, d2 f2, (d1 f2 + d2 f1)/2), written out per mode as an independent oracle
SpectralField sym_grad(const SpectralField& f) {
  require_rank(f, Rank::Vector, "sym_grad");
  const Grid2D& g = f.grid();
  SpectralField out(g, Rank::SymTensor);
  const cplx I(0.0, 1.0);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      const double k1 = g.wave(i), k2 = g.wave(j);
      const cplx a = f.at(0, i, j), b = f.at(1, i, j);
      out.at(0, i, j) = I * k1 * a;
      out.at(1, i, j) = I * k2 * b;
      out.at(2, i, j) = 0.5 * I * (k1 * b + k2 * a);
    }
  }
  return out;
}

void linear_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& intercept,
                double& rms) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("linear_fit: need two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  slope = sxy / sxx;
  intercept = my - slope * mx;
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (slope * x[i] + intercept);
    r += e * e;
  }
  rms = std::sqrt(r / n);
}

// largest sup over all partial derivatives of order n
double partial_sup(const SpectralField& f, int n) {
  double best = 0.0;
  for (int p = 0; p <= n; ++p) {
    SpectralField d = f;
    for (int r = 0; r < p; ++r) d = directional_derivative(d, 1.0, 0.0);
    for (int r = p; r < n; ++r) d = directional_derivative(d, 0.0, 1.0);
    best = std::max(best, sup_norm(d));
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------- suites

IdentitySuite operator_identity_suite(int grid, int fields, std::uint64_t seed, Exec ex) {
  const Grid2D g(grid);
  IdentitySuite S;
  S.names = {"div_D_eq_lap_P", "div_newD_eq_lap", "newD_eq_QD_plus_hessian_div",
             "div_R_eq_nonzero_modes", "Q_eq_R_P_div", "QD_eq_2_symgrad_P"};
  S.max_rel.assign(6, 0.0);
  S.fields = fields;
  const int kmax = grid / 2 - 1;
  for (int f = 0; f < fields; ++f) {
    const SpectralField v = random_field(g, Rank::Vector, seed + 2 * f, kmax, false);
    const SpectralField T = random_field(g, Rank::SymTensor, seed + 2 * f + 1, kmax, false);
    const SpectralField Dv = op_D(v, ex), Pv = leray_project(v, ex), nD = op_newD(v, ex), QD = op_Q(Dv, ex);
    const double r[6] = {
        rel_diff(div(Dv, ex), laplacian(Pv, ex)),
        rel_diff(div(nD, ex), laplacian(v, ex)),
        rel_diff(nD, QD + op_hessian_ratio(div(v, ex), ex)),
        rel_diff(div(op_R(v, ex), ex), drop_zero_mode(v)),
        rel_diff(op_Q(T, ex), op_R(leray_project(div(T, ex), ex), ex)),
        rel_diff(QD, 2.0 * sym_grad(Pv)),
    };
    for (int i = 0; i < 6; ++i) S.max_rel[i] = std::max(S.max_rel[i], r[i]);
  }
  return S;
}

GeometryFuzz geometry_fuzz(int samples, std::uint64_t seed) {
  GeometryFuzz G;
  G.samples = samples;
  G.eps_u = eps_u();
  G.sym_min_coeff = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  auto ball_point = [&](double radius) {
    double e[3] = {nd(rng), nd(rng), nd(rng)};
    const double len = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    const double r = radius * std::cbrt(ud(rng)) / len;
    // Frobenius coordinates (a11, a22, sqrt2 a12)
    return Sym2{1.0 + r * e[0], 1.0 + r * e[1], r * e[2] / std::sqrt(2.0)};
  };
  for (int s = 0; s < samples; ++s) {
    const Sym2 R = ball_point(0.5 * G.eps_u);
    const SymDecomp d = sym_decompose(R);
    G.sym_residual = std::max(G.sym_residual, (sym_reconstruct(d) - R).frobenius());
    for (double c : d.coeffs) G.sym_min_coeff = std::min(G.sym_min_coeff, c);

    const Sym2 Rb = ball_point(0.5 * G.eps_u);
    const double rad = 3.0 * std::sqrt(ud(rng)), th = 2.0 * kPi * ud(rng);
    const Vec2 gv{rad * std::cos(th), rad * std::sin(th)};
    const TVDecomp t = tv_decompose(Rb, gv);
    const Sym2 target = Rb - Sym2::identity() * t.pressure;
    G.tv_tensor_residual = std::max(G.tv_tensor_residual, (tv_tensor_sum(t) - target).frobenius());
    const Vec2 vs = tv_vector_sum(t);
    G.tv_vector_residual = std::max(G.tv_vector_residual, std::hypot(vs.x - gv.x, vs.y - gv.y));
    G.tv_pressure_defect =
        std::max(G.tv_pressure_defect, std::abs(t.pressure + (1.0 + gv.x * gv.x + gv.y * gv.y)));
  }
  return G;
}

// ---------------------------------------------------------------- envelopes

double EnvelopeFamily::log_value(double log_t) const {
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(logN.size());
  for (std::size_t i = 0; i < logN.size(); ++i) {
    const double decay = std::exp(2.0 * logN[i] + log_t);  // N^2 t, may be inf
    terms[i] = log_amp[i] + power * logN[i] - decay;
    mx = std::max(mx, terms[i]);
  }
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : terms) s += std::exp(x - mx);
  return mx + std::log(s);
}

EnvelopeFamily envelope_from_ladder(const FrequencyLadder& L, int k_lo, int k_hi, double log_amp, int power) {
  EnvelopeFamily E;
  E.power = power;
  for (int k = k_lo; k <= k_hi; ++k)
    for (int j = 1; j <= L.params.J; ++j) {
      E.logN.push_back(L.logN(j, k));
      E.log_amp.push_back(log_amp);
    }
  return E;
}

EnvelopeFamily envelope_from_log_table(const std::vector<double>& logN, double log_amp, int power) {
  EnvelopeFamily E;
  E.power = power;
  E.logN = logN;
  E.log_amp.assign(logN.size(), log_amp);
  return E;
}

std::vector<double> envelope_log_table(double A, double b, int J, int m_star, int K) {
  std::vector<double> out;
  for (int k = 0; k <= K; ++k)
    for (int j = 1; j <= J; ++j)
      out.push_back(std::log(static_cast<double>(m_star)) + std::pow(b, k + static_cast<double>(j - 1) / J) * std::log(A));
  return out;
}

double EnvelopeFamily::log_scaled(std::size_t anchor, double log_theta) const {
  const double la = logN.at(anchor);
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(logN.size());
  for (std::size_t i = 0; i < logN.size(); ++i) {
    const double d = logN[i] - la;
    terms[i] = log_amp[i] + power * d + 0.5 * power * log_theta - std::exp(log_theta + 2.0 * d);
    mx = std::max(mx, terms[i]);
  }
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : terms) s += std::exp(x - mx);
  return mx + std::log(s);
}

RateFit fit_envelope(const EnvelopeFamily& E, const std::string& quantity, int dense_per_decade) {
  RateFit F;
  F.quantity = quantity;
  const double half_p = 0.5 * E.power, log_theta = std::log(half_p);
  std::vector<std::size_t> order(E.logN.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return E.logN[a] > E.logN[b]; });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return E.logN[a] == E.logN[b]; }),
              order.end());
  if (order.size() < 6) throw std::invalid_argument("fit_envelope: fewer than 6 sequence points");

  // regress y = log(t^{p/2} E) on log t; the E slope is then the y slope minus p/2
  std::vector<double> y;
  F.c = std::numeric_limits<double>::infinity();
  for (std::size_t a : order) {
    const double lt = log_theta - 2.0 * E.logN[a];
    const double ls = E.log_scaled(a, log_theta);
    F.log_t.push_back(lt);
    y.push_back(ls);
    F.log_value.push_back(ls - half_p * lt);
    F.c = std::min(F.c, std::exp(ls));
  }
  double ys = 0.0;
  linear_fit(F.log_t, y, ys, F.intercept, F.residual);
  F.slope = ys - half_p;
  {
    const std::size_t n = F.log_t.size();
    double mx = 0.0, sxx = 0.0;
    for (double x : F.log_t) mx += x / n;
    for (double x : F.log_t) sxx += (x - mx) * (x - mx);
    F.slope_se = n > 2 ? F.residual * std::sqrt(n / (n - 2.0)) / std::sqrt(sxx) : 0.0;
  }
  F.decades = (F.log_t.back() - F.log_t.front()) / std::log(10.0);

  // upper constant: windows [t_i/20, 20 t_i] around each sequence point, then samples across each gap
  F.C = 0.0;
  const int local = std::max(8, 2 * dense_per_decade);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t a = order[i];
    for (int s = 0; s <= local; ++s) {
      const double off = std::log(0.05) + (std::log(20.0) - std::log(0.05)) * s / local;
      F.C = std::max(F.C, std::exp(E.log_scaled(a, log_theta + off)));
    }
    if (i + 1 < order.size()) {
      // the next point sits at a larger t: theta grows by (N_a / N_next)^2
      const double gap = 2.0 * (E.logN[a] - E.logN[order[i + 1]]);
      for (int s = 1; s < 24; ++s) F.C = std::max(F.C, std::exp(E.log_scaled(a, log_theta + gap * s / 24.0)));
    }
  }
  return F;
}

namespace {

// sup on a twice finer grid by spectral zero padding; grid-point sups under-read peaks of modes with
// few points per wavelength
double fine_sup(const SpectralField& f) {
  const Grid2D& g = f.grid();
  const Grid2D G(2 * g.n());
  SpectralField F(G, f.rank());
  for (int c = 0; c < f.ncomp(); ++c)
    for (int i = 0; i < g.n(); ++i) {
      if (g.is_nyquist(i)) continue;
      for (int j = 0; j < g.n(); ++j) {
        if (g.is_nyquist(j)) continue;
        F.at(c, G.index(g.mode(i)), G.index(g.mode(j))) = f.at(c, i, j);
      }
    }
  return sup_norm(F);
}

// directions sharing a synthesis frequency form one shell; each shell is weighted by the sup of its
// combined profile |P Lap sum psi_j| (v) or |Lap sum psi_b,j| (h)
std::vector<std::pair<long long, double>> shell_weights(const CascadeLevel& lvl, bool velocity) {
  const DirectionSets& ds = direction_sets();
  const Grid2D& g = lvl.pots.psi_u.at(0).grid();
  std::map<long long, SpectralField> acc;
  for (int j = 1; j <= ds.J; ++j) {
    const int l = ds.local(j);
    const SpectralField* psi = nullptr;
    if (velocity) {
      if (ds.is_u(j)) psi = &lvl.pots.psi_u[l];
      else if (lvl.pots.has_c) psi = &lvl.pots.psi_c[l];
    } else if (!ds.is_u(j)) {
      psi = &lvl.pots.psi_b[l];
    }
    if (!psi || max_abs_coeff(*psi) == 0.0) continue;
    auto it = acc.find(lvl.N[j - 1]);
    if (it == acc.end()) it = acc.emplace(lvl.N[j - 1], SpectralField(g, psi->rank())).first;
    it->second += *psi;
  }
  std::vector<std::pair<long long, double>> out;
  for (const auto& [N, psi] : acc) {
    const double w = velocity ? fine_sup(leray_project(laplacian(psi))) : fine_sup(laplacian(psi));
    if (w > 0.0) out.emplace_back(N, w);
  }
  return out;
}

}  // namespace

double built_log_amplitude(const CascadeLevel& lvl, bool velocity) {
  const auto w = shell_weights(lvl, velocity);
  if (w.empty()) throw std::invalid_argument("built_log_amplitude: level has no active shells");
  double s = 0.0;
  for (const auto& x : w) s += x.second;
  return std::log(s / w.size());
}

EnvelopeValidation validate_envelope(const CascadeLevel& lvl, bool velocity, int samples) {
  EnvelopeValidation V;
  V.k = lvl.k;
  const auto w = shell_weights(lvl, velocity);
  if (w.empty()) throw std::invalid_argument("validate_envelope: level has no active shells");
  const double nmin = static_cast<double>(w.front().first), nmax = static_cast<double>(w.back().first);
  // from the first sequence time 1/(2 N_max^2) to past the last one, 1/N_min^2
  const double la = std::log(0.5 / (nmax * nmax)), lb = std::log(4.0 / (nmin * nmin));
  V.min_ratio = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double t = std::exp(la + (lb - la) * s / (samples - 1));
    const PrincipalState P = principal_fields(lvl, t);
    const double real = fine_sup(velocity ? P.vbar : P.hbar);
    double proxy = 0.0;
    for (const auto& [Ni, wi] : w) {
      const double N = static_cast<double>(Ni);
      proxy += N * std::exp(-N * N * t) * wi;
    }
    V.t.push_back(t);
    V.real.push_back(real);
    V.proxy.push_back(proxy);
    const double r = proxy > 0.0 ? real / proxy : 0.0;
    V.min_ratio = std::min(V.min_ratio, r);
    V.max_ratio = std::max(V.max_ratio, r);
    V.sqrt_t_real_max = std::max(V.sqrt_t_real_max, std::sqrt(t) * real);
    V.sqrt_t_proxy_max = std::max(V.sqrt_t_proxy_max, std::sqrt(t) * proxy);
  }
  return V;
}

RateScan rate_scan(const Cascade& C, const FrequencyLadder& asym, Exec) {
  RateScan S;
  for (const auto& lvl : C.levels) S.validation.push_back(validate_envelope(lvl, true));
  S.levels_built = static_cast<int>(C.levels.size());
  for (const auto& lvl : C.levels)
    if (!shell_weights(lvl, false).empty()) S.validation.push_back(validate_envelope(lvl, false));
  const CascadeLevel& top = C.levels.back();
  const double av = built_log_amplitude(top, true), ah = built_log_amplitude(top, false);
  const int K = asym.params.K;
  S.levels = K + 1;
  S.v_sup = fit_envelope(envelope_from_ladder(asym, 0, K, av, 1), "v_sup");
  S.v_grad = fit_envelope(envelope_from_ladder(asym, 0, K, av, 2), "v_grad");
  S.h_sup = fit_envelope(envelope_from_ladder(asym, 0, K, ah, 1), "h_sup");
  S.h_grad = fit_envelope(envelope_from_ladder(asym, 0, K, ah, 2), "h_grad");
  return S;
}

// ---------------------------------------------------------------- critical norms

CriticalScan critical_norm_scan(const std::function<double(double)>& log_sup, double log_t_lo, double log_t_hi,
                                int windows, int per_unit) {
  if (!(log_t_hi > log_t_lo) || windows < 2) throw std::invalid_argument("critical_norm_scan: empty window");
  CriticalScan S;
  const double span = log_t_hi - log_t_lo;
  const long n = std::clamp<long>(static_cast<long>(span * per_unit), 64, 400000);
  const double du = span / n;
  // cumulative integrals from t_hi downward on a uniform grid in log s
  std::vector<double> c1(n + 1, 0.0), c2(n + 1, 0.0);
  auto f1 = [&](double u) {
    const double l = log_sup(u);
    return std::isfinite(l) ? std::exp(l + 0.5 * u) : 0.0;
  };
  auto f2 = [&](double u) {
    const double l = log_sup(u);
    return std::isfinite(l) ? std::exp(2.0 * l + u) : 0.0;
  };
  double prev1 = f1(log_t_hi), prev2 = f2(log_t_hi);
  for (long i = 1; i <= n; ++i) {
    const double u = log_t_hi - i * du;
    const double a = f1(u), b = f2(u);
    c1[i] = c1[i - 1] + 0.5 * du * (a + prev1);
    c2[i] = c2[i - 1] + 0.5 * du * (b + prev2);
    prev1 = a;
    prev2 = b;
  }
  std::vector<double> y;
  for (int w = 1; w <= windows; ++w) {
    const long idx = n * w / windows;
    S.log_ratio.push_back(idx * du);
    S.l1_weighted.push_back(c1[idx]);
    S.l2_squared.push_back(c2[idx]);
    y.push_back(c1[idx] + c2[idx]);
  }
  double icpt = 0.0, rms = 0.0;
  linear_fit(S.log_ratio, y, S.slope, icpt, rms);
  return S;
}

CriticalScan critical_norm_scan(const EnvelopeFamily& E, double log_t_lo, double log_t_hi, int windows) {
  return critical_norm_scan([&E](double u) { return E.log_value(u); }, log_t_lo, log_t_hi, windows);
}

// ---------------------------------------------------------------- Lp intermittency

LpScan lp_scan(const Cascade& C, const std::vector<double>& p_list, std::size_t region_samples, std::uint64_t seed) {
  LpScan S;
  const double area = kTwoPi * kTwoPi;
  for (const auto& lvl : C.levels) {
    double nmin = std::numeric_limits<double>::infinity(), nmax = 0.0;
    for (long long N : lvl.N) {
      nmin = std::min(nmin, static_cast<double>(N));
      nmax = std::max(nmax, static_cast<double>(N));
    }
    const double frac = lvl.k == 0 ? 1.0 : sample_region_fraction(lvl.k, C.ladder, region_samples, seed + lvl.k);
    const double t = 1.0 / (nmin * nmax);
    const PrincipalState P = principal_fields(lvl, t);
    const PhysicalField vp = to_physical(P.vbar), hp = to_physical(P.hbar);
    const double sv = sup_norm(vp), sh = sup_norm(hp);
    for (double p : p_list) {
      LpEntry e;
      e.k = lvl.k;
      e.p = p;
      e.t = t;
      e.region_fraction = frac;
      if (std::isinf(p)) {
        e.ratio_v = sv > 0.0 ? 1.0 : 0.0;
        e.ratio_h = sh > 0.0 ? 1.0 : 0.0;
        e.bound = 1.0;
      } else {
        e.ratio_v = sv > 0.0 ? lp_norm(vp, p) / std::pow(area, 1.0 / p) / sv : 0.0;
        e.ratio_h = sh > 0.0 ? lp_norm(hp, p) / std::pow(area, 1.0 / p) / sh : 0.0;
        e.bound = std::pow(std::min(frac, std::pow(2.0, -lvl.k)), 1.0 / p);
      }
      S.entries.push_back(e);
    }
    // L^2 in time of |vbar_k|_4 over the level's window, trapezoid in log t
    const int nt = 17;
    const double la = std::log(1.0 / (16.0 * nmax * nmax)), lb = std::log(16.0 / (nmin * nmin));
    double acc = 0.0, prev = 0.0;
    for (int s = 0; s < nt; ++s) {
      const double lt = la + (lb - la) * s / (nt - 1);
      const double n4 = lp_norm(principal_fields(lvl, std::exp(lt)).vbar, 4.0);
      const double f = n4 * n4 * std::exp(lt);
      if (s > 0) acc += 0.5 * (lb - la) / (nt - 1) * (f + prev);
      prev = f;
    }
    S.l2t_l4.push_back(std::sqrt(acc));
  }
  return S;
}

// ---------------------------------------------------------------- bound probes

CommutatorProbe commutator_probe(const SpectralField& a, int xi1, int xi2, const std::vector<double>& t_list, int n,
                                 int m) {
  require_rank(a, Rank::Scalar, "commutator_probe");
  if (m < 3 + n) throw std::invalid_argument("commutator_probe: need m >= 3 + n");
  if (xi1 == 0 && xi2 == 0) throw std::invalid_argument("commutator_probe: xi must be nonzero");
  const Grid2D& g = a.grid();
  const double xn = std::hypot(static_cast<double>(xi1), static_cast<double>(xi2));
  const PhysicalField s = sample(g, Rank::Scalar, [&](double x1, double x2, double* o) { o[0] = std::sin(xi1 * x1 + xi2 * x2); });
  const PhysicalField ap = to_physical(a);
  PhysicalField as = s;
  for (std::size_t q = 0; q < as.data.size(); ++q) as.data[q] *= ap.data[q];
  const SpectralField AS = to_spectral(as), S = to_spectral(s);
  std::vector<double> A(n + m + 1);
  for (int i = 0; i <= n + m; ++i) A[i] = std::pow(xn, -i) * partial_sup(a, i);
  const double scale = sup_norm(ap);
  CommutatorProbe P;
  for (double t : t_list) {
    PhysicalField rhs_part = to_physical(heat_semigroup(S, t));
    for (std::size_t q = 0; q < rhs_part.data.size(); ++q) rhs_part.data[q] *= ap.data[q];
    const SpectralField comm = heat_semigroup(AS, t) - to_spectral(rhs_part);
    const double lhs = partial_sup(comm, n);
    double shape = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double mix = std::pow(A[i], 1.0 - 1.0 / m) * std::pow(A[m + i], 1.0 / m) +
                         std::pow(A[i], 1.0 - 2.0 / m) * std::pow(A[m + i], 2.0 / m);
      shape += mix * std::exp(-xn * xn * t / 4.0) + A[m + i];
    }
    shape *= std::pow(xn, n);
    P.t.push_back(t);
    P.lhs.push_back(lhs);
    P.rhs_shape.push_back(shape);
    double r = 0.0;
    if (shape > 0.0) r = lhs / shape;
    else if (lhs > 1e-12 * std::max(scale, 1.0)) r = std::numeric_limits<double>::infinity();
    P.constant = std::max(P.constant, r);
  }
  return P;
}

ProductProbe product_bound_probe(int grid, int pairs, int kmax, std::uint64_t seed, const PathNormParams& p,
                                 double tbar) {
  p.validate();
  const Grid2D g(grid);
  const std::vector<double> t = geometric_times(tbar);
  ProductProbe P;
  P.pairs = pairs;
  for (int s = 0; s < pairs; ++s) {
    SpectralField g0 = random_field(g, Rank::Vector, seed + 2 * s, kmax);
    SpectralField h0 = random_field(g, Rank::Vector, seed + 2 * s + 1, kmax);
    g0 *= 1.0 / sup_norm(g0);
    h0 *= 1.0 / sup_norm(h0);
    std::vector<SpectralField> G(t.size()), H(t.size()), GH(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] <= 0.0) {
        G[i] = SpectralField(g, Rank::Vector);
        H[i] = SpectralField(g, Rank::Vector);
        GH[i] = SpectralField(g, Rank::SymTensor);
        continue;
      }
      const double w = std::pow(t[i], -0.5 * (1.0 - p.alpha));
      G[i] = w * heat_semigroup(g0, t[i]);
      H[i] = w * heat_semigroup(h0, t[i]);
      GH[i] = to_spectral(sym_outer(to_physical(G[i]), to_physical(H[i])));
    }
    const double r = y_norm(t, GH, p) / (x_norm(t, G, p) * x_norm(t, H, p));
    P.constant = std::max(P.constant, r);
  }
  return P;
}

SemigroupProbe semigroup_bound_probe(const TimePath& coeff, const std::vector<double>& t_grid, int kmax,
                                     std::uint64_t seed, const PathNormParams& p, const StepperOptions& opt) {
  p.validate();
  if (t_grid.size() < 2) throw std::invalid_argument("semigroup_bound_probe: need two probe times");
  const Grid2D& g = coeff.a.front().grid;
  SpectralField fu = random_field(g, Rank::SymTensor, seed, kmax);
  SpectralField fb = random_field(g, Rank::Vector, seed + 1, kmax);
  fu *= 1.0 / sup_norm(fu);
  fb *= 1.0 / sup_norm(fb);
  // Phi(t') = t'^{-(1-a)} (fu, fb): its Y norm over the corrector grid
  const std::vector<double> tt = geometric_times(coeff.t.back());
  std::vector<SpectralField> pu(tt.size()), pb(tt.size());
  for (std::size_t i = 0; i < tt.size(); ++i) {
    const double w = tt[i] > 0.0 ? std::pow(tt[i], -(1.0 - p.alpha)) : 0.0;
    pu[i] = w * fu;
    pb[i] = w * fb;
  }
  const double ynorm = y_norm(tt, pu, p) + y_norm(tt, pb, p);
  SemigroupProbe P;
  for (std::size_t a = 0; a < t_grid.size(); ++a) {
    for (std::size_t b = a + 1; b < t_grid.size(); ++b) {
      const double tp = t_grid[a], t = t_grid[b];
      const double w = std::pow(tp, -(1.0 - p.alpha));
      const SemigroupResult R = semigroup_apply(w * fu, w * fb, coeff, tp, t, opt);
      const double lhs = sup_norm(R.W) + sup_norm(R.Z);
      const double shape = std::pow(t, -0.5) * std::pow(tp, -1.0 + p.alpha) * std::pow(t / tp, p.epsilon) * ynorm;
      P.tp.push_back(tp);
      P.t.push_back(t);
      P.ratio.push_back(lhs / shape);
      P.constant = std::max(P.constant, lhs / shape);
    }
  }
  return P;
}

}  // namespace ictk
