#include "ictk/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace ictk {

void PathNormParams::validate() const {
  if (!(kappa > 0.0 && kappa < alpha && alpha < 0.1))
    throw std::invalid_argument("path norms need 0 < kappa < alpha < 1/10");
  if (!(epsilon > 0.0 && epsilon < alpha)) throw std::invalid_argument("path norms need 0 < epsilon < alpha");
}

std::vector<double> geometric_times(double tbar, double lo_frac, double ratio) {
  if (!(tbar > 0.0) || !(lo_frac > 0.0 && lo_frac < 1.0) || !(ratio > 1.0))
    throw std::invalid_argument("geometric_times: need tbar > 0, 0 < lo_frac < 1, ratio > 1");
  const int M = static_cast<int>(std::ceil(std::log(1.0 / lo_frac) / std::log(ratio)));
  std::vector<double> t{0.0};
  for (int m = M; m >= 0; --m) t.push_back(tbar * std::pow(ratio, -m));
  return t;
}

// ---------------------------------------------------------------- norms

namespace {

struct ShellTable {
  std::vector<long long> N;
  std::vector<std::vector<double>> w;  // per shell, per storage index
};

const ShellTable& shells(const Grid2D& g) {
  static std::mutex mu;
  static std::map<int, ShellTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(g.n());
  if (it != cache.end()) return it->second;
  ShellTable T;
  const double rmax = std::sqrt(2.0) * (g.n() / 2);
  for (long long N = 1; 2.0 * N / 3.0 < rmax; N *= 2) {
    std::vector<double> w(g.size(), 0.0);
    for_each_mode(g, Exec::Serial, [&](int i, int j, double k1, double k2) {
      const double r = std::sqrt(k1 * k1 + k2 * k2) / static_cast<double>(N);
      if (r > 2.0 / 3.0 && r < 1.5) w[static_cast<std::size_t>(i) * g.n() + j] = lp_bump(r);
    });
    T.N.push_back(N);
    T.w.push_back(std::move(w));
  }
  return cache.emplace(g.n(), std::move(T)).first->second;
}

// pointwise Euclidean norm across scalar components, each weighted
double sup_components(const std::vector<PhysicalField>& c, const std::vector<double>& wt) {
  const std::size_t m = c.front().grid.size();
  double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::size_t q = 0; q < m; ++q) {
    double s = 0.0;
    for (std::size_t a = 0; a < c.size(); ++a) s += wt[a] * c[a].data[q] * c[a].data[q];
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double holder_scalar_list(const std::vector<SpectralField>& comps, const std::vector<double>& wt, double kappa) {
  const Grid2D& g = comps.front().grid();
  const ShellTable& T = shells(g);
  std::vector<PhysicalField> phys;
  for (const auto& c : comps) phys.push_back(to_physical(c));
  double out = sup_components(phys, wt);
  double dyadic = 0.0;
  for (std::size_t s = 0; s < T.N.size(); ++s) {
#pragma omp parallel for schedule(static)
    for (std::size_t a = 0; a < comps.size(); ++a) to_physical_multiplied(comps[a], 0, T.w[s], phys[a].data.data());
    dyadic = std::max(dyadic, std::pow(static_cast<double>(T.N[s]), kappa) * sup_components(phys, wt));
  }
  return out + dyadic;
}

std::vector<double> component_weights(Rank r) {
  if (r == Rank::SymTensor) return {1.0, 1.0, 2.0};
  return std::vector<double>(components(r), 1.0);
}

double grad_holder(const SpectralField& V, double kappa) {
  const std::vector<SpectralField> gc = gradient_components(V);
  std::vector<double> wt;
  const std::vector<double> base = component_weights(V.rank());
  for (int c = 0; c < V.ncomp(); ++c) wt.insert(wt.end(), {base[c], base[c]});
  return holder_scalar_list(gc, wt, kappa);
}

double weighted_path_norm(const std::vector<double>& t, const std::vector<SpectralField>& V, double p0, double p1,
                          double kappa) {
  if (t.size() != V.size()) throw std::invalid_argument("path norm: one field per time");
  double best = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || V[i].empty()) continue;
    const double a = std::pow(t[i], p0) * sup_norm(V[i]);
    const double b = std::pow(t[i], p1) * grad_holder(V[i], kappa);
    best = std::max(best, a + b);
  }
  return best;
}

}  // namespace

double holder_proxy(const SpectralField& g, double kappa) {
  std::vector<SpectralField> comps;
  for (int c = 0; c < g.ncomp(); ++c) comps.push_back(g.component(c));
  return holder_scalar_list(comps, component_weights(g.rank()), kappa);
}

double x_norm(const std::vector<double>& t, const std::vector<SpectralField>& V, const PathNormParams& p) {
  return weighted_path_norm(t, V, 0.5 * (1.0 - p.alpha), 0.5 * (2.0 - p.alpha), p.kappa);
}

double y_norm(const std::vector<double>& t, const std::vector<SpectralField>& phi, const PathNormParams& p) {
  return weighted_path_norm(t, phi, 1.0 - p.alpha, 1.5 - p.alpha, p.kappa);
}

// ---------------------------------------------------------------- background and rescaling

PhysicalField BackgroundPair::U(const Grid2D& g, double t, int N0) const {
  if (N0 < 1) throw std::invalid_argument("background: N0 >= 1");
  const double a = u_amp * std::exp(-t) / N0;
  return sample(g, Rank::Vector, [a](double x1, double x2, double* o) {
    o[0] = a * std::sin(x2);
    o[1] = a * std::sin(x1);
  });
}

PhysicalField BackgroundPair::H(const Grid2D& g, double t, int N0) const {
  if (N0 < 1) throw std::invalid_argument("background: N0 >= 1");
  const double a = h_amp * std::exp(-t) / N0;
  return sample(g, Rank::Scalar, [a](double x1, double x2, double* o) { o[0] = a * (std::cos(x2) - std::cos(x1)); });
}

double BackgroundPair::C_UH(const Grid2D& g) const {
  // sampling roundoff sits in every mode and would dominate tenth derivatives
  auto clean = [](SpectralField f) {
    const double floor = 1e-12 * max_abs_coeff(f);
    for (cplx& z : f.raw())
      if (std::abs(z) < floor) z = 0.0;
    return f;
  };
  const SpectralField u = clean(to_spectral(U(g, 0.0))), h = clean(to_spectral(H(g, 0.0)));
  double best = 0.0;
  for (int n = 0; n <= 10; ++n) {
    double su = 0.0, sh = 0.0;
    for (int p = 0; p <= n; ++p) {
      SpectralField du = u, dh = h;
      for (int r = 0; r < p; ++r) {
        du = directional_derivative(du, 1.0, 0.0);
        dh = directional_derivative(dh, 1.0, 0.0);
      }
      for (int r = p; r < n; ++r) {
        du = directional_derivative(du, 0.0, 1.0);
        dh = directional_derivative(dh, 0.0, 1.0);
      }
      su = std::max(su, sup_norm(du));
      sh = std::max(sh, sup_norm(dh));
    }
    best = std::max(best, su + sh);
  }
  return best;
}

SpectralField rescale(const SpectralField& f, int N0, bool up) {
  if (N0 < 1) throw std::invalid_argument("rescale: N0 >= 1");
  const Grid2D& g = f.grid();
  SpectralField out(g, f.rank());
  if (N0 == 1) return f;
  const int n = g.n();
  const double floor = 1e-14 * std::max(max_abs_coeff(f), 1e-300);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.is_nyquist(i) || g.is_nyquist(j)) continue;
      const int m1 = g.mode(i), m2 = g.mode(j);
      bool nonzero = false;
      for (int c = 0; c < f.ncomp(); ++c) nonzero = nonzero || std::abs(f.at(c, i, j)) > floor;
      if (!nonzero) continue;
      if (up) {
        const long long r1 = static_cast<long long>(m1) * N0, r2 = static_cast<long long>(m2) * N0;
        if (std::llabs(r1) >= n / 2 || std::llabs(r2) >= n / 2)
          throw std::out_of_range("rescale up: mode (" + std::to_string(m1) + "," + std::to_string(m2) +
                                  ") leaves the grid at N0 = " + std::to_string(N0));
        for (int c = 0; c < f.ncomp(); ++c)
          out.at(c, g.index(static_cast<int>(r1)), g.index(static_cast<int>(r2))) = static_cast<double>(N0) * f.at(c, i, j);
      } else {
        if (m1 % N0 != 0 || m2 % N0 != 0)
          throw OffLattice("rescale down: mode (" + std::to_string(m1) + "," + std::to_string(m2) +
                           ") is not on the N0 = " + std::to_string(N0) + " lattice");
        for (int c = 0; c < f.ncomp(); ++c)
          out.at(c, g.index(m1 / N0), g.index(m2 / N0)) = f.at(c, i, j) / static_cast<double>(N0);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- time paths

namespace {

PhysicalField interp(const std::vector<double>& t, const std::vector<PhysicalField>& f, double s) {
  if (f.empty()) throw std::invalid_argument("time path is empty");
  if (s <= t.front()) return f.front();
  if (s >= t.back()) return f.back();
  const std::size_t hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), s) - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (s - t[lo]) / (t[hi] - t[lo]);
  PhysicalField out = f[lo];
  const double* b = f[hi].data.data();
  double* o = out.data.data();
  const std::size_t m = out.data.size();
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < m; ++q) o[q] += w * (b[q] - o[q]);
  return out;
}

}  // namespace

PhysicalField TimePath::at_a(double s) const { return interp(t, a, s); }
PhysicalField TimePath::at_b(double s) const { return interp(t, b, s); }

// ---------------------------------------------------------------- stepping

namespace {

void add_into(PhysicalField& a, const PhysicalField& b, double s = 1.0) {
  double* x = a.data.data();
  const double* y = b.data.data();
  const std::size_t m = a.data.size();
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < m; ++q) x[q] += s * y[q];
}

std::vector<double> heat_table(const Grid2D& g, double h, Exec ex) {
  std::vector<double> e(g.size());
  for_each_mode(g, ex, [&](int i, int j, double k1, double k2) {
    e[static_cast<std::size_t>(i) * g.n() + j] = std::exp(-(k1 * k1 + k2 * k2) * h);
  });
  return e;
}

// out = e * (x + s y), y may be null
SpectralField heat_apply(const std::vector<double>& e, const SpectralField& x, const SpectralField* y, double s) {
  SpectralField out(x.grid(), x.rank());
  const std::size_t m = x.grid().size();
  for (int c = 0; c < x.ncomp(); ++c) {
    const cplx* a = x.comp(c);
    const cplx* b = y ? y->comp(c) : nullptr;
    cplx* o = out.comp(c);
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < m; ++q) o[q] = e[q] * (b ? a[q] + s * b[q] : a[q]);
  }
  return out;
}

// x = e1 * x + (eh * k) * h in place
void heat_update(const std::vector<double>& e1, const std::vector<double>& eh, SpectralField& x, const SpectralField& k,
                 double h) {
  const std::size_t m = x.grid().size();
  for (int c = 0; c < x.ncomp(); ++c) {
    cplx* a = x.comp(c);
    const cplx* b = k.comp(c);
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < m; ++q) a[q] = e1[q] * a[q] + eh[q] * b[q] * h;
  }
}

struct Pair {
  SpectralField W, Z;
};

class LinearStepper {
 public:
  LinearStepper(const TimePath& coeff, const TimePath* force, Exec ex) : coeff_(coeff), force_(force), ex_(ex) {}

  // -(P div(2 v (.) W + F_u), div(v Z + W h + F_b)), coefficients interpolated in place
  Pair rhs(const Pair& y, double s) const {
    const Grid2D& g = y.W.grid();
    const PhysicalField Wp = to_physical(y.W), Zp = to_physical(y.Z);
    std::size_t lo = 0, hi = 0;
    double w = 0.0;
    bracket(s, lo, hi, w);
    const std::size_t m = g.size();
    PhysicalField Tu(g, Rank::SymTensor), Tb(g, Rank::Vector);
    const double *va = coeff_.a[lo].data.data(), *vb = coeff_.a[hi].data.data();
    const double *ha = coeff_.b[lo].data.data(), *hb = coeff_.b[hi].data.data();
    const double *fa = force_ ? force_->a[lo].data.data() : nullptr, *fb = force_ ? force_->a[hi].data.data() : nullptr;
    const double *ga = force_ ? force_->b[lo].data.data() : nullptr, *gb = force_ ? force_->b[hi].data.data() : nullptr;
    const double *W1 = Wp.comp(0), *W2 = Wp.comp(1), *Z = Zp.comp(0);
    double *t11 = Tu.comp(0), *t22 = Tu.comp(1), *t12 = Tu.comp(2), *b1 = Tb.comp(0), *b2 = Tb.comp(1);
    const double u = 1.0 - w;
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < m; ++q) {
      const double v1 = u * va[q] + w * vb[q], v2 = u * va[m + q] + w * vb[m + q];
      const double h = u * ha[q] + w * hb[q];
      t11[q] = 2.0 * v1 * W1[q];
      t22[q] = 2.0 * v2 * W2[q];
      t12[q] = v1 * W2[q] + v2 * W1[q];
      b1[q] = v1 * Z[q] + W1[q] * h;
      b2[q] = v2 * Z[q] + W2[q] * h;
      if (fa) {
        t11[q] += u * fa[q] + w * fb[q];
        t22[q] += u * fa[m + q] + w * fb[m + q];
        t12[q] += u * fa[2 * m + q] + w * fb[2 * m + q];
        b1[q] += u * ga[q] + w * gb[q];
        b2[q] += u * ga[m + q] + w * gb[m + q];
      }
    }
    const SpectralField Su = to_spectral(Tu), Sb = to_spectral(Tb);
    Pair out{SpectralField(g, Rank::Vector), SpectralField(g, Rank::Scalar)};
    const int n = g.n();
    const cplx I(0.0, 1.0);
    const cplx *s11 = Su.comp(0), *s22 = Su.comp(1), *s12 = Su.comp(2), *sb1 = Sb.comp(0), *sb2 = Sb.comp(1);
    cplx *w1 = out.W.comp(0), *w2 = out.W.comp(1), *z = out.Z.comp(0);
    auto row = [&](int i) {
      const double k1 = g.wave(i);
      for (int j = 0; j < n; ++j) {
        const double k2 = g.wave(j);
        const std::size_t q = static_cast<std::size_t>(i) * n + j;
        // div of (T11, T22, T12): (i k1 T11 + i k2 T12, i k1 T12 + i k2 T22)
        const cplx d1 = I * (k1 * s11[q] + k2 * s12[q]);
        const cplx d2 = I * (k1 * s12[q] + k2 * s22[q]);
        const double kk = k1 * k1 + k2 * k2;
        const cplx p = kk > 0.0 ? (k1 * d1 + k2 * d2) * (1.0 / kk) : cplx(0.0);
        w1[q] = -(d1 - k1 * p);
        w2[q] = -(d2 - k2 * p);
        z[q] = -I * (k1 * sb1[q] + k2 * sb2[q]);
      }
    };
    if (ex_ == Exec::Parallel) {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n; ++i) row(i);
    } else {
      for (int i = 0; i < n; ++i) row(i);
    }
    return out;
  }

  // n exponential midpoint steps of size h from time s
  void advance(Pair& y, double s, double h, long n) const {
    const Grid2D& g = y.W.grid();
    const std::vector<double> e1 = heat_table(g, h, ex_), eh = heat_table(g, 0.5 * h, ex_);
    for (long r = 0; r < n; ++r) {
      const double s0 = s + r * h;
      const Pair k1 = rhs(y, s0);
      Pair mid{heat_apply(eh, y.W, &k1.W, 0.5 * h), heat_apply(eh, y.Z, &k1.Z, 0.5 * h)};
      const Pair k2 = rhs(mid, s0 + 0.5 * h);
      heat_update(e1, eh, y.W, k2.W, h);
      heat_update(e1, eh, y.Z, k2.Z, h);
    }
  }

 private:
  void bracket(double s, std::size_t& lo, std::size_t& hi, double& w) const {
    const std::vector<double>& t = coeff_.t;
    if (s <= t.front()) {
      lo = hi = 0;
      w = 0.0;
    } else if (s >= t.back()) {
      lo = hi = t.size() - 1;
      w = 0.0;
    } else {
      hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), s) - t.begin());
      lo = hi - 1;
      w = (s - t[lo]) / (t[hi] - t[lo]);
    }
  }

  const TimePath& coeff_;
  const TimePath* force_;
  Exec ex_;
};

std::vector<double> coefficient_sups(const TimePath& coeff) {
  std::vector<double> s(coeff.t.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = sup_norm(coeff.a[i]);
  return s;
}

double coefficient_sup_between(const TimePath& coeff, const std::vector<double>& sups, double t0, double t1) {
  double m = std::max(sup_norm(coeff.at_a(t0)), sup_norm(coeff.at_a(t1)));
  for (std::size_t i = 0; i < coeff.t.size(); ++i)
    if (coeff.t[i] > t0 && coeff.t[i] < t1) m = std::max(m, sups[i]);
  return m;
}

double pair_sup(const Pair& y) { return sup_norm(y.W) + sup_norm(y.Z); }

}  // namespace

PathState solve_forced(const TimePath& coeff, const TimePath& force, const StepperOptions& opt) {
  if (coeff.t.empty() || coeff.t != force.t) throw std::invalid_argument("solve_forced: coefficient and forcing paths share one time grid");
  if (opt.substeps < 1 || !(opt.cfl > 0.0)) throw std::invalid_argument("solve_forced: substeps >= 1 and cfl > 0");
  const Grid2D& g = coeff.a.front().grid;
  const LinearStepper stepper(coeff, &force, opt.exec);
  const std::vector<double> sups = coefficient_sups(coeff);
  PathState out;
  out.t = coeff.t;
  Pair y{SpectralField(g, Rank::Vector), SpectralField(g, Rank::Scalar)};
  out.W.push_back(y.W);
  out.Z.push_back(y.Z);
  for (std::size_t i = 0; i + 1 < coeff.t.size(); ++i) {
    const double t0 = coeff.t[i], t1 = coeff.t[i + 1], span = t1 - t0;
    const double vmax = std::max(std::max(sups[i], sups[i + 1]), 1e-300);
    const long n = std::max<long>(opt.substeps, static_cast<long>(std::ceil(span * vmax / (opt.cfl * g.dx()))));
    stepper.advance(y, t0, span / n, n);
    out.steps += n;
    out.W.push_back(y.W);
    out.Z.push_back(y.Z);
  }
  return out;
}

SemigroupResult semigroup_apply(const SpectralField& phi_u, const SpectralField& phi_b, const TimePath& coeff,
                                double tp, double t, const StepperOptions& opt, bool check_halving) {
  require_rank(phi_u, Rank::SymTensor, "semigroup_apply");
  require_rank(phi_b, Rank::Vector, "semigroup_apply");
  if (!(t > tp)) throw std::invalid_argument("semigroup_apply: need t > t'");
  const Grid2D& g = phi_u.grid();
  const LinearStepper stepper(coeff, nullptr, opt.exec);
  const double vmax = std::max(coefficient_sup_between(coeff, coefficient_sups(coeff), tp, t), 1e-300);
  const double span = t - tp;
  const double h = std::min(opt.cfl * g.dx() / vmax, span / 32.0);
  const long n = static_cast<long>(std::ceil(span / h));
  const Pair y0{leray_project(div(phi_u, opt.exec), opt.exec), div(phi_b, opt.exec)};
  auto run = [&](long steps) {
    Pair y = y0;
    stepper.advance(y, tp, span / steps, steps);
    return y;
  };
  SemigroupResult r;
  Pair y = run(n);
  r.steps = n;
  if (check_halving) {
    const Pair y2 = run(2 * n), y4 = run(4 * n);
    const double d1 = pair_sup(Pair{y.W - y2.W, y.Z - y2.Z});
    const double d2 = pair_sup(Pair{y2.W - y4.W, y2.Z - y4.Z});
    r.halving_ratio = d2 > 0.0 ? d1 / d2 : 0.0;
  }
  r.W = std::move(y.W);
  r.Z = std::move(y.Z);
  return r;
}

// ---------------------------------------------------------------- corrector problem

CorrectorProblem prepare_corrector(const Cascade& C, const CorrectorConfig& cfg) {
  cfg.norms.validate();
  const int K = C.K();
  if (K < 1) throw std::invalid_argument("prepare_corrector: the cascade needs K >= 1");
  if (K > 1 && cfg.cascade_scale != 0.0 && cfg.cascade_scale != 1.0)
    throw std::invalid_argument("prepare_corrector: a cascade scale other than 1 is only exact for K = 1");
  if (!(cfg.tbar > 0.0)) throw std::invalid_argument("prepare_corrector: tbar > 0");
  const Grid2D& g = C.grid;
  const Exec ex = C.config.exec;
  CorrectorProblem P;
  P.grid = g;
  P.t = geometric_times(cfg.tbar);
  P.C_UH = cfg.background.C_UH(g) / cfg.N0;
  const std::size_t nt = P.t.size();

  // unscaled pieces per time: v, h, and the forcing split by its degree in mu
  std::vector<PhysicalField> v(nt), h(nt), fu4(nt), fb4(nt), fu2(nt), fb2(nt);
  const std::size_t chunk = 8;
  for (std::size_t i0 = 0; i0 < nt; i0 += chunk) {
    const std::vector<double> ts(P.t.begin() + i0, P.t.begin() + std::min(nt, i0 + chunk));
    std::vector<std::vector<DuhamelState>> per_level;
    for (int k = 0; k < K; ++k) per_level.push_back(duhamel_fields(C, k, ts, ex));
    for (std::size_t r = 0; r < ts.size(); ++r) {
      std::vector<DuhamelState> at;
      SpectralField vs(g, Rank::Vector), hs(g, Rank::Scalar);
      for (int k = 0; k < K; ++k) {
        at.push_back(std::move(per_level[k][r]));
        vs += at.back().v;
        hs += at.back().h;
      }
      const ForcingPair F = assemble_forcing(C, ts[r], at);
      const std::size_t i = i0 + r;
      v[i] = to_physical(vs);
      h[i] = to_physical(hs);
      if (K == 1) {
        fu4[i] = to_physical(F.f_u_level[0]);
        fb4[i] = to_physical(F.f_b_level[0]);
        fu2[i] = to_physical(F.f_u_level[1]);
        fb2[i] = to_physical(F.f_b_level[1]);
      } else {
        fu4[i] = to_physical(F.f_u);
        fb4[i] = to_physical(F.f_b);
      }
      P.v_sup = std::max(P.v_sup, sup_norm(v[i]));
    }
  }

  const double u0 = sup_norm(cfg.background.U(g, 0.0, cfg.N0));
  double mu = cfg.cascade_scale;
  if (mu == 0.0) mu = (K == 1 && P.v_sup > 0.0) ? std::sqrt(u0 / P.v_sup) : 1.0;
  if (!(mu > 0.0)) throw std::invalid_argument("prepare_corrector: cascade scale must be positive");
  P.mu = mu;
  const double m2 = mu * mu, m4 = m2 * m2;

  P.coeff.t = P.forcing.t = P.t;
  for (std::size_t i = 0; i < nt; ++i) {
    const PhysicalField U = cfg.background.U(g, P.t[i], cfg.N0), H = cfg.background.H(g, P.t[i], cfg.N0);
    PhysicalField vt = U, ht = H;
    add_into(vt, v[i], m2);
    add_into(ht, h[i], m2);
    PhysicalField Fu(g, Rank::SymTensor), Fb(g, Rank::Vector);
    add_into(Fu, fu4[i], K == 1 ? m4 : 1.0);
    add_into(Fb, fb4[i], K == 1 ? m4 : 1.0);
    if (K == 1) {
      add_into(Fu, fu2[i], m2);
      add_into(Fb, fb2[i], m2);
    }
    add_into(Fu, sym_outer(U, v[i]), 2.0 * m2);
    add_into(Fb, scale_vector(U, h[i]), m2);
    add_into(Fb, scale_vector(v[i], H), m2);
    P.coeff.a.push_back(std::move(vt));
    P.coeff.b.push_back(std::move(ht));
    P.forcing.a.push_back(std::move(Fu));
    P.forcing.b.push_back(std::move(Fb));
    fu4[i] = fb4[i] = fu2[i] = fb2[i] = v[i] = h[i] = PhysicalField();
  }
  P.v_sup *= m2;
  return P;
}

PathState corrector_map(const CorrectorProblem& P, const std::vector<SpectralField>& W,
                        const std::vector<SpectralField>& Z, double forcing_scale, const StepperOptions& opt) {
  const std::size_t nt = P.t.size();
  const bool zero = W.empty();
  if (!zero && (W.size() != nt || Z.size() != nt)) throw std::invalid_argument("corrector_map: one field per time");
  TimePath force;
  force.t = P.t;
  for (std::size_t i = 0; i < nt; ++i) {
    PhysicalField a(P.grid, Rank::SymTensor), b(P.grid, Rank::Vector);
    if (!zero) {
      const PhysicalField Wp = to_physical(W[i]), Zp = to_physical(Z[i]);
      a = sym_outer(Wp, Wp);
      b = scale_vector(Wp, Zp);
    }
    if (forcing_scale != 0.0) {
      add_into(a, P.forcing.a[i], forcing_scale);
      add_into(b, P.forcing.b[i], forcing_scale);
    }
    force.a.push_back(std::move(a));
    force.b.push_back(std::move(b));
  }
  return solve_forced(P.coeff, force, opt);
}

namespace {

double pair_x_norm(const std::vector<double>& t, const std::vector<SpectralField>& W, const std::vector<SpectralField>& Z,
                   const PathNormParams& p) {
  return x_norm(t, W, p) + x_norm(t, Z, p);
}

std::vector<SpectralField> difference(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
  if (b.empty()) return a;
  std::vector<SpectralField> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

LipschitzEstimate lipschitz_dry_run(const CorrectorProblem& P, const CorrectorConfig& cfg) {
  LipschitzEstimate L;
  PathState F0 = corrector_map(P, {}, {}, 1.0, cfg.stepper);
  L.F0_norm = pair_x_norm(P.t, F0.W, F0.Z, cfg.norms);
  if (!(L.F0_norm > 0.0)) throw std::invalid_argument("lipschitz_dry_run: zero forcing gives no probe direction");
  for (auto& f : F0.W) f *= 1.0 / L.F0_norm;
  for (auto& f : F0.Z) f *= 1.0 / L.F0_norm;
  const PathState Q = corrector_map(P, F0.W, F0.Z, 0.0, cfg.stepper);
  L.C_hat = pair_x_norm(P.t, Q.W, Q.Z, cfg.norms);
  return L;
}

CorrectorState picard_solve(const CorrectorProblem& P, const CorrectorConfig& cfg, double delta, double forcing_scale) {
  if (!(delta > 0.0)) throw std::invalid_argument("picard_solve: delta > 0");
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) throw std::invalid_argument("picard_solve: max_iter >= 1 and tol > 0");
  CorrectorState S;
  S.t = P.t;
  S.delta = delta;
  S.forcing_scale = forcing_scale;
  std::vector<SpectralField> W, Z, W_prev, Z_prev;
  double prev = 0.0;
  int above_one = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    PathState F = corrector_map(P, W, Z, forcing_scale, cfg.stepper);
    const double upd = pair_x_norm(P.t, difference(F.W, W), difference(F.Z, Z), cfg.norms);
    IterationRecord rec{it, upd, it > 1 && prev > 0.0 ? upd / prev : 0.0};
    S.log.push_back(rec);
    W_prev = std::move(W);
    Z_prev = std::move(Z);
    W = std::move(F.W);
    Z = std::move(F.Z);
    prev = upd;
    if (it > 1) {
      S.rho_max = std::max(S.rho_max, rec.rho);
      above_one = rec.rho >= 1.0 ? above_one + 1 : 0;
      if (above_one >= 5)
        throw PicardDivergence("Picard iteration diverges: successive-update ratio " + std::to_string(rec.rho) +
                               " at iteration " + std::to_string(it) + " with delta " + std::to_string(delta));
    }
    if (upd <= cfg.tol) {
      S.converged = true;
      break;
    }
  }
  // geometric mean of up to three trailing ratios
  double lr = 0.0;
  int cnt = 0;
  for (auto it = S.log.rbegin(); it != S.log.rend() && cnt < 3; ++it)
    if (it->rho > 0.0) {
      lr += std::log(it->rho);
      ++cnt;
    }
  S.rho = cnt ? std::exp(lr / cnt) : 0.0;
  // the last update is the exact fixed-point residual of the iterate it was applied to, so that
  // iterate is returned instead of paying one more map to measure the residual of the newest one
  S.residual = S.log.back().update;
  if (S.residual != 0.0) {
    // a single iteration started from zero: the previous iterate is the zero path
    if (W_prev.empty()) {
      for (auto& f : W) f *= 0.0;
      for (auto& f : Z) f *= 0.0;
    } else {
      W = std::move(W_prev);
      Z = std::move(Z_prev);
    }
  }
  S.x_norm = pair_x_norm(P.t, W, Z, cfg.norms);
  S.w = std::move(W);
  S.zeta = std::move(Z);
  return S;
}

}  // namespace ictk
