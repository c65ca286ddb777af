#include "ictk/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>

namespace ictk {

int components(Rank r) {
  switch (r) {
    case Rank::Scalar: return 1;
    case Rank::Vector: return 2;
    case Rank::SymTensor: return 3;
  }
  return 0;
}

const char* rank_name(Rank r) {
  switch (r) {
    case Rank::Scalar: return "scalar";
    case Rank::Vector: return "vector";
    case Rank::SymTensor: return "symtensor";
  }
  return "?";
}

Grid2D::Grid2D(int n) : n_(n) {
  if (n == 0) return;
  if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 4");
}

SpectralField::SpectralField(const Grid2D& g, Rank r)
    : grid_(g), rank_(r), data_(components(r) * g.size(), cplx(0.0, 0.0)) {}

SpectralField SpectralField::component(int c) const {
  SpectralField s(grid_, Rank::Scalar);
  std::copy(comp(c), comp(c) + grid_.size(), s.comp(0));
  return s;
}

void SpectralField::set_component(int c, const SpectralField& s) {
  require_same_grid(grid_, s.grid());
  std::copy(s.comp(0), s.comp(0) + grid_.size(), comp(c));
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  if (rank_ != o.rank_) throw RankMismatch("rank mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  if (rank_ != o.rank_) throw RankMismatch("rank mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& z : data_) z *= s;
  return *this;
}

void SpectralField::axpy(double s, const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  if (rank_ != o.rank_) throw RankMismatch("rank mismatch in axpy");
  const std::size_t m = data_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < m; ++i) data_[i] += s * o.data_[i];
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

void require_same_grid(const Grid2D& a, const Grid2D& b) {
  if (a != b) throw GridMismatch("grid mismatch: " + std::to_string(a.n()) + " vs " + std::to_string(b.n()));
}

void require_rank(const SpectralField& f, Rank r, const char* op) {
  if (f.rank() != r)
    throw RankMismatch(std::string(op) + ": expected " + rank_name(r) + " field, got " + rank_name(f.rank()));
}

// ---------------------------------------------------------------- transforms

namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::mutex plan_mutex;

const Plans& plans_for(int n) {
  static std::map<int, std::unique_ptr<Plans>> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto p = std::make_unique<Plans>();
  const std::size_t nh = static_cast<std::size_t>(n) * (n / 2 + 1);
  double* r = fftw_alloc_real(static_cast<std::size_t>(n) * n);
  fftw_complex* c = fftw_alloc_complex(nh);
  // ESTIMATE keeps the algorithm choice, and hence the output bits, fixed across runs
  p->r2c = fftw_plan_dft_r2c_2d(n, n, r, c, FFTW_ESTIMATE);
  p->c2r = fftw_plan_dft_c2r_2d(n, n, c, r, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  auto& ref = *p;
  cache.emplace(n, std::move(p));
  return ref;
}

struct FftBuffers {
  double* r = nullptr;
  fftw_complex* c = nullptr;
  explicit FftBuffers(int n) {
    r = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    c = fftw_alloc_complex(static_cast<std::size_t>(n) * (n / 2 + 1));
  }
  ~FftBuffers() {
    fftw_free(r);
    fftw_free(c);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

// one buffer pair per thread and size; the transforms are called in tight loops
FftBuffers& buffers_for(int n) {
  thread_local std::map<int, std::unique_ptr<FftBuffers>> cache;
  auto& b = cache[n];
  if (!b) b = std::make_unique<FftBuffers>(n);
  return *b;
}

void forward_component(const Grid2D& g, const double* in, cplx* out, FftBuffers& buf) {
  const int n = g.n();
  const int nh = n / 2 + 1;
  const Plans& p = plans_for(n);
  // r2c leaves its input intact, so an input aligned like the plan's arrays is read in place
  if (fftw_alignment_of(const_cast<double*>(in)) == fftw_alignment_of(buf.r)) {
    fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in), buf.c);
  } else {
    std::copy(in, in + g.size(), buf.r);
    fftw_execute_dft_r2c(p.r2c, buf.r, buf.c);
  }
  const double scale = 1.0 / static_cast<double>(g.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nh; ++j) {
      const fftw_complex& z = buf.c[static_cast<std::size_t>(i) * nh + j];
      out[static_cast<std::size_t>(i) * n + j] = cplx(z[0] * scale, z[1] * scale);
    }
  }
  // columns 0 and n/2 hold both xi1 and -xi1; make them exact conjugates
  for (int jc : {0, n / 2}) {
    for (int i = 0; i <= n / 2; ++i) {
      const int im = (n - i) % n;
      cplx& a = out[static_cast<std::size_t>(i) * n + jc];
      cplx& b = out[static_cast<std::size_t>(im) * n + jc];
      if (i == im) {
        a = cplx(a.real(), 0.0);
      } else {
        const cplx avg = 0.5 * (a + std::conj(b));
        a = avg;
        b = std::conj(avg);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const int im = (n - i) % n;
    for (int j = nh; j < n; ++j) {
      out[static_cast<std::size_t>(i) * n + j] = std::conj(out[static_cast<std::size_t>(im) * n + (n - j)]);
    }
  }
  // the Nyquist row and column are not representable by real derivative multipliers
  for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(n / 2) * n + j] = 0.0;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i) * n + n / 2] = 0.0;
}

// w, if given, multiplies each mode on the way in
void backward_component(const Grid2D& g, const cplx* in, double* out, FftBuffers& buf, const double* w = nullptr) {
  const int n = g.n();
  const int nh = n / 2 + 1;
  const Plans& p = plans_for(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nh; ++j) {
      const std::size_t q = static_cast<std::size_t>(i) * n + j;
      const cplx z = w ? w[q] * in[q] : in[q];
      buf.c[static_cast<std::size_t>(i) * nh + j][0] = z.real();
      buf.c[static_cast<std::size_t>(i) * nh + j][1] = z.imag();
    }
  }
  if (fftw_alignment_of(out) == fftw_alignment_of(buf.r)) {
    fftw_execute_dft_c2r(p.c2r, buf.c, out);
  } else {
    fftw_execute_dft_c2r(p.c2r, buf.c, buf.r);
    std::copy(buf.r, buf.r + g.size(), out);
  }
}

}  // namespace

PhysicalField to_physical(const SpectralField& f) {
  PhysicalField p(f.grid(), f.rank());
  const int nc = f.ncomp();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nc; ++c) backward_component(f.grid(), f.comp(c), p.comp(c), buffers_for(f.grid().n()));
  return p;
}

void to_physical_multiplied(const SpectralField& f, int c, const std::vector<double>& w, double* out) {
  if (c < 0 || c >= f.ncomp()) throw std::out_of_range("to_physical_multiplied: component");
  if (w.size() != f.grid().size()) throw std::invalid_argument("to_physical_multiplied: one weight per mode");
  backward_component(f.grid(), f.comp(c), out, buffers_for(f.grid().n()), w.data());
}

SpectralField to_spectral(const PhysicalField& f) {
  SpectralField s(f.grid, f.rank);
  const int nc = f.ncomp();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nc; ++c) forward_component(f.grid, f.comp(c), s.comp(c), buffers_for(f.grid.n()));
  return s;
}

PhysicalField sample(const Grid2D& g, Rank r, const std::function<void(double, double, double*)>& fn) {
  PhysicalField p(g, r);
  const int n = g.n();
  const int nc = components(r);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double v[3];
    for (int j = 0; j < n; ++j) {
      fn(g.x(i), g.x(j), v);
      for (int c = 0; c < nc; ++c) p.comp(c)[static_cast<std::size_t>(i) * n + j] = v[c];
    }
  }
  return p;
}

// ---------------------------------------------------------------- multipliers

namespace {

const cplx I(0.0, 1.0);

std::size_t at(const Grid2D& g, int i, int j) { return static_cast<std::size_t>(i) * g.n() + j; }

}  // namespace

SpectralField heat_semigroup(const SpectralField& f, double t, Exec ex) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup: negative time");
  SpectralField out(f.grid(), f.rank());
  const int nc = f.ncomp();
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const double m = std::exp(-(k1 * k1 + k2 * k2) * t);
    const std::size_t q = at(f.grid(), i, j);
    for (int c = 0; c < nc; ++c) out.comp(c)[q] = m * f.comp(c)[q];
  });
  return out;
}

SpectralField leray_project(const SpectralField& f, Exec ex) {
  require_rank(f, Rank::Vector, "leray_project");
  SpectralField out(f.grid(), Rank::Vector);
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(f.grid(), i, j);
    const cplx a = f.comp(0)[q], b = f.comp(1)[q];
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0) {
      out.comp(0)[q] = a;
      out.comp(1)[q] = b;
      return;
    }
    const cplx d = (k1 * a + k2 * b) / kk;
    out.comp(0)[q] = a - k1 * d;
    out.comp(1)[q] = b - k2 * d;
  });
  return out;
}

namespace {

// 2 sym grad f - lambda (div f) Id
SpectralField sym_grad_minus_div(const SpectralField& f, double lambda, Exec ex) {
  require_rank(f, Rank::Vector, "sym_grad");
  SpectralField out(f.grid(), Rank::SymTensor);
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(f.grid(), i, j);
    const cplx a = f.comp(0)[q], b = f.comp(1)[q];
    const cplx dv = I * (k1 * a + k2 * b);
    out.comp(0)[q] = 2.0 * I * k1 * a - lambda * dv;
    out.comp(1)[q] = 2.0 * I * k2 * b - lambda * dv;
    out.comp(2)[q] = I * (k1 * b + k2 * a);
  });
  return out;
}

}  // namespace

SpectralField op_D(const SpectralField& f, Exec ex) { return sym_grad_minus_div(f, 2.0, ex); }
SpectralField op_newD(const SpectralField& f, Exec ex) { return sym_grad_minus_div(f, 1.0, ex); }

SpectralField op_R(const SpectralField& f, Exec ex) { return inv_laplacian(op_newD(f, ex), ex); }

SpectralField op_Q(const SpectralField& T, Exec ex) {
  require_rank(T, Rank::SymTensor, "op_Q");
  const SpectralField w = leray_project(div(T, ex), ex);
  SpectralField s = sym_grad_minus_div(w, 0.0, ex);  // 2 sym grad
  return inv_laplacian(s, ex);
}

SpectralField op_R1(const SpectralField& s, Exec ex) {
  require_rank(s, Rank::Scalar, "op_R1");
  return inv_laplacian(grad(s, ex), ex);
}

SpectralField op_hessian_ratio(const SpectralField& s, Exec ex) {
  require_rank(s, Rank::Scalar, "op_hessian_ratio");
  SpectralField out(s.grid(), Rank::SymTensor);
  for_each_mode(s.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(s.grid(), i, j);
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0) return;
    const cplx v = s.comp(0)[q];
    out.comp(0)[q] = (2.0 * k1 * k1 / kk - 1.0) * v;
    out.comp(1)[q] = (2.0 * k2 * k2 / kk - 1.0) * v;
    out.comp(2)[q] = (2.0 * k1 * k2 / kk) * v;
  });
  return out;
}

SpectralField grad(const SpectralField& s, Exec ex) {
  require_rank(s, Rank::Scalar, "grad");
  SpectralField out(s.grid(), Rank::Vector);
  for_each_mode(s.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(s.grid(), i, j);
    out.comp(0)[q] = I * k1 * s.comp(0)[q];
    out.comp(1)[q] = I * k2 * s.comp(0)[q];
  });
  return out;
}

SpectralField div(const SpectralField& f, Exec ex) {
  if (f.rank() == Rank::Vector) {
    SpectralField out(f.grid(), Rank::Scalar);
    for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
      const std::size_t q = at(f.grid(), i, j);
      out.comp(0)[q] = I * (k1 * f.comp(0)[q] + k2 * f.comp(1)[q]);
    });
    return out;
  }
  if (f.rank() == Rank::SymTensor) {
    SpectralField out(f.grid(), Rank::Vector);
    for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
      const std::size_t q = at(f.grid(), i, j);
      out.comp(0)[q] = I * (k1 * f.comp(0)[q] + k2 * f.comp(2)[q]);
      out.comp(1)[q] = I * (k1 * f.comp(2)[q] + k2 * f.comp(1)[q]);
    });
    return out;
  }
  throw RankMismatch("div: scalar input");
}

SpectralField laplacian(const SpectralField& f, Exec ex) {
  SpectralField out(f.grid(), f.rank());
  const int nc = f.ncomp();
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(f.grid(), i, j);
    const double m = -(k1 * k1 + k2 * k2);
    for (int c = 0; c < nc; ++c) out.comp(c)[q] = m * f.comp(c)[q];
  });
  return out;
}

SpectralField inv_laplacian(const SpectralField& f, Exec ex) {
  SpectralField out(f.grid(), f.rank());
  const int nc = f.ncomp();
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(f.grid(), i, j);
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0) return;
    for (int c = 0; c < nc; ++c) out.comp(c)[q] = f.comp(c)[q] / (-kk);
  });
  return out;
}

SpectralField directional_derivative(const SpectralField& f, double e1, double e2, Exec ex) {
  SpectralField out(f.grid(), f.rank());
  const int nc = f.ncomp();
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(f.grid(), i, j);
    const cplx m = I * (e1 * k1 + e2 * k2);
    for (int c = 0; c < nc; ++c) out.comp(c)[q] = m * f.comp(c)[q];
  });
  return out;
}

std::vector<SpectralField> gradient_components(const SpectralField& f, Exec ex) {
  std::vector<SpectralField> out;
  for (int c = 0; c < f.ncomp(); ++c) {
    const SpectralField g = grad(f.component(c), ex);
    out.push_back(g.component(0));
    out.push_back(g.component(1));
  }
  return out;
}

SpectralField trace_free(const SpectralField& T) {
  require_rank(T, Rank::SymTensor, "trace_free");
  SpectralField out = T;
  const std::size_t m = T.grid().size();
  for (std::size_t q = 0; q < m; ++q) {
    const cplx h = 0.5 * (T.comp(0)[q] + T.comp(1)[q]);
    out.comp(0)[q] -= h;
    out.comp(1)[q] -= h;
  }
  return out;
}

SpectralField drop_zero_mode(const SpectralField& f) {
  SpectralField out = f;
  for (int c = 0; c < f.ncomp(); ++c) out.comp(c)[0] = 0.0;
  return out;
}

SpectralField mollify_gaussian(const SpectralField& f, double ell, Exec ex) {
  if (!(ell >= 0.0)) throw std::invalid_argument("mollify: negative scale");
  SpectralField out(f.grid(), f.rank());
  const int nc = f.ncomp();
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const std::size_t q = at(f.grid(), i, j);
    const double m = std::exp(-0.5 * ell * ell * (k1 * k1 + k2 * k2));
    for (int c = 0; c < nc; ++c) out.comp(c)[q] = m * f.comp(c)[q];
  });
  return out;
}

// ---------------------------------------------------------------- Littlewood-Paley

namespace {

// smooth step: 0 for s <= 0, 1 for s >= 1
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// 1 on [0, 4/3], 0 on [3/2, inf)
double lp_plateau(double r) { return smooth_step((1.5 - r) * 6.0); }

}  // namespace

double lp_bump(double r) {
  // telescoping construction: sum over dyadic N >= 1 of lp_bump(r/N) = 1 - lp_plateau(2r)
  return lp_plateau(r) - lp_plateau(2.0 * r);
}

bool is_dyadic(long long N) { return N >= 1 && (N & (N - 1)) == 0; }

SpectralField littlewood_paley(const SpectralField& f, long long N, Exec ex) {
  if (!is_dyadic(N)) throw std::invalid_argument("littlewood_paley: N must be a power of two");
  SpectralField out(f.grid(), f.rank());
  const int nc = f.ncomp();
  const double inv = 1.0 / static_cast<double>(N);
  for_each_mode(f.grid(), ex, [&](int i, int j, double k1, double k2) {
    const double r = std::sqrt(k1 * k1 + k2 * k2) * inv;
    if (r <= 2.0 / 3.0 || r >= 1.5) return;
    const double m = lp_bump(r);
    const std::size_t q = at(f.grid(), i, j);
    for (int c = 0; c < nc; ++c) out.comp(c)[q] = m * f.comp(c)[q];
  });
  return out;
}

// ---------------------------------------------------------------- Duhamel kernel

double duhamel_mode_integral(double mu, double lam, double t) {
  if (std::isnan(mu) || std::isnan(lam) || std::isnan(t)) throw std::invalid_argument("duhamel_mode_integral: NaN");
  if (mu < 0.0 || lam < 0.0 || t < 0.0) throw std::invalid_argument("duhamel_mode_integral: negative argument");
  const double d = mu - lam;
  const double x = d * t;
  if (std::fabs(x) < 1e-6) {
    // t e^{-mu t} (e^{x} - 1)/x expanded in x
    const double series = 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
    return t * std::exp(-mu * t) * series;
  }
  // factor out the slower exponential to avoid cancellation
  if (d > 0.0) return std::exp(-lam * t) * (-std::expm1(-x)) / d;
  return std::exp(-mu * t) * (-std::expm1(x)) / (-d);
}

// ---------------------------------------------------------------- norms

namespace {

double pointwise_norm2(const PhysicalField& f, std::size_t q) {
  if (f.rank == Rank::Scalar) return f.comp(0)[q] * f.comp(0)[q];
  if (f.rank == Rank::Vector) return f.comp(0)[q] * f.comp(0)[q] + f.comp(1)[q] * f.comp(1)[q];
  return f.comp(0)[q] * f.comp(0)[q] + f.comp(1)[q] * f.comp(1)[q] + 2.0 * f.comp(2)[q] * f.comp(2)[q];
}

}  // namespace

double sup_norm(const PhysicalField& f) {
  const int n = f.grid.n();
  std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double m = 0.0;
    for (int j = 0; j < n; ++j) m = std::max(m, pointwise_norm2(f, static_cast<std::size_t>(i) * n + j));
    rows[i] = m;
  }
  return std::sqrt(*std::max_element(rows.begin(), rows.end()));
}

double sup_norm(const SpectralField& f) { return sup_norm(to_physical(f)); }

double lp_norm(const PhysicalField& f, double p) {
  if (std::isinf(p)) return sup_norm(f);
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  const int n = f.grid.n();
  std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::pow(pointwise_norm2(f, static_cast<std::size_t>(i) * n + j), p / 2.0);
    rows[i] = s;
  }
  double s = 0.0;
  for (double r : rows) s += r;  // fixed order keeps the sum reproducible
  const double cell = f.grid.dx() * f.grid.dx();
  return std::pow(s * cell, 1.0 / p);
}

double lp_norm(const SpectralField& f, double p) { return lp_norm(to_physical(f), p); }

// max of |z|^2 then one sqrt: std::abs goes through hypot per element
double max_abs_coeff(const SpectralField& f) {
  double m = 0.0;
  for (const auto& z : f.raw()) m = std::max(m, std::norm(z));
  return std::sqrt(m);
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid());
  if (a.rank() != b.rank()) throw RankMismatch("rank mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t q = 0; q < a.raw().size(); ++q) m = std::max(m, std::norm(a.raw()[q] - b.raw()[q]));
  return std::sqrt(m);
}

double hermitian_defect(const SpectralField& f) {
  const Grid2D& g = f.grid();
  const int n = g.n();
  double m = 0.0;
  for (int c = 0; c < f.ncomp(); ++c) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const cplx a = f.at(c, i, j);
        const cplx b = f.at(c, (n - i) % n, (n - j) % n);
        m = std::max(m, std::abs(a - std::conj(b)));
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------- products

PhysicalField sym_outer(const PhysicalField& a, const PhysicalField& b) {
  require_same_grid(a.grid, b.grid);
  if (a.rank != Rank::Vector || b.rank != Rank::Vector) throw RankMismatch("sym_outer: vector inputs required");
  PhysicalField out(a.grid, Rank::SymTensor);
  const std::size_t m = a.grid.size();
  const double *a1 = a.comp(0), *a2 = a.comp(1), *b1 = b.comp(0), *b2 = b.comp(1);
  double *t11 = out.comp(0), *t22 = out.comp(1), *t12 = out.comp(2);
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < m; ++q) {
    t11[q] = a1[q] * b1[q];
    t22[q] = a2[q] * b2[q];
    t12[q] = 0.5 * (a1[q] * b2[q] + a2[q] * b1[q]);
  }
  return out;
}

PhysicalField scale_vector(const PhysicalField& v, const PhysicalField& s) {
  require_same_grid(v.grid, s.grid);
  if (v.rank != Rank::Vector || s.rank != Rank::Scalar) throw RankMismatch("scale_vector: (vector, scalar) required");
  PhysicalField out(v.grid, Rank::Vector);
  const std::size_t m = v.grid.size();
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < m; ++q) {
    out.comp(0)[q] = v.comp(0)[q] * s.comp(0)[q];
    out.comp(1)[q] = v.comp(1)[q] * s.comp(0)[q];
  }
  return out;
}

// ---------------------------------------------------------------- random fields

SpectralField random_field(const Grid2D& g, Rank r, std::uint64_t seed, int kmax, bool zero_mean) {
  SpectralField f(g, r);
  std::mt19937_64 rng(seed);
  // uniform rather than Gaussian: the identity probes only need generic coefficients, and this is 7x cheaper
  std::uniform_real_distribution<double> nd(-1.0, 1.0);
  const int n = g.n();
  const int lim = std::min(kmax, n / 2 - 1);
  for (int c = 0; c < f.ncomp(); ++c) {
    for (int m1 = -lim; m1 <= lim; ++m1) {
      for (int m2 = -lim; m2 <= lim; ++m2) {
        // fill one representative per +-xi pair so the draw order is fixed
        if (m1 < 0 || (m1 == 0 && m2 < 0)) continue;
        const double re = nd(rng), im = nd(rng);
        const int i = g.index(m1), j = g.index(m2);
        const int ic = g.index(-m1), jc = g.index(-m2);
        if (m1 == 0 && m2 == 0) {
          f.at(c, 0, 0) = zero_mean ? 0.0 : re;
          continue;
        }
        f.at(c, i, j) = cplx(re, im);
        f.at(c, ic, jc) = cplx(re, -im);
      }
    }
  }
  return f;
}

}  // namespace ictk
