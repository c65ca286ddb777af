#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ictk {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

enum class Rank : std::uint8_t { Scalar = 0, Vector = 1, SymTensor = 2 };

int components(Rank r);
const char* rank_name(Rank r);

// Parallel runs the per-mode loops under OpenMP; Serial is the reference path.
enum class Exec { Parallel, Serial };

class Grid2D {
 public:
  explicit Grid2D(int n = 0);

  int nx() const { return n_; }
  int ny() const { return n_; }
  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  double dx() const { return kTwoPi / n_; }
  double x(int i) const { return kTwoPi * i / n_; }

  // signed mode for storage index idx in [0, n)
  int mode(int idx) const { return idx < n_ / 2 ? idx : idx - n_; }
  // storage index for signed mode m in [-n/2, n/2)
  int index(int m) const { return m >= 0 ? m : m + n_; }
  // wavenumber used by every multiplier; the Nyquist row carries no derivative
  double wave(int idx) const { return idx == n_ / 2 ? 0.0 : static_cast<double>(mode(idx)); }
  bool is_nyquist(int idx) const { return idx == n_ / 2; }

  bool operator==(const Grid2D& o) const { return n_ == o.n_; }
  bool operator!=(const Grid2D& o) const { return n_ != o.n_; }

 private:
  int n_;
};

class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const Grid2D& g, Rank r);

  const Grid2D& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  int ncomp() const { return components(rank_); }
  bool empty() const { return data_.empty(); }

  cplx* comp(int c) { return data_.data() + c * grid_.size(); }
  const cplx* comp(int c) const { return data_.data() + c * grid_.size(); }
  cplx& at(int c, int i, int j) { return data_[c * grid_.size() + static_cast<std::size_t>(i) * grid_.n() + j]; }
  const cplx& at(int c, int i, int j) const {
    return data_[c * grid_.size() + static_cast<std::size_t>(i) * grid_.n() + j];
  }
  std::vector<cplx>& raw() { return data_; }
  const std::vector<cplx>& raw() const { return data_; }

  SpectralField component(int c) const;
  void set_component(int c, const SpectralField& s);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  // this += s * o
  void axpy(double s, const SpectralField& o);

 private:
  Grid2D grid_;
  Rank rank_ = Rank::Scalar;
  std::vector<cplx> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Real samples on the grid; component-major, x1 row index outer.
struct PhysicalField {
  Grid2D grid;
  Rank rank = Rank::Scalar;
  std::vector<double> data;

  PhysicalField() = default;
  PhysicalField(const Grid2D& g, Rank r) : grid(g), rank(r), data(components(r) * g.size(), 0.0) {}
  int ncomp() const { return components(rank); }
  double* comp(int c) { return data.data() + c * grid.size(); }
  const double* comp(int c) const { return data.data() + c * grid.size(); }
};

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class RankMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require_same_grid(const Grid2D& a, const Grid2D& b);
void require_rank(const SpectralField& f, Rank r, const char* op);

// transforms; coefficients satisfy f(x) = sum_xi c(xi) e^{i xi.x}
PhysicalField to_physical(const SpectralField& f);
// inverse transform of w * (component c of f) into out (n*n values), with no temporaries
void to_physical_multiplied(const SpectralField& f, int c, const std::vector<double>& w, double* out);
SpectralField to_spectral(const PhysicalField& f);
PhysicalField sample(const Grid2D& g, Rank r, const std::function<void(double, double, double*)>& fn);

// per-mode driver: fn(i, j, xi1, xi2) for every storage index
template <class Fn>
void for_each_mode(const Grid2D& g, Exec ex, Fn&& fn) {
  const int n = g.n();
  if (ex == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const double k1 = g.wave(i);
      for (int j = 0; j < n; ++j) fn(i, j, k1, g.wave(j));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double k1 = g.wave(i);
      for (int j = 0; j < n; ++j) fn(i, j, k1, g.wave(j));
    }
  }
}

SpectralField heat_semigroup(const SpectralField& f, double t, Exec ex = Exec::Parallel);
SpectralField leray_project(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField op_D(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField op_newD(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField op_R(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField op_Q(const SpectralField& T, Exec ex = Exec::Parallel);
SpectralField op_R1(const SpectralField& s, Exec ex = Exec::Parallel);
// 2 grad grad / Delta - Id applied to a scalar, zero mode sent to zero
SpectralField op_hessian_ratio(const SpectralField& s, Exec ex = Exec::Parallel);

SpectralField grad(const SpectralField& s, Exec ex = Exec::Parallel);
SpectralField div(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField laplacian(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField inv_laplacian(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField directional_derivative(const SpectralField& f, double e1, double e2, Exec ex = Exec::Parallel);
// all first partials of every component, as scalar fields ordered (c, d/dx1), (c, d/dx2)
std::vector<SpectralField> gradient_components(const SpectralField& f, Exec ex = Exec::Parallel);
SpectralField trace_free(const SpectralField& T);
SpectralField drop_zero_mode(const SpectralField& f);
SpectralField mollify_gaussian(const SpectralField& f, double ell, Exec ex = Exec::Parallel);

// Littlewood-Paley shell bump, supported in (2/3, 3/2)
double lp_bump(double r);
bool is_dyadic(long long N);
SpectralField littlewood_paley(const SpectralField& f, long long N, Exec ex = Exec::Parallel);

// int_0^t e^{-mu (t-s)} e^{-lam s} ds
double duhamel_mode_integral(double mu, double lam, double t);

// pointwise Euclidean (Frobenius for tensors, off-diagonal counted twice)
double sup_norm(const PhysicalField& f);
double sup_norm(const SpectralField& f);
double lp_norm(const PhysicalField& f, double p);
double lp_norm(const SpectralField& f, double p);
double max_abs_coeff(const SpectralField& f);
double max_abs_diff(const SpectralField& a, const SpectralField& b);
double hermitian_defect(const SpectralField& f);

// symmetric products formed on the grid
PhysicalField sym_outer(const PhysicalField& a, const PhysicalField& b);  // (a x b + b x a)/2
PhysicalField scale_vector(const PhysicalField& v, const PhysicalField& s);  // v * s

// random Hermitian field with modes |xi|_inf <= kmax, zero Nyquist, optional zero mean
SpectralField random_field(const Grid2D& g, Rank r, std::uint64_t seed, int kmax, bool zero_mean = true);

// CFF1 snapshot file
void write_snapshot(const std::string& path, const SpectralField& f);
SpectralField read_snapshot(const std::string& path);

}  // namespace ictk
