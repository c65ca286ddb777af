#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "ictk/ladder.hpp"

namespace ictk {

// ---------------------------------------------------------------- pipes

// The normal coordinate s = -q x1 + p x2 equals d (eta_perp . x). Lattice points
// (2pi/M) Z^2 have s in (2pi/M) Z since gcd(p, q) = 1, so the distance to the
// nearest translate of the line is |s mod 2pi/M| / d.
double pipe_distance(const Direction& d, long long M, double x1, double x2) {
  const double s = -d.q * x1 + d.p * x2;
  const double period = kTwoPi / static_cast<double>(M);
  double r = std::fmod(s, period);
  if (r < 0.0) r += period;
  return std::min(r, period - r) / d.d;
}

std::vector<double> pipe_distance_grid(const Direction& d, long long M, const Grid2D& g) {
  const int n = g.n();
  std::vector<double> out(g.size());
  const long long nn = n;
  const long long Mm = M % nn;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      long long m = (-static_cast<long long>(d.q) * i + static_cast<long long>(d.p) * j) % nn;
      if (m < 0) m += nn;
      const long long u = (m * Mm) % nn;
      const double frac = static_cast<double>(std::min(u, nn - u)) / static_cast<double>(nn);
      out[static_cast<std::size_t>(i) * n + j] = kTwoPi / static_cast<double>(M) * frac / d.d;
    }
  }
  return out;
}

double pipe_volume_fraction(const Direction& d, double rho) {
  // band of half-width rho/M every 2pi/(M d) across the axis
  return std::min(1.0, rho * d.d / kPi);
}

double delta0_from_volume_bound(const DirectionSets& s) {
  int dmax = 1;
  for (const auto& d : s.joint) dmax = std::max(dmax, d.d);
  // |C(4 delta0)| = (2pi)^2 * 4 delta0 d / pi as a Lebesgue area
  const double per_delta = kTwoPi * kTwoPi * 4.0 * dmax / kPi;
  return 1.0 / (10.0 * s.J * per_delta);
}

namespace {

double bump(double r, double r0) {
  const double s = r / r0;
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

// largest sup norm over all n-th order partial derivatives
double sup_derivative(const SpectralField& f, int order) {
  double best = 0.0;
  for (int a = 0; a <= order; ++a) {
    const int b = order - a;
    SpectralField d(f.grid(), f.rank());
    for_each_mode(f.grid(), Exec::Parallel, [&](int i, int j, double k1, double k2) {
      cplx m = std::pow(cplx(0.0, k1), a) * std::pow(cplx(0.0, k2), b);
      for (int c = 0; c < f.ncomp(); ++c) d.at(c, i, j) = m * f.at(c, i, j);
    });
    best = std::max(best, sup_norm(d));
  }
  return best;
}

}  // namespace

PipeCutoff build_pipe_cutoff(int j, int k, const FrequencyLadder& L, const Grid2D& g) {
  if (k < 1) throw std::invalid_argument("pipe cutoffs exist for k >= 1");
  const Direction& dir = direction_sets().dir(j);
  PipeCutoff pc;
  pc.j = j;
  pc.k = k;
  pc.M = L.M(j, k);
  pc.N = L.field_N(j, k);
  pc.r0 = L.params.delta0 / static_cast<double>(pc.M);
  if (2.0 * pc.r0 / g.dx() < 8.0) {
    throw Unresolvable("pipe (" + std::to_string(j) + "," + std::to_string(k) + ") radius spans " +
                       std::to_string(2.0 * pc.r0 / g.dx()) + " grid points, need 8");
  }
  const int n = g.n();
  const std::vector<double> dist = pipe_distance_grid(dir, pc.M, g);
  pc.samples = PhysicalField(g, Rank::Scalar);
  double* phi = pc.samples.comp(0);
  for (std::size_t q = 0; q < g.size(); ++q) phi[q] = bump(dist[q], pc.r0);

  // grid quadrature of phi^2 sin^2(N eta.x), summed row by row in fixed order
  const long long Np = pc.N * dir.p / dir.d, Nq = pc.N * dir.q / dir.d;
  auto weighted_mean = [&](const double* f) {
    std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int jj = 0; jj < n; ++jj) {
        const double sn = std::sin(g.x(i) * Np + g.x(jj) * Nq);
        const double v = f[static_cast<std::size_t>(i) * n + jj];
        s += v * v * sn * sn;
      }
      rows[i] = s;
    }
    double s = 0.0;
    for (double r : rows) s += r;
    return s / static_cast<double>(g.size());
  };
  pc.norm_const = 1.0 / std::sqrt(weighted_mean(phi));
  for (std::size_t q = 0; q < g.size(); ++q) phi[q] *= pc.norm_const;
  pc.normalization = weighted_mean(phi);

  for (std::size_t q = 0; q < g.size(); ++q)
    if (dist[q] >= pc.r0) pc.support_violation = std::max(pc.support_violation, std::abs(phi[q]));

  // one grid step along (p, q) leaves the normal coordinate unchanged
  for (int i = 0; i < n; ++i) {
    for (int jj = 0; jj < n; ++jj) {
      const int i2 = ((i + dir.p) % n + n) % n, j2 = ((jj + dir.q) % n + n) % n;
      pc.shift_defect = std::max(pc.shift_defect, std::abs(phi[static_cast<std::size_t>(i2) * n + j2] -
                                                           phi[static_cast<std::size_t>(i) * n + jj]));
    }
  }

  pc.field = to_spectral(pc.samples);
  const Vec2 e = dir.eta();
  const double along = sup_norm(directional_derivative(pc.field, e.x, e.y));
  const double full = sup_norm(grad(pc.field));
  pc.axis_derivative_rel = full > 0.0 ? along / full : 0.0;
  pc.C_n.resize(4);
  pc.C_n[0] = sup_norm(pc.samples);
  for (int order = 1; order <= 3; ++order)
    pc.C_n[order] = sup_derivative(pc.field, order) / std::pow(static_cast<double>(pc.M), order);
  return pc;
}

// ---------------------------------------------------------------- regions

namespace {

double radius_factor(int k, int kp, bool tilde) {
  const double s = std::ldexp(1.0, -(k - kp));
  return tilde ? 3.0 - 0.75 * s : 3.0 - s;
}

}  // namespace

bool in_region(int k, const FrequencyLadder& L, double x1, double x2, bool tilde) {
  if (k <= 0) return true;
  const DirectionSets& ds = direction_sets();
  for (int kp = 1; kp <= k; ++kp) {
    const double f = radius_factor(k, kp, tilde) * L.params.delta0;
    bool hit = false;
    for (int j = 1; j <= ds.J && !hit; ++j) {
      const long long M = L.M(j, kp);
      hit = pipe_distance(ds.dir(j), M, x1, x2) < f / static_cast<double>(M);
    }
    if (!hit) return false;
  }
  return true;
}

namespace {

// indicator of the intersection of unions with per-level radius factors
std::vector<std::uint8_t> mask_with(int k, const FrequencyLadder& L, const Grid2D& g,
                                    const std::function<double(int)>& factor) {
  std::vector<std::uint8_t> out(g.size(), 1);
  if (k <= 0) return out;
  const DirectionSets& ds = direction_sets();
  for (int kp = 1; kp <= k; ++kp) {
    std::vector<std::uint8_t> uni(g.size(), 0);
    const double f = factor(kp) * L.params.delta0;
    for (int j = 1; j <= ds.J; ++j) {
      const long long M = L.M(j, kp);
      const std::vector<double> d = pipe_distance_grid(ds.dir(j), M, g);
      const double r = f / static_cast<double>(M);
      for (std::size_t q = 0; q < g.size(); ++q)
        if (d[q] < r) uni[q] = 1;
    }
    for (std::size_t q = 0; q < g.size(); ++q) out[q] &= uni[q];
  }
  return out;
}

double clamp_step(double s) {
  // 0 below 0.1, 1 above 0.9, smooth in between
  const double u = (s - 0.1) / 0.8;
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

}  // namespace

std::vector<std::uint8_t> region_mask(int k, const FrequencyLadder& L, const Grid2D& g, bool tilde) {
  return mask_with(k, L, g, [&](int kp) { return radius_factor(k, kp, tilde); });
}

RegionMasks build_region_masks(int k, const FrequencyLadder& L, const Grid2D& g) {
  if (k < 1) throw std::invalid_argument("region masks are built for k >= 1");
  RegionMasks rm;
  rm.k = k;
  rm.omega_prev = region_mask(k - 1, L, g, false);
  rm.omega_tilde_prev = region_mask(k - 1, L, g, true);
  rm.omega = region_mask(k, L, g, false);
  rm.omega_tilde = region_mask(k, L, g, true);
  rm.chi_samples = PhysicalField(g, Rank::Scalar);
  double* chi = rm.chi_samples.comp(0);
  if (k == 1) {
    // Omega_0 is the whole torus
    std::fill(chi, chi + g.size(), 1.0);
    rm.gap_cells = std::numeric_limits<double>::infinity();
    rm.chi = to_spectral(rm.chi_samples);
    return rm;
  }
  // the narrowest gap between Omega_{k-1} and its tilde version sits at k' = k-1
  long long Mmax = 0;
  for (int j = 1; j <= L.params.J; ++j) Mmax = std::max(Mmax, L.M(j, k - 1));
  rm.gap_cells = 0.25 * L.params.delta0 / static_cast<double>(Mmax) / g.dx();
  if (rm.gap_cells < 4.0) {
    throw Unresolvable("chi_" + std::to_string(k) + ": Omega/tilde-Omega gap spans " + std::to_string(rm.gap_cells) +
                       " cells, need 4");
  }
  const int km = k - 1;
  const std::vector<std::uint8_t> mid = mask_with(km, L, g, [&](int kp) {
    return 0.5 * (radius_factor(km, kp, false) + radius_factor(km, kp, true));
  });
  PhysicalField ind(g, Rank::Scalar);
  for (std::size_t q = 0; q < g.size(); ++q) ind.comp(0)[q] = mid[q];
  const double scale = 1.0 / (10.0 * static_cast<double>(L.M(L.params.J, k - 1)));
  const PhysicalField smooth = to_physical(mollify_gaussian(to_spectral(ind), scale));
  for (std::size_t q = 0; q < g.size(); ++q) {
    double v = clamp_step(smooth.comp(0)[q]);
    if (rm.omega_prev[q]) v = 1.0;
    if (!rm.omega_tilde_prev[q]) v = 0.0;
    chi[q] = v;
  }
  rm.chi = to_spectral(rm.chi_samples);
  return rm;
}

double sample_region_fraction(int k, const FrequencyLadder& L, std::size_t npts, std::uint64_t seed, bool tilde) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < npts; ++s) {
    const double x1 = u(rng), x2 = u(rng);
    if (in_region(k, L, x1, x2, tilde)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(npts);
}

CubeProbe cube_intersection_probe(int k0, int k, const FrequencyLadder& L, double C0, int ncubes,
                                  std::size_t pts_per_cube, std::uint64_t seed) {
  CubeProbe pr;
  pr.k0 = k0;
  pr.k = k;
  pr.C0 = C0;
  pr.cubes = ncubes;
  pr.bound = std::ldexp(1.0, -(k - k0));
  const double lmin = k0 >= 1 ? C0 / static_cast<double>(L.M(1, k0)) : C0;
  if (!(lmin < kTwoPi)) throw std::invalid_argument("cube probe: C0 / M_{1,k0} must be below 2pi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int c = 0; c < ncubes; ++c) {
    // side log-uniform in [lmin, 2pi), corner uniform on the torus
    const double side = lmin * std::pow(kTwoPi / lmin, u01(rng));
    const double a1 = kTwoPi * u01(rng), a2 = kTwoPi * u01(rng);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < pts_per_cube; ++s) {
      const double x1 = std::fmod(a1 + side * u01(rng), kTwoPi);
      const double x2 = std::fmod(a2 + side * u01(rng), kTwoPi);
      if (in_region(k, L, x1, x2, false)) ++hits;
    }
    pr.max_ratio = std::max(pr.max_ratio, static_cast<double>(hits) / static_cast<double>(pts_per_cube));
  }
  pr.full_torus_ratio = sample_region_fraction(k, L, pts_per_cube, seed ^ 0x9e3779b97f4a7c15ULL);
  return pr;
}

SpectralField mollifier_apply(const SpectralField& f, double ell) { return mollify_gaussian(f, ell); }

}  // namespace ictk
