#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ictk/geometry.hpp"
#include "ictk/spectral.hpp"

namespace ictk {

enum class LadderMode { Field, Asymptotic };

// Exponent: M_{j,k} = ceil(A^{gamma b^{k+(j-1)/J}}), the reading under which the
// ordering chain follows from gamma > b^{-1/J}. LiteralProduct: ceil(A^{gamma b^{(j-1)/J}}) M_{1,k}.
enum class MRule { Exponent, LiteralProduct };

struct LadderParams {
  double A = 2.0;
  double b = 2.0;
  double gamma = 0.5;
  int J = 16;
  int m_star = 5;
  int K = 1;
  double delta0 = 0.25;
  LadderMode mode = LadderMode::Field;
  MRule m_rule = MRule::Exponent;
  // field mode: synthesize level (1,0) at m_star so that N eta stays on the lattice
  bool lattice_base = true;
};

struct LadderCheck {
  std::string name;
  double margin = 0.0;  // positive means satisfied
  bool asserted = false;
  bool pass() const { return margin > 0.0; }
};

class FrequencyLadder {
 public:
  LadderParams params;

  int levels() const { return static_cast<int>(logN_.size()); }  // tables cover k = 0..K+1
  double logN(int j, int k) const { return logN_.at(k).at(j - 1); }
  double logM(int j, int k) const { return logM_.at(k).at(j - 1); }
  double log_t(int k) const { return -4.0 * logN(params.J, k); }
  double log_ell(int k) const { return -0.5 * (logN(1, k) + logN(1, k + 1)); }

  // integer tables, field mode only
  long long N(int j, int k) const;
  long long M(int j, int k) const;
  double t(int k) const { return std::exp(log_t(k)); }
  double ell(int k) const { return std::exp(log_ell(k)); }
  // frequency used when synthesizing fields
  long long field_N(int j, int k) const;

  std::vector<std::vector<double>> logN_, logM_;
  std::vector<std::vector<long long>> N_, M_;
};

FrequencyLadder build_ladder(const LadderParams& p);

// Ordering, gamma, ell and t_k checks in log space for levels 0..K; the largest
// admissible chain constant c is reported as c_max.
struct LadderCertificate {
  std::vector<LadderCheck> checks;
  double c_max = 0.0;
  bool certified() const;
};
LadderCertificate certify_ladder(const FrequencyLadder& L);

class GridOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
void require_resolvable(const FrequencyLadder& L, const Grid2D& g, int K);

// ---------------------------------------------------------------- pipes

// distance from x to the 2pi/M periodic family of lines R eta
double pipe_distance(const Direction& d, long long M, double x1, double x2);
// same on grid points, with exact integer lattice reduction
std::vector<double> pipe_distance_grid(const Direction& d, long long M, const Grid2D& g);
// area fraction of the cylinder of radius rho/M
double pipe_volume_fraction(const Direction& d, double rho);
// largest delta0 with |C(4 delta0)| <= 1/(10 J) as Lebesgue measure on the torus
double delta0_from_volume_bound(const DirectionSets& s);

class Unresolvable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipeCutoff {
  int j = 0, k = 0;
  long long M = 0, N = 0;
  double r0 = 0.0;
  double norm_const = 0.0;
  PhysicalField samples;
  SpectralField field;
  // reported diagnostics
  double support_violation = 0.0;   // max |phi| at sampled points outside C(delta0)
  double shift_defect = 0.0;        // max |phi(x + lattice step along eta) - phi(x)|
  double axis_derivative_rel = 0.0; // sup |eta . grad phi| / sup |grad phi|, spectral
  double normalization = 0.0;       // (2pi)^-2 int phi^2 sin^2
  std::vector<double> C_n;          // |grad^n phi|_inf / M^n, n = 0..3
};

PipeCutoff build_pipe_cutoff(int j, int k, const FrequencyLadder& L, const Grid2D& g);

// ---------------------------------------------------------------- regions

bool in_region(int k, const FrequencyLadder& L, double x1, double x2, bool tilde);

struct RegionMasks {
  int k = 0;
  std::vector<std::uint8_t> omega_prev, omega_tilde_prev;  // Omega_{k-1}, tilde Omega_{k-1}
  std::vector<std::uint8_t> omega, omega_tilde;            // Omega_k, tilde Omega_k
  PhysicalField chi_samples;
  SpectralField chi;
  double gap_cells = 0.0;
};

RegionMasks build_region_masks(int k, const FrequencyLadder& L, const Grid2D& g);
std::vector<std::uint8_t> region_mask(int k, const FrequencyLadder& L, const Grid2D& g, bool tilde);

// Monte Carlo estimate of |Omega_k| / (2 pi)^2
double sample_region_fraction(int k, const FrequencyLadder& L, std::size_t npts, std::uint64_t seed, bool tilde = false);

struct CubeProbe {
  int k0 = 0, k = 0;
  double C0 = 0.0;
  double bound = 0.0;
  double max_ratio = 0.0;
  double full_torus_ratio = 0.0;
  int cubes = 0;
};
CubeProbe cube_intersection_probe(int k0, int k, const FrequencyLadder& L, double C0, int ncubes,
                                  std::size_t pts_per_cube, std::uint64_t seed);

SpectralField mollifier_apply(const SpectralField& f, double ell);

}  // namespace ictk
