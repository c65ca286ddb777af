#pragma once

#include <utility>
#include <vector>

#include "ictk/cascade.hpp"
#include "ictk/spectral.hpp"

namespace ictk {

struct PathNormParams {
  double alpha = 0.05;
  double kappa = 0.02;
  double epsilon = 0.01;
  void validate() const;
};

// 0 followed by tbar * ratio^{-m}, m = M..0, with tbar * ratio^{-M} just below lo_frac * tbar
std::vector<double> geometric_times(double tbar, double lo_frac = 1e-6, double ratio = 1.189207115002721);

// |g|_inf + sup_N N^kappa |P_N g|_inf
double holder_proxy(const SpectralField& g, double kappa);
// sup_t t^{(1-a)/2} |V|_inf + t^{(2-a)/2} |grad V|_{C^k}; t = 0 samples are skipped
double x_norm(const std::vector<double>& t, const std::vector<SpectralField>& V, const PathNormParams& p);
// sup_t t^{1-a} |phi|_inf + t^{3/2-a} |grad phi|_{C^k}
double y_norm(const std::vector<double>& t, const std::vector<SpectralField>& phi, const PathNormParams& p);

// U = u_amp e^{-t} (sin x2, sin x1), H = h_amp e^{-t} (cos x2 - cos x1): H is a function of the
// stream function of U, so the pair solves the unforced system exactly
struct BackgroundPair {
  double u_amp = 0.2;
  double h_amp = 0.2;
  PhysicalField U(const Grid2D& g, double t, int N0 = 1) const;
  PhysicalField H(const Grid2D& g, double t, int N0 = 1) const;
  double C_UH(const Grid2D& g) const;
};

class OffLattice : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
// up: f(x) -> N0 f(N0 x); down: f(x) -> f(x / N0) / N0. Time arguments are the caller's.
SpectralField rescale(const SpectralField& f, int N0, bool up);

// physical samples on a time grid, linearly interpolated in between
struct TimePath {
  std::vector<double> t;
  std::vector<PhysicalField> a, b;
  PhysicalField at_a(double s) const;
  PhysicalField at_b(double s) const;
};

struct StepperOptions {
  int substeps = 4;
  double cfl = 0.1;
  Exec exec = Exec::Parallel;
};

struct PathState {
  std::vector<double> t;
  std::vector<SpectralField> W, Z;
  long steps = 0;
};

// Solves dW - Lap W + P div(2 v (.) W + F_u) = 0, dZ - Lap Z + div(v Z + W h + F_b) = 0 from zero data at t = 0,
// coefficients (v, h) in coeff.a/b, forcing (F_u, F_b) in force.a/b. Exponential midpoint steps.
PathState solve_forced(const TimePath& coeff, const TimePath& force, const StepperOptions& opt);

struct SemigroupResult {
  SpectralField W, Z;
  long steps = 0;
  double halving_ratio = 0.0;  // |y_h - y_{h/2}| / |y_{h/2} - y_{h/4}| when requested
};
// S(t, t') applied to (phi_u, phi_b): data (P div phi_u, div phi_b) at t'
SemigroupResult semigroup_apply(const SpectralField& phi_u, const SpectralField& phi_b, const TimePath& coeff,
                                double tp, double t, const StepperOptions& opt, bool check_halving = false);

struct CorrectorConfig {
  PathNormParams norms;
  double tbar = 1.0;
  int N0 = 1;
  double cascade_scale = 0.0;  // mu; 0 picks mu so that sup_t |mu^2 v| matches |U(0)|_inf
  int max_iter = 50;
  double tol = 1e-8;
  StepperOptions stepper;
  BackgroundPair background;
};

// time-sampled ingredients of the corrector map, for a given cascade scale
struct CorrectorProblem {
  Grid2D grid;
  std::vector<double> t;
  double mu = 1.0;
  TimePath coeff;   // v-tilde = U + v, h-tilde = H + h
  TimePath forcing; // f_u + 2 U (.) v, f_b + U h + v H
  double v_sup = 0.0;
  double C_UH = 0.0;
};
CorrectorProblem prepare_corrector(const Cascade& C, const CorrectorConfig& cfg);

struct IterationRecord {
  int iter = 0;
  double update = 0.0;
  double rho = 0.0;
};

struct CorrectorState {
  std::vector<double> t;
  std::vector<SpectralField> w, zeta;
  double x_norm = 0.0;
  double delta = 0.0;
  double forcing_scale = 0.0;
  double rho = 0.0;       // geometric mean of the last successive-update ratios
  double rho_max = 0.0;   // largest ratio after the first iteration
  double residual = 0.0;  // |(w, zeta) - F(w, zeta)|_X, the final update applied to the returned iterate
  bool converged = false;
  std::vector<IterationRecord> log;
};

class PicardDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// F applied to (W, Z), i.e. the forced solve with Psi(W, Z) = (W (x) W + s F_u, W Z + s F_b)
PathState corrector_map(const CorrectorProblem& P, const std::vector<SpectralField>& W,
                        const std::vector<SpectralField>& Z, double forcing_scale, const StepperOptions& opt);

struct LipschitzEstimate {
  double C_hat = 0.0;
  double F0_norm = 0.0;  // |F(0)|_X at unit forcing scale
};
// dry run: F(0) at unit forcing gives a probe direction P; C_hat = |Q(P/|P|)|_X with Q the quadratic part
LipschitzEstimate lipschitz_dry_run(const CorrectorProblem& P, const CorrectorConfig& cfg);

CorrectorState picard_solve(const CorrectorProblem& P, const CorrectorConfig& cfg, double delta, double forcing_scale);

}  // namespace ictk
