#pragma once

#include <map>
#include <string>
#include <vector>

#include "ictk/geometry.hpp"
#include "ictk/ladder.hpp"
#include "ictk/spectral.hpp"

namespace ictk {

struct CascadeConfig {
  LadderParams ladder;
  int grid = 512;
  // c is the largest 2^-m with c max(|S_u|, |S_c|, |S_b|^2) <= ball_fraction * eps_u
  double ball_fraction = 0.5;
  Exec exec = Exec::Parallel;
};

// amplitudes live on the grid as physical samples
struct AmplitudeSet {
  int k = 0;
  std::vector<PhysicalField> a_u;  // lambda_u order
  std::vector<PhysicalField> a_b;  // lambda_b order
  double c = 0.0;                  // constant used to build this level, 0 at k = 0
  double ball_margin = 0.0;        // eps_u minus the largest |c S_u|, |c S_c| seen
};

struct PotentialSet {
  int k = 0;
  std::vector<SpectralField> psi_u;  // vector, lambda_u order
  std::vector<SpectralField> psi_b;  // scalar, lambda_b order
  std::vector<SpectralField> psi_c;  // vector, lambda_b order
  bool has_c = false;                // psi_c is identically zero at k = 0
};

struct StressSet {
  SpectralField S_u, S_c;  // symtensor
  SpectralField S_b;       // vector
  double sup_u = 0.0, sup_c = 0.0, sup_b = 0.0;
};

class AmplitudeOutOfBall : public std::runtime_error {
 public:
  AmplitudeOutOfBall(int level, int i, int j, double margin)
      : std::runtime_error("amplitude input leaves the admissible ball at level " + std::to_string(level) +
                           ", grid point (" + std::to_string(i) + "," + std::to_string(j) +
                           "), margin " + std::to_string(margin) + "; c is too large"),
        i(i), j(j), margin(margin) {}
  int i, j;
  double margin;
};

struct CutoffSummary {
  int j = 0;
  long long M = 0;
  double normalization = 0.0, support_violation = 0.0, shift_defect = 0.0, axis_derivative_rel = 0.0;
  std::vector<double> C_n;
};

struct CascadeLevel {
  int k = 0;
  std::vector<long long> N;  // synthesis frequency per joint index
  AmplitudeSet amps;
  PotentialSet pots;
  StressSet stress;
  double c_next = 0.0;  // c used to pass this level's stresses to level k+1
  std::vector<CutoffSummary> cutoffs;
  double chi_gap_cells = 0.0;
};

struct Cascade {
  CascadeConfig config;
  FrequencyLadder ladder;
  Grid2D grid;
  std::vector<CascadeLevel> levels;  // k = 0..K
  int K() const { return static_cast<int>(levels.size()) - 1; }
};

struct PrincipalState {
  double t = 0.0;
  SpectralField vbar, hbar, Rbar, Hbar;
  double leray_gap = 0.0;  // sup |(Id - P) Delta Psi|: what v-bar would differ by without P
};

struct DuhamelState {
  double t = 0.0;
  SpectralField v, h, R, H;
};

// ---------------------------------------------------------------- construction

AmplitudeSet base_amplitudes(const Grid2D& g);
PotentialSet build_potentials(int k, const AmplitudeSet& a, const std::vector<PipeCutoff>& cutoffs,
                              const FrequencyLadder& L, const Grid2D& g, Exec ex = Exec::Parallel);
StressSet compute_stresses(const CascadeLevel& lvl, Exec ex = Exec::Parallel);
double choose_c(const StressSet& s, double ball_fraction);
AmplitudeSet amplitudes_next(int k, const StressSet& s, const PhysicalField& chi_next, double c);
Cascade build_cascade(const CascadeConfig& cfg);

// ---------------------------------------------------------------- identities

struct AmplitudeIdentity {
  double vector_residual = 0.0;     // sup |sum a_b eta_perp - S_b| on {chi = 1}
  double vector_scale = 0.0;
  double tracefree_u = 0.0;         // relative sup of the trace-free defect, u tensor
  double tracefree_c = 0.0;         // same for the coupling tensor (absolute if S_c = 0)
  double curl_diag = 0.0;           // sup |curl sum a_b eta_perp|
  std::size_t points = 0;
};
AmplitudeIdentity check_amplitude_identity(const StressSet& s, const AmplitudeSet& next,
                                           const std::vector<std::uint8_t>& chi_one);

// ---------------------------------------------------------------- fields in time

PrincipalState principal_fields(const CascadeLevel& lvl, double t, Exec ex = Exec::Parallel);
// v_k, h_k, R_k, H_k at every requested time, from level k+1 principal parts
std::vector<DuhamelState> duhamel_fields(const Cascade& C, int k, const std::vector<double>& times,
                                         Exec ex = Exec::Parallel);

struct SeparationEntry {
  int j = 0, jp = 0;
  double value = 0.0, target = 0.0, rel_err = 0.0;
};
// int_0^t N_j N_j' e^{-(N_j^2 + N_j'^2) s} ds for j >= j', evaluated in log space
std::vector<SeparationEntry> scale_separation_table(const FrequencyLadder& L, int k, double log_t);

struct ForcingPair {
  double t = 0.0;
  std::vector<SpectralField> f_u_level, f_b_level;  // per level k = 0..K
  SpectralField f_u_cross, f_b_cross;
  SpectralField f_u, f_b;
  double identity_defect = 0.0;  // max over k >= 1 of the difference-structure identity
};
// duhamel[k] holds v_k, h_k at time t for k = 0..K-1
ForcingPair assemble_forcing(const Cascade& C, double t, const std::vector<DuhamelState>& duhamel);

struct EquationResidual {
  double t = 0.0, dt = 0.0;
  double res_v = 0.0, res_v_half = 0.0, ratio_v = 0.0, extrap_v = 0.0, scale_v = 0.0;
  double res_h = 0.0, res_h_half = 0.0, ratio_h = 0.0, extrap_h = 0.0, scale_h = 0.0;
  double div_v = 0.0;
};
EquationResidual equation_residual(const Cascade& C, double t, double dt);

}  // namespace ictk
