#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ictk/cascade.hpp"
#include "ictk/corrector.hpp"
#include "ictk/geometry.hpp"
#include "ictk/ladder.hpp"
#include "ictk/spectral.hpp"

namespace ictk {

// ---------------------------------------------------------------- configuration

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  int grid = 512;
  LadderParams ladder;
  double ball_fraction = 0.5;
  std::uint64_t seed = 20240611;
  std::string out = "out";
  double t_star = 0.0;  // output-time offset only
  Exec exec = Exec::Parallel;

  // operator and geometry suites
  int identity_grid = 256;
  int identity_fields = 200;
  int geometry_samples = 1000;

  // asymptotic ladder used for certification and the rate envelope
  double asym_A = 1e5;
  double asym_b = 131072.0;
  int asym_K = 6;

  // region sampling
  std::size_t region_samples = 400000;
  int cube_count = 64;
  std::size_t cube_points = 4000;

  bool probe_rates = true;
  bool probe_critical = true;
  bool probe_lp = true;
  bool probe_commutator = true;
  bool run_corrector = true;
  bool write_snapshots = false;
  bool write_svg = true;

  // corrector toy cascade and solve
  int corrector_grid = 256;
  double corrector_b = 1.5;
  double corrector_delta0 = 0.4;
  double corrector_delta = 0.0;  // 0: from the dry-run Lipschitz estimate
  CorrectorConfig corrector;
};

RunConfig default_config();
// plain text key = value, '#' starts a comment; unknown keys raise ConfigError
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "<text>");
RunConfig load_config(const std::string& path);
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
// canonical key = value listing; parsing it back reproduces cfg
std::string config_manifest(const RunConfig& cfg);
std::vector<std::string> config_keys();

// Keep freed field buffers in the heap: glibc otherwise unmaps each multi-megabyte
// temporary and page-faults it back in on the next allocation. Call once from main.
void tune_allocator();

// git blob hash (SHA-1 over "blob <len>\0" + bytes), hex
std::string content_hash(const std::string& bytes);

// ---------------------------------------------------------------- report

struct Check {
  std::string id;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct RateFit {
  std::string quantity;
  std::vector<double> log_t, log_value;  // natural logs; times may be far below double range
  double slope = 0.0, intercept = 0.0, residual = 0.0;
  double slope_se = 0.0;    // standard error of the slope
  double c = 0.0, C = 0.0;  // lower sequence and upper envelope constants
  double decades = 0.0;
};

struct DiagnosticsReport {
  std::vector<Check> checks;
  std::vector<RateFit> fits;
  std::string config_hash;
  std::string stage_error;  // set when a stage aborted

  Check& add(const std::string& id, double value, double target, double tol, bool pass);
  // value <= target + tol
  Check& add_upper(const std::string& id, double value, double target, double tol = 0.0);
  // value >= target - tol
  Check& add_lower(const std::string& id, double value, double target, double tol = 0.0);
  // |value - target| <= tol
  Check& add_near(const std::string& id, double value, double target, double tol);
  // summary row: value counts failed rows whose id starts with prefix + "."
  Check& summarize(const std::string& prefix);
  const Check* find(const std::string& id) const;
  bool all_pass() const;
  std::string csv() const;  // columns check_id,value,target,tol,pass
};

std::string format_number(double v);
void write_text_file(const std::string& path, const std::string& text);

// ---------------------------------------------------------------- suites behind criteria 1-2

struct IdentitySuite {
  std::vector<std::string> names;
  std::vector<double> max_rel;  // per identity, over all fields
  int fields = 0;
};
IdentitySuite operator_identity_suite(int grid, int fields, std::uint64_t seed, Exec ex = Exec::Parallel);

struct GeometryFuzz {
  int samples = 0;
  double eps_u = 0.0;
  double sym_residual = 0.0, sym_min_coeff = 0.0;
  double tv_tensor_residual = 0.0, tv_vector_residual = 0.0, tv_pressure_defect = 0.0;
};
GeometryFuzz geometry_fuzz(int samples, std::uint64_t seed);

// ---------------------------------------------------------------- rate envelopes

// sum_i e^{log_amp_i} N_i^power e^{-N_i^2 t}, evaluated in log space
struct EnvelopeFamily {
  std::vector<double> logN, log_amp;
  int power = 1;
  double log_value(double log_t) const;
  // log of t^{power/2} E(t) at t = theta / N_anchor^2; only differences of log N enter, so this stays
  // accurate when log N itself is far beyond double resolution of t
  double log_scaled(std::size_t anchor, double log_theta) const;
};
EnvelopeFamily envelope_from_ladder(const FrequencyLadder& L, int k_lo, int k_hi, double log_amp, int power);
EnvelopeFamily envelope_from_log_table(const std::vector<double>& logN, double log_amp, int power);
// log N_{j,k} = log m_star + b^{k + (j-1)/J} log A without ceilings, k = 0..K
std::vector<double> envelope_log_table(double A, double b, int J, int m_star, int K);

// fit on the sequence t_i = (power/2) / N_i^2; C from local windows around each t_i and samples across each gap
RateFit fit_envelope(const EnvelopeFamily& E, const std::string& quantity, int dense_per_decade = 8);

struct EnvelopeValidation {
  int k = 0;
  std::vector<double> t, real, proxy;
  double min_ratio = 0.0, max_ratio = 0.0;  // real / proxy
  double sqrt_t_real_max = 0.0, sqrt_t_proxy_max = 0.0;
};
// proxy sum_N N e^{-N^2 t} w_N over the level's frequency shells; w_N is the sup of the shell's combined
// profile, |P Lap psi|_inf for v and |Lap psi_b|_inf for h
EnvelopeValidation validate_envelope(const CascadeLevel& lvl, bool velocity, int samples = 9);
// log of the mean shell weight of a built level
double built_log_amplitude(const CascadeLevel& lvl, bool velocity);

struct RateScan {
  RateFit v_sup, v_grad, h_sup, h_grad;
  std::vector<EnvelopeValidation> validation;  // v on the first levels_built entries, then h
  int levels_built = 0;
  int levels = 0;  // asymptotic levels in the fit
};
RateScan rate_scan(const Cascade& C, const FrequencyLadder& asym, Exec ex = Exec::Parallel);

// ---------------------------------------------------------------- critical norms

struct CriticalScan {
  std::vector<double> log_ratio;   // log(t / t') per window
  std::vector<double> l1_weighted;  // int |v|_inf s^{-1/2} ds
  std::vector<double> l2_squared;   // int |v|_inf^2 ds
  double slope = 0.0;               // fitted d(l1 + l2^2) / d log(t/t')
};
// |v(s)|_inf supplied through its log; windows [t', t_hi] with t' from t_lo to t_hi
CriticalScan critical_norm_scan(const std::function<double(double)>& log_sup, double log_t_lo, double log_t_hi,
                                int windows = 12, int per_unit = 24);
CriticalScan critical_norm_scan(const EnvelopeFamily& E, double log_t_lo, double log_t_hi, int windows = 12);

// ---------------------------------------------------------------- Lp intermittency

struct LpEntry {
  int k = 0;
  double p = 0.0, t = 0.0;
  double ratio_v = 0.0, ratio_h = 0.0;  // normalized |.|_p / |.|_inf
  double region_fraction = 0.0;         // sampled |Omega_k| / (2 pi)^2
  double bound = 0.0;                   // min(fraction, 2^{-k})^{1/p}
};
struct LpScan {
  std::vector<LpEntry> entries;
  std::vector<double> l2t_l4;  // per level: (int |vbar_k|_4^2 dt)^{1/2} over the level window
};
LpScan lp_scan(const Cascade& C, const std::vector<double>& p_list, std::size_t region_samples, std::uint64_t seed);

// ---------------------------------------------------------------- bound probes

struct CommutatorProbe {
  std::vector<double> t, lhs, rhs_shape;
  double constant = 0.0;  // sup lhs / rhs_shape
};
CommutatorProbe commutator_probe(const SpectralField& a, int xi1, int xi2, const std::vector<double>& t_list, int n,
                                 int m);

struct ProductProbe {
  int pairs = 0;
  double constant = 0.0;  // max |g (x) h|_Y / (|g|_X |h|_X)
};
// g(t) = t^{-(1-a)/2} e^{t Lap} g0 with random band-limited g0
ProductProbe product_bound_probe(int grid, int pairs, int kmax, std::uint64_t seed, const PathNormParams& p,
                                 double tbar = 1.0);

struct SemigroupProbe {
  std::vector<double> tp, t, ratio;
  double constant = 0.0;
};
SemigroupProbe semigroup_bound_probe(const TimePath& coeff, const std::vector<double>& t_grid, int kmax,
                                     std::uint64_t seed, const PathNormParams& p, const StepperOptions& opt);

// ---------------------------------------------------------------- criteria

// Each appends rows "Cn.<sub>" and the summary row "Cn".
void criterion_operator_identities(DiagnosticsReport& r, const RunConfig& cfg);  // C1
void criterion_geometry(DiagnosticsReport& r, const RunConfig& cfg);             // C2
void criterion_amplitude_identity(DiagnosticsReport& r, const Cascade& C);        // C3
void criterion_scale_separation(DiagnosticsReport& r, const FrequencyLadder& asym);  // C4
void criterion_potentials(DiagnosticsReport& r, const Cascade& C);                // C5
void criterion_residual(DiagnosticsReport& r, const Cascade& C);                  // C6
void criterion_rates(DiagnosticsReport& r, const RateScan& s);                    // C7
void criterion_volumes(DiagnosticsReport& r, const RunConfig& cfg);               // C8
struct CorrectorRun {
  CorrectorProblem problem;
  LipschitzEstimate lipschitz;
  CorrectorState at_delta, at_half, zero;
  double seconds = 0.0;
};
CorrectorRun run_corrector_study(const RunConfig& cfg);
void criterion_corrector(DiagnosticsReport& r, const CorrectorRun& run);          // C9
void criterion_certification(DiagnosticsReport& r, const FrequencyLadder& asym);  // C10

LadderParams asymptotic_params(const RunConfig& cfg, int K);
CascadeConfig cascade_config(const RunConfig& cfg);
CascadeConfig corrector_cascade_config(const RunConfig& cfg);

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
  bool geometry = true, ladder = true, build = true, verify = true, rates = true;
  bool corrector = false;
  bool write_outputs = true;
};

// geometry-check -> ladder -> build -> verify -> rates -> (corrector); a failing stage records its error and
// stops, the partial report is still written
DiagnosticsReport run_pipeline(const RunConfig& cfg, const PipelineOptions& opt);

// ---------------------------------------------------------------- outputs

std::string build_manifest(const Cascade& C);
void write_build(const Cascade& C, const std::string& dir);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<SvgSeries>& series, bool x_is_log = true, bool y_is_log = true);
std::string svg_heatmap(const std::string& title, const std::vector<std::vector<double>>& values);
std::string svg_mask(const std::string& title, const std::vector<std::uint8_t>& mask, int n, int max_px = 256);

}  // namespace ictk
