// One PASS/FAIL line per acceptance criterion. Thresholds live in the criterion_* functions; the
// wall-clock bounds are checked here.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ictk/harness.hpp"

using namespace ictk;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void verdict(const char* id, const DiagnosticsReport& r, double secs, double limit) {
  const Check* c = r.find(id);
  const bool rows = c && c->pass;
  const bool fast = limit <= 0.0 || secs <= limit;
  const bool ok = rows && fast;
  if (!ok) ++failures;
  std::printf("%-4s %s  %.2f s", id, ok ? "PASS" : "FAIL", secs);
  if (limit > 0.0) std::printf(" (limit %.0f s)", limit);
  if (!c) std::printf("  no summary row");
  if (!fast) std::printf("  too slow");
  std::printf("\n");
  if (!rows) {
    const std::string p = std::string(id) + ".";
    for (const auto& k : r.checks)
      if (k.id.compare(0, p.size(), p) == 0 && !k.pass)
        std::printf("       %s = %s (target %s, tol %s)\n", k.id.c_str(), format_number(k.value).c_str(),
                    format_number(k.target).c_str(), format_number(k.tol).c_str());
  }
  std::fflush(stdout);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  tune_allocator();
  const RunConfig cfg = default_config();
  DiagnosticsReport r;

  auto t0 = Clock::now();
  criterion_operator_identities(r, cfg);
  verdict("C1", r, seconds_since(t0), 10.0);

  t0 = Clock::now();
  criterion_geometry(r, cfg);
  verdict("C2", r, seconds_since(t0), 1.0);

  t0 = Clock::now();
  const Cascade C = build_cascade(cascade_config(cfg));
  criterion_amplitude_identity(r, C);
  verdict("C3", r, seconds_since(t0), 60.0);

  t0 = Clock::now();
  const FrequencyLadder asym = build_ladder(asymptotic_params(cfg, cfg.asym_K));
  criterion_scale_separation(r, asym);
  verdict("C4", r, seconds_since(t0), 1.0);

  t0 = Clock::now();
  criterion_potentials(r, C);
  verdict("C5", r, seconds_since(t0), 0.0);

  t0 = Clock::now();
  criterion_residual(r, C);
  verdict("C6", r, seconds_since(t0), 120.0);

  t0 = Clock::now();
  criterion_rates(r, rate_scan(C, asym, cfg.exec));
  verdict("C7", r, seconds_since(t0), 0.0);

  t0 = Clock::now();
  criterion_volumes(r, cfg);
  verdict("C8", r, seconds_since(t0), 0.0);

  t0 = Clock::now();
  criterion_corrector(r, run_corrector_study(cfg));
  verdict("C9", r, seconds_since(t0), 300.0);

  t0 = Clock::now();
  criterion_certification(r, asym);
  verdict("C10", r, seconds_since(t0), 1.0);

  // two pipeline runs from the same config, reports compared byte for byte
  t0 = Clock::now();
  RunConfig det = cfg;
  det.probe_critical = det.probe_lp = det.probe_commutator = false;
  det.write_svg = false;
  PipelineOptions opt;
  const std::string base = (std::filesystem::temp_directory_path() / "ictk_acceptance").string();
  det.out = base + "/a";
  const DiagnosticsReport first = run_pipeline(det, opt);
  det.out = base + "/b";
  run_pipeline(det, opt);
  const std::string a = slurp(base + "/a/report.csv"), b = slurp(base + "/b/report.csv");
  const bool same = !a.empty() && a == b;
  r.add("C11.report_bytes_equal", same ? 1.0 : 0.0, 1.0, 0.0, same);
  const Check* rep = first.find("C11.seeded_repeat_defect");
  r.add_upper("C11.seeded_repeat_defect", rep ? rep->value : kNaN, 0.0);
  r.summarize("C11");
  verdict("C11", r, seconds_since(t0), 0.0);
  std::filesystem::remove_all(base);

  write_text_file("acceptance_report.csv", r.csv());
  std::printf("%s\n", failures ? "acceptance: FAIL" : "acceptance: PASS");
  return failures ? 1 : 0;
}
