#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ictk/harness.hpp"

using namespace ictk;

namespace {

bool criteria_pass(const DiagnosticsReport& r) {
  if (!r.stage_error.empty()) return false;
  for (const auto& c : r.checks)
    if (c.id.rfind("P.", 0) != 0 && !c.pass) return false;
  return true;
}

void print_summary(const DiagnosticsReport& r) {
  for (const auto& c : r.checks) {
    if (c.id.find('.') != std::string::npos) continue;
    std::printf("%-6s %s  (%s failing rows)\n", c.id.c_str(), c.pass ? "PASS" : "FAIL", format_number(c.value).c_str());
  }
  int probes_failed = 0;
  for (const auto& c : r.checks)
    if (c.id.rfind("P.", 0) == 0 && !c.pass) ++probes_failed;
  if (probes_failed) std::printf("probes outside their reference band: %d (see report)\n", probes_failed);
  if (!r.stage_error.empty()) std::printf("stage error: %s\n", r.stage_error.c_str());
}

int finish(const DiagnosticsReport& r, const RunConfig& cfg, const std::string& name) {
  write_text_file(cfg.out + "/" + name, r.csv());
  print_summary(r);
  std::printf("report: %s/%s\n", cfg.out.c_str(), name.c_str());
  return criteria_pass(r) ? 0 : 1;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"intermittent cascade toolkit: builds the cascade fields and checks their identities and rates"};
  app.require_subcommand(0, 1);

  std::string config_path, out, mode;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int grid = 0;
  app.add_option("--config", config_path, "plain-text key = value config file");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "seed for every random stage");
  app.add_option("--grid", grid, "grid size n (n x n)");
  app.add_option("--mode", mode, "ladder mode")->check(CLI::IsMember({"field", "asymptotic"}));
  app.add_option("--set", overrides, "extra key=value config entries");

  auto* geometry = app.add_subcommand("geometry-check", "reconstruction fuzz of both decompositions");
  auto* ladder = app.add_subcommand("ladder", "frequency tables, scale separation and certification");
  auto* build = app.add_subcommand("build", "build the cascade and write snapshots plus manifest");
  int levels = -1;
  std::string params_path;
  build->add_option("--levels", levels, "highest level K");
  build->add_option("--params", params_path, "config fragment with ladder.* keys");
  auto* verify = app.add_subcommand("verify", "identity, potential, residual and volume checks");
  auto* rates = app.add_subcommand("rates", "envelope rate fits and probes");
  auto* corrector = app.add_subcommand("corrector", "Picard solve for the corrector");
  double delta = 0.0, tbar = 0.0;
  int n0 = 0;
  std::string bg_path;
  corrector->add_option("--delta", delta, "ball radius; default from the dry-run Lipschitz estimate");
  corrector->add_option("--tbar", tbar, "time horizon");
  corrector->add_option("--n0", n0, "rescaling factor N0");
  corrector->add_option("--bg", bg_path, "config fragment with bg.* keys");
  auto* run = app.add_subcommand("run", "full pipeline");
  int run_levels = -1;
  bool no_corrector = false;
  run->add_option("--levels", run_levels, "highest level K");
  run->add_flag("--no-corrector", no_corrector, "skip the corrector stage");
  auto* exp = app.add_subcommand("export", "snapshot to CSV samples");
  std::string snap_path, export_out;
  exp->add_option("--snapshot", snap_path, "CFF1 snapshot")->required();
  exp->add_option("--csv", export_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = default_config();
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& kv : overrides) apply_config_text(cfg, kv, "--set");
    if (!out.empty()) cfg.out = out;
    if (app.count("--seed")) cfg.seed = seed;
    if (grid > 0) cfg.grid = grid;
    if (!mode.empty()) set_config_value(cfg, "ladder.mode", mode);

    if (app.get_subcommands().empty()) {
      std::cout << config_manifest(cfg);
      return 0;
    }

    if (*geometry) {
      DiagnosticsReport r;
      criterion_geometry(r, cfg);
      return finish(r, cfg, "geometry.csv");
    }
    if (*ladder) {
      const FrequencyLadder L = build_ladder(cfg.ladder);
      std::printf("%s ladder A=%g b=%g gamma=%g K=%d\n",
                  cfg.ladder.mode == LadderMode::Field ? "field" : "asymptotic", cfg.ladder.A, cfg.ladder.b,
                  cfg.ladder.gamma, cfg.ladder.K);
      for (int k = 0; k < L.levels(); ++k) {
        std::printf("k=%d logN:", k);
        for (int j = 1; j <= cfg.ladder.J; ++j) std::printf(" %.6g", L.logN(j, k));
        std::printf("\n");
      }
      const FrequencyLadder asym = build_ladder(asymptotic_params(cfg, cfg.asym_K));
      DiagnosticsReport r;
      criterion_scale_separation(r, asym);
      criterion_certification(r, asym);
      return finish(r, cfg, "ladder.csv");
    }
    if (*build) {
      if (!params_path.empty()) apply_config_text(cfg, read_file(params_path), params_path);
      if (levels >= 0) cfg.ladder.K = levels;
      const Cascade C = build_cascade(cascade_config(cfg));
      write_build(C, cfg.out);
      std::cout << build_manifest(C);
      return 0;
    }
    if (*verify || *rates) {
      PipelineOptions opt;
      opt.geometry = false;
      opt.ladder = false;
      opt.verify = static_cast<bool>(*verify);
      opt.rates = static_cast<bool>(*rates);
      opt.write_outputs = false;
      const DiagnosticsReport r = run_pipeline(cfg, opt);
      return finish(r, cfg, *verify ? "verify.csv" : "rates.csv");
    }
    if (*corrector) {
      if (!bg_path.empty()) apply_config_text(cfg, read_file(bg_path), bg_path);
      if (delta > 0.0) cfg.corrector_delta = delta;
      if (tbar > 0.0) cfg.corrector.tbar = tbar;
      if (n0 > 0) cfg.corrector.N0 = n0;
      const CorrectorRun R = run_corrector_study(cfg);
      DiagnosticsReport r;
      criterion_corrector(r, R);
      std::printf("C_hat=%s delta=%s rho=%s residual=%s x_norm=%s (%.1f s)\n",
                  format_number(R.lipschitz.C_hat).c_str(), format_number(R.at_delta.delta).c_str(),
                  format_number(R.at_delta.rho).c_str(), format_number(R.at_delta.residual).c_str(),
                  format_number(R.at_delta.x_norm).c_str(), R.seconds);
      std::string log = "iter,update_norm,rho\n";
      for (const auto& rec : R.at_delta.log)
        log += std::to_string(rec.iter) + "," + format_number(rec.update) + "," + format_number(rec.rho) + "\n";
      write_text_file(cfg.out + "/corrector_iterations.csv", log);
      write_snapshot(cfg.out + "/corrector_w.cff", R.at_delta.w.back());
      write_snapshot(cfg.out + "/corrector_zeta.cff", R.at_delta.zeta.back());
      return finish(r, cfg, "corrector.csv");
    }
    if (*run) {
      if (run_levels >= 0) cfg.ladder.K = run_levels;
      PipelineOptions opt;
      opt.corrector = cfg.run_corrector && !no_corrector;
      const DiagnosticsReport r = run_pipeline(cfg, opt);
      print_summary(r);
      std::printf("report: %s/report.csv\n", cfg.out.c_str());
      return criteria_pass(r) ? 0 : 1;
    }
    if (*exp) {
      const SpectralField f = read_snapshot(snap_path);
      const PhysicalField p = to_physical(f);
      const Grid2D& g = p.grid;
      std::string s = "x1,x2";
      for (int c = 0; c < p.ncomp(); ++c) s += ",c" + std::to_string(c);
      s += "\n";
      for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j) {
          s += format_number(g.x(i)) + "," + format_number(g.x(j));
          for (int c = 0; c < p.ncomp(); ++c)
            s += "," + format_number(p.comp(c)[static_cast<std::size_t>(i) * g.n() + j]);
          s += "\n";
        }
      write_text_file(export_out, s);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
