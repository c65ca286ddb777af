#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ictk/harness.hpp"

using namespace ictk;

TEST_CASE("config text roundtrip through the manifest") {
  RunConfig a = default_config();
  apply_config_text(a, "grid = 256  # comment\nladder.b = 1.75\nseed = 99\nladder.mode = asymptotic\n");
  CHECK(a.grid == 256);
  CHECK(a.ladder.b == 1.75);
  CHECK(a.ladder.mode == LadderMode::Asymptotic);
  RunConfig b = default_config();
  apply_config_text(b, config_manifest(a));
  CHECK(config_manifest(b) == config_manifest(a));
  for (const auto& k : config_keys()) CHECK(config_manifest(a).find(k + " = ") != std::string::npos);
}

TEST_CASE("config errors") {
  RunConfig c = default_config();
  CHECK_THROWS_AS(apply_config_text(c, "no_such_key = 1"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "grid = many"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "grid"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "ladder.mode", "sideways"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/ictk.cfg"), ConfigError);
}

TEST_CASE("content hash matches git blob hashing") {
  // git hash-object on a file holding "hello\n"
  CHECK(content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("report rows, summaries and CSV schema") {
  DiagnosticsReport r;
  r.add_upper("C9.a", 0.5, 1.0);
  r.add_lower("C9.b", 0.5, 1.0);
  r.add_near("C9.c", 4.2, 4.0, 0.5);
  r.add_upper("C9.d", std::nan(""), 1.0);
  const Check& s = r.summarize("C9");
  CHECK(s.value == 2.0);
  CHECK_FALSE(s.pass);
  CHECK_FALSE(r.find("C9.d")->pass);
  CHECK_THROWS_AS(r.add_upper("C9.a", 0.0, 1.0), std::logic_error);
  const std::string csv = r.csv();
  CHECK(csv.rfind("check_id,value,target,tol,pass\n", 0) == 0);
  CHECK(csv.find("C9.a,0.5,1,0,true\n") != std::string::npos);
  CHECK(csv.find("C9.d,nan,1,0,false\n") != std::string::npos);
  CHECK(format_number(0.1 + 0.2) == "0.3");
}

TEST_CASE("single-mode envelope peaks at t = 1/(2 N^2)") {
  const double N = 1234.0;
  const EnvelopeFamily E = envelope_from_log_table({std::log(N)}, 0.0, 1);
  const double t = 1.0 / (2.0 * N * N);
  CHECK(std::exp(0.5 * std::log(t) + E.log_value(std::log(t))) == doctest::Approx(std::exp(-0.5) / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(std::exp(E.log_scaled(0, std::log(0.5))) == doctest::Approx(std::exp(-0.5) / std::sqrt(2.0)).epsilon(1e-13));
  // sqrt(t) E(t) is maximal there
  for (double f : {0.5, 0.9, 1.1, 2.0}) CHECK(E.log_scaled(0, std::log(0.5 * f)) < E.log_scaled(0, std::log(0.5)));
}

TEST_CASE("anchored envelope evaluation survives huge log N") {
  // log N near 1e15: t itself underflows, the scaled form only sees differences
  const std::vector<double> logN{1e15, 1e15 + 3.0};
  const EnvelopeFamily E = envelope_from_log_table(logN, 0.0, 1);
  const double v = std::exp(E.log_scaled(1, std::log(0.5)));
  // at t = theta / N_1^2: sqrt(theta) (e^{-theta} + r e^{-theta r^2}) with r = N_0 / N_1
  const double theta = 0.5, r = std::exp(-3.0);
  const double want = std::sqrt(theta) * (std::exp(-theta) + r * std::exp(-theta * r * r));
  CHECK(v == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("envelope fit on a geometric ladder recovers the rate") {
  const std::vector<double> logN = envelope_log_table(1e5, 131072.0, 16, 5, 6);
  const RateFit v = fit_envelope(envelope_from_log_table(logN, 0.0, 1), "v");
  CHECK(v.slope == doctest::Approx(-0.5).epsilon(0.1));
  CHECK(v.c > 0.0);
  CHECK(v.c <= v.C);
  const RateFit g = fit_envelope(envelope_from_log_table(logN, 0.0, 2), "grad v");
  CHECK(g.slope == doctest::Approx(-1.0).epsilon(0.1));
  CHECK_THROWS(fit_envelope(envelope_from_log_table({1.0, 2.0, 3.0}, 0.0, 1), "short"));
}

TEST_CASE("critical norms of a single mode do not grow with log(t/t')") {
  const double N = 50.0;
  auto log_sup = [N](double lt) { return std::log(N) - N * N * std::exp(lt); };
  const CriticalScan s = critical_norm_scan(log_sup, std::log(1e-8), std::log(1.0));
  REQUIRE(!s.l2_squared.empty());
  // closed forms over [t', 1]: sqrt(pi) (erf(N) - erf(N sqrt(t'))) and (e^{-2 N^2 t'} - e^{-2 N^2}) / 2
  for (std::size_t w = 0; w < s.log_ratio.size(); ++w) {
    const double tp = std::exp(-s.log_ratio[w]);
    CHECK(s.l1_weighted[w] == doctest::Approx(std::sqrt(kPi) * (std::erf(N) - std::erf(N * std::sqrt(tp)))).epsilon(1e-3));
    CHECK(s.l2_squared[w] == doctest::Approx(0.5 * (std::exp(-2 * N * N * tp) - std::exp(-2 * N * N))).epsilon(1e-3));
    CHECK(s.l1_weighted[w] + s.l2_squared[w] <= std::sqrt(kPi) + 0.5);
  }

  const CriticalScan z = critical_norm_scan([](double) { return -INFINITY; }, std::log(1e-6), 0.0);
  for (double v : z.l1_weighted) CHECK(v == 0.0);
  for (double v : z.l2_squared) CHECK(v == 0.0);
}

TEST_CASE("commutator with a constant coefficient vanishes") {
  const Grid2D g(64);
  SpectralField a(g, Rank::Scalar);
  a.at(0, 0, 0) = 2.5;
  const CommutatorProbe p = commutator_probe(a, 0, 16, {1e-4, 1e-3, 1e-2}, 0, 3);
  for (double v : p.lhs) CHECK(v <= 1e-14);
  CHECK(p.constant <= 1e-12);
}

TEST_CASE("Lp ratio at p = infinity is exactly one") {
  RunConfig cfg = default_config();
  cfg.ladder.K = 0;
  cfg.grid = 128;
  const Cascade C = build_cascade(cascade_config(cfg));
  const LpScan s = lp_scan(C, {INFINITY, 2.0}, 1000, 1);
  for (const auto& e : s.entries) {
    if (std::isinf(e.p)) {
      CHECK(e.ratio_v == 1.0);
      CHECK(e.ratio_h == 1.0);
    } else {
      CHECK(e.ratio_v <= 1.0);
    }
  }
  REQUIRE(s.l2t_l4.size() == 1);
  CHECK(std::isfinite(s.l2t_l4[0]));
  CHECK(s.l2t_l4[0] > 0.0);
}

TEST_CASE("SVG emitters") {
  const std::string s = svg_loglog("rates", "t", "sup", {{"v", {1e-3, 1e-2, 1e-1}, {30.0, 10.0, 3.0}}});
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("<polyline") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  const std::string h = svg_heatmap("sep", {{0.5, 0.1}, {0.1, 0.5}});
  CHECK(h.find("<rect") != std::string::npos);
  const std::vector<std::uint8_t> mask{1, 0, 0, 1};
  CHECK(svg_mask("m", mask, 2).find("width=\"1\"") != std::string::npos);
  CHECK_THROWS(svg_mask("m", mask, 3));
}
