#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ictk/harness.hpp"

namespace ictk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<double>(static_cast<long long>(d)))
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NUM(K, FIELD)                                                                                   \
  Entry {                                                                                               \
    K, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_double(k, v); },     \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                                 \
  }
#define INT(K, FIELD, T)                                                                                          \
  Entry {                                                                                                         \
    K, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = static_cast<T>(to_int(k, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                                                \
  }
#define BOOL(K, FIELD)                                                                              \
  Entry {                                                                                           \
    K, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_bool(k, v); },  \
        [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }                  \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      INT("grid", grid, int),
      INT("seed", seed, std::uint64_t),
      Entry{"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
            [](const RunConfig& c) { return c.out; }},
      NUM("t_star", t_star),
      Entry{"exec",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "parallel") c.exec = Exec::Parallel;
              else if (v == "serial") c.exec = Exec::Serial;
              else throw ConfigError("config key '" + k + "': expected parallel|serial");
            },
            [](const RunConfig& c) { return std::string(c.exec == Exec::Parallel ? "parallel" : "serial"); }},
      NUM("ladder.A", ladder.A),
      NUM("ladder.b", ladder.b),
      NUM("ladder.gamma", ladder.gamma),
      Entry{"ladder.J",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const long long J = to_int(k, v);
              if (J != direction_sets().J) throw ConfigError("ladder.J is fixed by the direction sets at 16");
              c.ladder.J = static_cast<int>(J);
            },
            [](const RunConfig& c) { return std::to_string(c.ladder.J); }},
      Entry{"ladder.m_star",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const long long m = to_int(k, v);
              if (m != direction_sets().m_star) throw ConfigError("ladder.m_star is fixed by the direction sets at 5");
              c.ladder.m_star = static_cast<int>(m);
            },
            [](const RunConfig& c) { return std::to_string(c.ladder.m_star); }},
      INT("ladder.K", ladder.K, int),
      NUM("ladder.delta0", ladder.delta0),
      Entry{"ladder.mode",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "field") c.ladder.mode = LadderMode::Field;
              else if (v == "asymptotic") c.ladder.mode = LadderMode::Asymptotic;
              else throw ConfigError("config key '" + k + "': expected field|asymptotic");
            },
            [](const RunConfig& c) { return std::string(c.ladder.mode == LadderMode::Field ? "field" : "asymptotic"); }},
      Entry{"ladder.m_rule",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "exponent") c.ladder.m_rule = MRule::Exponent;
              else if (v == "literal") c.ladder.m_rule = MRule::LiteralProduct;
              else throw ConfigError("config key '" + k + "': expected exponent|literal");
            },
            [](const RunConfig& c) { return std::string(c.ladder.m_rule == MRule::Exponent ? "exponent" : "literal"); }},
      BOOL("ladder.lattice_base", ladder.lattice_base),
      NUM("ball_fraction", ball_fraction),
      INT("identity.grid", identity_grid, int),
      INT("identity.fields", identity_fields, int),
      INT("geometry.samples", geometry_samples, int),
      NUM("asym.A", asym_A),
      NUM("asym.b", asym_b),
      INT("asym.K", asym_K, int),
      INT("region.samples", region_samples, std::size_t),
      INT("cube.count", cube_count, int),
      INT("cube.points", cube_points, std::size_t),
      BOOL("probe.rates", probe_rates),
      BOOL("probe.critical", probe_critical),
      BOOL("probe.lp", probe_lp),
      BOOL("probe.commutator", probe_commutator),
      BOOL("corrector.run", run_corrector),
      INT("corrector.grid", corrector_grid, int),
      NUM("corrector.b", corrector_b),
      NUM("corrector.delta0", corrector_delta0),
      NUM("corrector.delta", corrector_delta),
      NUM("corrector.tbar", corrector.tbar),
      INT("corrector.n0", corrector.N0, int),
      NUM("corrector.alpha", corrector.norms.alpha),
      NUM("corrector.kappa", corrector.norms.kappa),
      NUM("corrector.epsilon", corrector.norms.epsilon),
      NUM("corrector.cascade_scale", corrector.cascade_scale),
      INT("corrector.max_iter", corrector.max_iter, int),
      NUM("corrector.tol", corrector.tol),
      INT("corrector.substeps", corrector.stepper.substeps, int),
      NUM("corrector.cfl", corrector.stepper.cfl),
      NUM("bg.u_amp", corrector.background.u_amp),
      NUM("bg.h_amp", corrector.background.h_amp),
      BOOL("output.snapshots", write_snapshots),
      BOOL("output.svg", write_svg),
  };
  return table;
}

#undef NUM
#undef INT
#undef BOOL

}  // namespace

RunConfig default_config() { return RunConfig{}; }

std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& e : entries()) k.push_back(e.key);
  return k;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  RunConfig cfg = default_config();
  apply_config_text(cfg, ss.str(), path);
  return cfg;
}

std::string config_manifest(const RunConfig& cfg) {
  std::string s;
  for (const auto& e : entries()) s += std::string(e.key) + " = " + e.get(cfg) + "\n";
  return s;
}

std::string content_hash(const std::string& bytes) {
  const std::string blob = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("content_hash: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace ictk
