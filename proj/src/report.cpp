#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <malloc.h>

#include "ictk/harness.hpp"

namespace ictk {

void tune_allocator() {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  // 12 digits: stable across last-bit noise, enough for every tolerance in the report
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

Check& DiagnosticsReport::add(const std::string& id, double value, double target, double tol, bool pass) {
  for (const auto& c : checks)
    if (c.id == id) throw std::logic_error("report row '" + id + "' added twice");
  checks.push_back({id, value, target, tol, pass && !std::isnan(value)});
  return checks.back();
}

Check& DiagnosticsReport::add_upper(const std::string& id, double value, double target, double tol) {
  return add(id, value, target, tol, value <= target + tol);
}

Check& DiagnosticsReport::add_lower(const std::string& id, double value, double target, double tol) {
  return add(id, value, target, tol, value >= target - tol);
}

Check& DiagnosticsReport::add_near(const std::string& id, double value, double target, double tol) {
  return add(id, value, target, tol, std::abs(value - target) <= tol);
}

Check& DiagnosticsReport::summarize(const std::string& prefix) {
  int failed = 0, rows = 0;
  const std::string p = prefix + ".";
  for (const auto& c : checks) {
    if (c.id.compare(0, p.size(), p) != 0) continue;
    ++rows;
    if (!c.pass) ++failed;
  }
  return add(prefix, failed, 0.0, 0.0, rows > 0 && failed == 0);
}

const Check* DiagnosticsReport::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

bool DiagnosticsReport::all_pass() const {
  if (!stage_error.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string DiagnosticsReport::csv() const {
  std::string s = "check_id,value,target,tol,pass\n";
  for (const auto& c : checks)
    s += c.id + "," + format_number(c.value) + "," + format_number(c.target) + "," + format_number(c.tol) + "," +
         (c.pass ? "true" : "false") + "\n";
  return s;
}

}  // namespace ictk
