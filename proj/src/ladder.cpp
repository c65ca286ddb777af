#include <cmath>
#include <limits>
#include <sstream>

#include "ictk/ladder.hpp"

namespace ictk {

namespace {

// log ceil(A^e); exact ceiling while the power is representable, asymptotic otherwise
double log_ceil_pow(double logA, double e) {
  const double lp = e * logA;
  if (lp < 40.0) return std::log(std::ceil(std::exp(lp)));
  return lp;
}

long long ceil_pow(double A, double e) {
  const double v = std::pow(A, e);
  if (!(v < 9.0e15)) throw GridOverflow("ladder entry does not fit an integer table");
  return static_cast<long long>(std::ceil(v));
}

}  // namespace

long long FrequencyLadder::N(int j, int k) const {
  if (N_.empty()) throw std::logic_error("integer ladder tables exist only in field mode");
  return N_.at(k).at(j - 1);
}

long long FrequencyLadder::M(int j, int k) const {
  if (M_.empty()) throw std::logic_error("integer ladder tables exist only in field mode");
  if (k < 1) throw std::out_of_range("M_{j,k} is defined for k >= 1");
  return M_.at(k).at(j - 1);
}

long long FrequencyLadder::field_N(int j, int k) const {
  if (j == 1 && k == 0 && params.lattice_base) return params.m_star;
  return N(j, k);
}

FrequencyLadder build_ladder(const LadderParams& p) {
  if (!(p.A > 1.0) || !(p.b > 1.0)) throw std::invalid_argument("ladder: A and b must exceed 1");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw std::invalid_argument("ladder: gamma must lie in (0,1)");
  if (p.J < 1 || p.m_star < 1 || p.K < 0) throw std::invalid_argument("ladder: bad J, m_star or K");
  FrequencyLadder L;
  L.params = p;
  const double logA = std::log(p.A);
  const int nk = p.K + 2;
  const bool field = p.mode == LadderMode::Field;
  L.logN_.assign(nk, std::vector<double>(p.J, 0.0));
  L.logM_.assign(nk, std::vector<double>(p.J, 0.0));
  if (field) {
    L.N_.assign(nk, std::vector<long long>(p.J, 0));
    L.M_.assign(nk, std::vector<long long>(p.J, 0));
  }
  for (int k = 0; k < nk; ++k) {
    for (int j = 1; j <= p.J; ++j) {
      const double e = std::pow(p.b, k + static_cast<double>(j - 1) / p.J);
      if (j == 1 && k == 0) {
        L.logN_[k][j - 1] = 0.0;
        if (field) L.N_[k][j - 1] = 1;
      } else if (field) {
        const long long n = p.m_star * ceil_pow(p.A, e);
        L.N_[k][j - 1] = n;
        L.logN_[k][j - 1] = std::log(static_cast<double>(n));
      } else {
        L.logN_[k][j - 1] = std::log(static_cast<double>(p.m_star)) + log_ceil_pow(logA, e);
      }
      if (k == 0) continue;
      const double e1 = p.gamma * std::pow(p.b, k);
      double eM = 0.0;
      if (j == 1) {
        eM = e1;
      } else if (p.m_rule == MRule::Exponent) {
        eM = p.gamma * e;
      } else {
        eM = p.gamma * std::pow(p.b, static_cast<double>(j - 1) / p.J);
      }
      if (field) {
        long long m = ceil_pow(p.A, eM);
        if (j > 1 && p.m_rule == MRule::LiteralProduct) m *= ceil_pow(p.A, e1);
        L.M_[k][j - 1] = m;
        L.logM_[k][j - 1] = std::log(static_cast<double>(m));
      } else {
        double lm = log_ceil_pow(logA, eM);
        if (j > 1 && p.m_rule == MRule::LiteralProduct) lm += log_ceil_pow(logA, e1);
        L.logM_[k][j - 1] = lm;
      }
    }
  }
  if (p.mode == LadderMode::Asymptotic) {
    const LadderCertificate cert = certify_ladder(L);
    for (const auto& c : cert.checks)
      if (c.asserted && !c.pass()) throw std::runtime_error("asymptotic ladder violates " + c.name);
  }
  return L;
}

bool LadderCertificate::certified() const {
  for (const auto& c : checks)
    if (!c.pass()) return false;
  return true;
}

LadderCertificate certify_ladder(const FrequencyLadder& L) {
  const LadderParams& p = L.params;
  const bool asym = p.mode == LadderMode::Asymptotic;
  const double logA = std::log(p.A);
  LadderCertificate cert;
  auto add = [&](const std::string& name, double margin, bool asserted) {
    cert.checks.push_back({name, margin, asserted && asym});
  };
  auto tag = [](const char* base, int j, int k) {
    std::ostringstream os;
    os << base << "[j=" << j << ",k=" << k << "]";
    return os.str();
  };

  // strict lexicographic ordering of the frequencies, including the step to k+1
  double ord = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= p.K; ++k) {
    for (int j = 2; j <= p.J; ++j) ord = std::min(ord, L.logN(j, k) - L.logN(j - 1, k));
    ord = std::min(ord, L.logN(1, k + 1) - L.logN(p.J, k));
  }
  add("N_strict_ordering", ord, true);

  add("gamma_gt_b^{-1/J}", p.gamma - std::pow(p.b, -1.0 / p.J), true);

  // ordering chain, reported as the smallest log gap in units of log A
  double cmin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= p.K; ++k) {
    for (int j = 2; j <= p.J; ++j) {
      cmin = std::min(cmin, (L.logM(j, k) - L.logN(j - 1, k)) / logA);
      cmin = std::min(cmin, (L.logN(j, k) - L.logM(j, k)) / logA);
    }
    cmin = std::min(cmin, (L.logM(1, k) - L.logN(p.J, k - 1)) / logA);
    cmin = std::min(cmin, (L.logN(1, k) - L.logM(1, k)) / logA);
  }
  if (p.K >= 1) {
    cert.c_max = cmin;
    add("N_M_ordering_chain", cmin, true);
  }

  double ellm = std::numeric_limits<double>::infinity();
  double tlo = std::numeric_limits<double>::infinity();
  double thi = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= p.K; ++k) {
    ellm = std::min(ellm, -L.log_ell(k) - L.logN(p.J, k));
    tlo = std::min(tlo, L.log_t(k) + 2.0 * L.logN(1, k + 1));
    thi = std::min(thi, -3.0 * L.logN(p.J, k) - L.log_t(k));
  }
  add("ell_k_le_1/N_Jk", ellm, true);
  add("t_k_gt_N_{1,k+1}^-2", tlo, true);
  add("t_k_lt_N_{J,k}^-3", thi, true);
  (void)tag;
  return cert;
}

void require_resolvable(const FrequencyLadder& L, const Grid2D& g, int K) {
  if (L.params.mode != LadderMode::Field) throw std::logic_error("fields are synthesized in field mode only");
  const long long top = L.N(L.params.J, K);
  if (4 * top > g.n()) {
    throw GridOverflow("level " + std::to_string(K) + " needs nx >= 4 N_{J,K} = " + std::to_string(4 * top) +
                       ", grid has " + std::to_string(g.n()));
  }
}

}  // namespace ictk
