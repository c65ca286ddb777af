#include "ictk/geometry.hpp"

#include <cmath>
#include <numeric>

namespace ictk {

double Sym2::frobenius() const { return std::sqrt(a11 * a11 + a22 * a22 + 2.0 * a12 * a12); }

DirectionSets build_direction_sets() {
  DirectionSets s;
  s.lambda_u = {{3, 4, 5}, {4, 3, 5}, {3, -4, 5}, {4, -3, 5}};
  s.lambda_b = s.lambda_u;
  for (const auto& d : s.lambda_u) s.lambda_b.push_back(-d);
  s.lambda_b.push_back({1, 0, 1});
  s.lambda_b.push_back({-1, 0, 1});
  s.lambda_b.push_back({0, 1, 1});
  s.lambda_b.push_back({0, -1, 1});
  s.joint = s.lambda_u;
  s.joint.insert(s.joint.end(), s.lambda_b.begin(), s.lambda_b.end());
  s.J = static_cast<int>(s.joint.size());
  s.m_star = 1;
  for (const auto& d : s.joint) s.m_star = std::lcm(s.m_star, d.d);
  return s;
}

const DirectionSets& direction_sets() {
  static const DirectionSets s = build_direction_sets();
  return s;
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// isometric coordinates for Sym(2) under the Frobenius inner product
std::array<double, 3> coords(const Sym2& R) { return {R.a11, R.a22, kSqrt2 * R.a12}; }

struct RightInverse {
  std::array<std::array<double, 3>, 4> L{};
  double eps = 0.0;
};

RightInverse build_right_inverse() {
  const auto& dirs = direction_sets().lambda_u;
  std::array<std::array<double, 3>, 4> t{};
  for (int a = 0; a < 4; ++a) t[a] = coords(Sym2::outer(dirs[a].perp()));
  double G[3][3] = {};
  for (int a = 0; a < 4; ++a)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) G[r][c] += t[a][r] * t[a][c];
  // 3x3 inverse by cofactors
  const double det = G[0][0] * (G[1][1] * G[2][2] - G[1][2] * G[2][1]) -
                     G[0][1] * (G[1][0] * G[2][2] - G[1][2] * G[2][0]) +
                     G[0][2] * (G[1][0] * G[2][1] - G[1][1] * G[2][0]);
  double Gi[3][3];
  Gi[0][0] = (G[1][1] * G[2][2] - G[1][2] * G[2][1]) / det;
  Gi[0][1] = (G[0][2] * G[2][1] - G[0][1] * G[2][2]) / det;
  Gi[0][2] = (G[0][1] * G[1][2] - G[0][2] * G[1][1]) / det;
  Gi[1][0] = (G[1][2] * G[2][0] - G[1][0] * G[2][2]) / det;
  Gi[1][1] = (G[0][0] * G[2][2] - G[0][2] * G[2][0]) / det;
  Gi[1][2] = (G[0][2] * G[1][0] - G[0][0] * G[1][2]) / det;
  Gi[2][0] = (G[1][0] * G[2][1] - G[1][1] * G[2][0]) / det;
  Gi[2][1] = (G[0][1] * G[2][0] - G[0][0] * G[2][1]) / det;
  Gi[2][2] = (G[0][0] * G[1][1] - G[0][1] * G[1][0]) / det;
  RightInverse ri;
  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    double n2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int r = 0; r < 3; ++r) s += t[a][r] * Gi[r][c];
      ri.L[a][c] = s;
      n2 += s * s;
    }
    worst = std::max(worst, std::sqrt(n2));
  }
  // c_eta(Id) = 1/2 for every direction, so positivity holds while |L_eta| |R - Id| < 1/2
  const auto id = coords(Sym2::identity());
  double cmin = 1e300;
  for (int a = 0; a < 4; ++a) cmin = std::min(cmin, ri.L[a][0] * id[0] + ri.L[a][1] * id[1] + ri.L[a][2] * id[2]);
  ri.eps = cmin / worst;
  return ri;
}

const RightInverse& right_inverse() {
  static const RightInverse ri = build_right_inverse();
  return ri;
}

}  // namespace

double eps_u() { return right_inverse().eps; }

const std::array<std::array<double, 3>, 4>& sym_right_inverse() { return right_inverse().L; }

std::array<double, 4> SymDecomp::gammas() const {
  std::array<double, 4> g{};
  for (int a = 0; a < 4; ++a) g[a] = std::sqrt(coeffs[a]);
  return g;
}

SymDecomp sym_decompose(const Sym2& R) {
  const RightInverse& ri = right_inverse();
  const double dist = (R - Sym2::identity()).frobenius();
  if (!(dist <= ri.eps)) throw OutOfBall(dist, ri.eps);
  const auto r = coords(R);
  SymDecomp s;
  s.ball_radius = ri.eps;
  for (int a = 0; a < 4; ++a) s.coeffs[a] = ri.L[a][0] * r[0] + ri.L[a][1] * r[1] + ri.L[a][2] * r[2];
  return s;
}

TVDecomp tv_decompose(const Sym2& R, Vec2 g) {
  const SymDecomp s = sym_decompose(R);
  TVDecomp t;
  for (int a = 0; a < 4; ++a) {
    const double A = std::sqrt(std::max(s.coeffs[a], 0.0));
    t.gammas[a] = A / kSqrt2;
    t.gammas[a + 4] = A / kSqrt2;
  }
  t.M = 1.0 + g.x * g.x + g.y * g.y;
  t.s1 = std::sqrt(2.0 * t.M - g.x * g.x);
  t.s2 = std::sqrt(2.0 * t.M - g.y * g.y);
  const double alpha1 = (-g.x - t.s1) / 2.0;
  const double beta1 = (g.x - t.s1) / 2.0;
  const double alpha2 = (g.y + t.s2) / 2.0;
  const double beta2 = (t.s2 - g.y) / 2.0;
  t.gammas[8] = alpha2;   // e1
  t.gammas[9] = beta2;    // -e1
  t.gammas[10] = alpha1;  // e2
  t.gammas[11] = beta1;   // -e2
  t.pressure = -t.M;
  return t;
}

Sym2 sym_reconstruct(const SymDecomp& s) {
  const auto& dirs = direction_sets().lambda_u;
  Sym2 out;
  for (int a = 0; a < 4; ++a) out = out + Sym2::outer(dirs[a].perp()) * s.coeffs[a];
  return out;
}

Sym2 tv_tensor_sum(const TVDecomp& t) {
  const auto& dirs = direction_sets().lambda_b;
  Sym2 out;
  for (int m = 0; m < 12; ++m) out = out + Sym2::outer(dirs[m].perp()) * (t.gammas[m] * t.gammas[m]);
  return out;
}

Vec2 tv_vector_sum(const TVDecomp& t) {
  const auto& dirs = direction_sets().lambda_b;
  Vec2 out;
  for (int m = 0; m < 12; ++m) {
    const Vec2 p = dirs[m].perp();
    out.x += t.gammas[m] * p.x;
    out.y += t.gammas[m] * p.y;
  }
  return out;
}

}  // namespace ictk
