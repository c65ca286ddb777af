#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace ictk {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

// symmetric 2x2 matrix (a11, a22, a12)
struct Sym2 {
  double a11 = 0.0, a22 = 0.0, a12 = 0.0;

  static Sym2 identity() { return {1.0, 1.0, 0.0}; }
  static Sym2 outer(Vec2 v) { return {v.x * v.x, v.y * v.y, v.x * v.y}; }
  Sym2 operator+(const Sym2& o) const { return {a11 + o.a11, a22 + o.a22, a12 + o.a12}; }
  Sym2 operator-(const Sym2& o) const { return {a11 - o.a11, a22 - o.a22, a12 - o.a12}; }
  Sym2 operator*(double s) const { return {a11 * s, a22 * s, a12 * s}; }
  double frobenius() const;
};

// unit vector (p, q)/d with p^2 + q^2 = d^2
struct Direction {
  int p = 0, q = 0, d = 1;

  Vec2 eta() const { return {static_cast<double>(p) / d, static_cast<double>(q) / d}; }
  Vec2 perp() const { return {static_cast<double>(-q) / d, static_cast<double>(p) / d}; }
  Direction operator-() const { return {-p, -q, d}; }
};

struct DirectionSets {
  std::vector<Direction> lambda_u;  // 4
  std::vector<Direction> lambda_b;  // 12: lambda_u, -lambda_u, e1, -e1, e2, -e2
  std::vector<Direction> joint;     // lambda_u followed by lambda_b; joint index j = 1..J
  int J = 0;
  int m_star = 1;

  bool is_u(int j) const { return j >= 1 && j <= static_cast<int>(lambda_u.size()); }
  // position of joint index j inside lambda_u or lambda_b
  int local(int j) const { return is_u(j) ? j - 1 : j - 1 - static_cast<int>(lambda_u.size()); }
  const Direction& dir(int j) const { return joint.at(j - 1); }
};

const DirectionSets& direction_sets();
DirectionSets build_direction_sets();

class OutOfBall : public std::domain_error {
 public:
  OutOfBall(double dist, double radius)
      : std::domain_error("symmetric input outside the admissible ball: |R - Id|_F = " + std::to_string(dist) +
                          " > " + std::to_string(radius)),
        distance(dist),
        margin(radius - dist) {}
  double distance;
  double margin;
};

struct SymDecomp {
  std::array<double, 4> coeffs{};  // c_eta = Gamma_eta^2 over lambda_u
  double ball_radius = 0.0;
  std::array<double, 4> gammas() const;
};

struct TVDecomp {
  std::array<double, 12> gammas{};  // signed, ordered as lambda_b
  double pressure = 0.0;
  double M = 0.0;
  double s1 = 0.0, s2 = 0.0;
};

// radius of the Frobenius ball around Id on which every coefficient stays positive
double eps_u();
// rows of the minimal-norm right inverse in (a11, a22, sqrt2 a12) coordinates
const std::array<std::array<double, 3>, 4>& sym_right_inverse();

SymDecomp sym_decompose(const Sym2& R);
TVDecomp tv_decompose(const Sym2& R, Vec2 g);

// reconstruction helpers
Sym2 sym_reconstruct(const SymDecomp& s);
Sym2 tv_tensor_sum(const TVDecomp& t);
Vec2 tv_vector_sum(const TVDecomp& t);

}  // namespace ictk
