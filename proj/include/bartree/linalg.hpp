#pragma once

#include <array>
#include <cmath>

#include "bartree/errors.hpp"

// Fixed-size 2x2 / 4x4 algebra. Every solve in the library reduces to
// explicit 2x2 determinant formulas.

namespace bartree {

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;

struct Mat2 {
  std::array<std::array<double, 2>, 2> m{};

  static Mat2 identity() { return {{{{1.0, 0.0}, {0.0, 1.0}}}}; }
  static Mat2 diag(double d0, double d1) { return {{{{d0, 0.0}, {0.0, d1}}}}; }
  static Mat2 symmetric(double a00, double a01, double a11) { return {{{{a00, a01}, {a01, a11}}}}; }

  double operator()(int i, int j) const { return m[i][j]; }
  double& operator()(int i, int j) { return m[i][j]; }

  double trace() const { return m[0][0] + m[1][1]; }
  double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
  Mat2 transpose() const { return {{{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}}; }

  /// Inverse by the adjugate formula; throws when |det| <= pivot_tol.
  Mat2 inverse(double pivot_tol = 0.0) const;

  friend Mat2 operator+(const Mat2& a, const Mat2& b);
  friend Mat2 operator-(const Mat2& a, const Mat2& b);
  friend Mat2 operator*(const Mat2& a, const Mat2& b);
  friend Mat2 operator*(double s, const Mat2& a);
  friend Vec2 operator*(const Mat2& a, const Vec2& v);
};

Mat2 operator+(const Mat2& a, const Mat2& b);
Mat2 operator-(const Mat2& a, const Mat2& b);
Mat2 operator*(const Mat2& a, const Mat2& b);
Mat2 operator*(double s, const Mat2& a);
Vec2 operator*(const Mat2& a, const Vec2& v);

/// Solve a x = rhs; DegeneracyError when |det a| <= pivot_tol.
Vec2 solve(const Mat2& a, const Vec2& rhs, double pivot_tol = 0.0);

/// Smallest eigenvalue of a symmetric 2x2 matrix.
double min_eigenvalue_sym(const Mat2& a);

/// Leading-principal-minor test with tolerance.
bool is_positive_definite(const Mat2& a, double tol = 1e-12);

/// Inverse square root of a symmetric positive definite 2x2 matrix.
Mat2 inverse_sqrt_spd(const Mat2& a);

struct Mat4 {
  std::array<std::array<double, 4>, 4> m{};

  double operator()(int i, int j) const { return m[i][j]; }
  double& operator()(int i, int j) { return m[i][j]; }

  static Mat4 block(const Mat2& a, const Mat2& b, const Mat2& c, const Mat2& d);
  static Mat4 block_diag(const Mat2& a, const Mat2& d) { return block(a, Mat2{}, Mat2{}, d); }

  Mat2 sub(int bi, int bj) const;
  Mat4 transpose() const;
  double max_asymmetry() const;

  friend Mat4 operator*(const Mat4& a, const Mat4& b);
  friend Vec4 operator*(const Mat4& a, const Vec4& v);
};

Mat4 operator*(const Mat4& a, const Mat4& b);
Vec4 operator*(const Mat4& a, const Vec4& v);

double dot(const Vec4& a, const Vec4& b);

}  // namespace bartree
