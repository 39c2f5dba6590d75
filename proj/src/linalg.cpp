#include "bartree/linalg.hpp"

#include <algorithm>

namespace bartree {

Mat2 Mat2::inverse(double pivot_tol) const {
  const double d = det();
  if (!(std::abs(d) > pivot_tol)) throw DegeneracyError("singular 2x2 matrix");
  return {{{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}}};
}

Mat2 operator+(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
  return r;
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
  return r;
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
  return r;
}

Mat2 operator*(double s, const Mat2& a) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
  return r;
}

Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a.m[0][0] * v[0] + a.m[0][1] * v[1], a.m[1][0] * v[0] + a.m[1][1] * v[1]};
}

Vec2 solve(const Mat2& a, const Vec2& rhs, double pivot_tol) {
  const double d = a.det();
  if (!(std::abs(d) > pivot_tol)) throw DegeneracyError("singular 2x2 linear system");
  return {(a.m[1][1] * rhs[0] - a.m[0][1] * rhs[1]) / d, (a.m[0][0] * rhs[1] - a.m[1][0] * rhs[0]) / d};
}

double min_eigenvalue_sym(const Mat2& a) {
  const double half_gap = 0.5 * (a.m[0][0] - a.m[1][1]);
  return 0.5 * a.trace() - std::hypot(half_gap, a.m[0][1]);
}

bool is_positive_definite(const Mat2& a, double tol) { return a.m[0][0] > tol && a.det() > tol; }

Mat2 inverse_sqrt_spd(const Mat2& a) {
  if (!is_positive_definite(a, 0.0)) throw DegeneracyError("matrix square root of a non positive definite matrix");
  const double s = std::sqrt(a.det());
  const double t = std::sqrt(a.trace() + 2.0 * s);
  const Mat2 root = (1.0 / t) * (a + s * Mat2::identity());
  return root.inverse();
}

Mat4 Mat4::block(const Mat2& a, const Mat2& b, const Mat2& c, const Mat2& d) {
  Mat4 r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r.m[i][j] = a.m[i][j];
      r.m[i][j + 2] = b.m[i][j];
      r.m[i + 2][j] = c.m[i][j];
      r.m[i + 2][j + 2] = d.m[i][j];
    }
  }
  return r;
}

Mat2 Mat4::sub(int bi, int bj) const {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = m[2 * bi + i][2 * bj + j];
  return r;
}

Mat4 Mat4::transpose() const {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.m[i][j] = m[j][i];
  return r;
}

double Mat4::max_asymmetry() const {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(m[i][j] - m[j][i]));
  return worst;
}

Mat4 operator*(const Mat4& a, const Mat4& b) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

Vec4 operator*(const Mat4& a, const Vec4& v) {
  Vec4 r{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) r[i] += a.m[i][k] * v[k];
  return r;
}

double dot(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace bartree
