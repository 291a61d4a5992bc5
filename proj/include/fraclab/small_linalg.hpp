// Fixed-capacity vectors/matrices for the ambient dimensions used here
// (points live in R^n or R^{n+1} with n <= 3).
#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>

namespace fraclab {

inline constexpr int kMaxDim = 4;

struct Vec {
  int dim = 0;
  std::array<double, kMaxDim> c{};

  Vec() = default;
  explicit Vec(int d) : dim(d) { assert(d >= 0 && d <= kMaxDim); }
  Vec(std::initializer_list<double> xs) : dim(static_cast<int>(xs.size())) {
    assert(dim <= kMaxDim);
    int i = 0;
    for (double x : xs) c[i++] = x;
  }

  double& operator[](int i) { return c[static_cast<size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim; ++i) c[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  bool operator==(const Vec& o) const {
    if (dim != o.dim) return false;
    for (int i = 0; i < dim; ++i)
      if (c[i] != o.c[i]) return false;
    return true;
  }
};

inline double dot(const Vec& a, const Vec& b) {
  assert(a.dim == b.dim);
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a.c[i] * b.c[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline bool all_finite(const Vec& a) {
  for (int i = 0; i < a.dim; ++i)
    if (!std::isfinite(a.c[i])) return false;
  return true;
}

// Row-major matrix, rows/cols <= kMaxDim.
struct Mat {
  int rows = 0, cols = 0;
  std::array<double, kMaxDim * kMaxDim> a{};

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c) {
    assert(r >= 0 && r <= kMaxDim && c >= 0 && c <= kMaxDim);
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i * cols + j)]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i * cols + j)]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Vec apply(const Mat& m, const Vec& x) {
  assert(m.cols == x.dim);
  Vec y(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline Vec apply_transpose(const Mat& m, const Vec& x) {
  assert(m.rows == x.dim);
  Vec y(m.cols);
  for (int j = 0; j < m.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < m.rows; ++i) s += m(i, j) * x[i];
    y[j] = s;
  }
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  assert(a.cols == b.rows);
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  assert(a.rows == b.rows && a.cols == b.cols);
  double m = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace fraclab
