#pragma once

// Fixed-size, row-major dense matrices sized for a 9-state / 3-measurement
// filter. Everything lives on the stack; no dynamic dimensioning.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>

namespace fidtrack {

template <std::size_t Rows, std::size_t Cols>
struct Matrix {
  static constexpr std::size_t rows = Rows;
  static constexpr std::size_t cols = Cols;

  std::array<double, Rows * Cols> data{};

  constexpr double& operator()(std::size_t r, std::size_t c) { return data[r * Cols + c]; }
  constexpr double operator()(std::size_t r, std::size_t c) const { return data[r * Cols + c]; }

  // Vector-style access for column vectors.
  constexpr double& operator[](std::size_t i) { return data[i]; }
  constexpr double operator[](std::size_t i) const { return data[i]; }

  static constexpr Matrix zero() { return Matrix{}; }

  static constexpr Matrix identity() requires(Rows == Cols) {
    Matrix m{};
    for (std::size_t i = 0; i < Rows; ++i) m(i, i) = 1.0;
    return m;
  }

  static constexpr Matrix diagonal(const std::array<double, Rows>& d) requires(Rows == Cols) {
    Matrix m{};
    for (std::size_t i = 0; i < Rows; ++i) m(i, i) = d[i];
    return m;
  }

  // Row-major list, mostly for tests.
  static constexpr Matrix from(std::initializer_list<double> values) {
    Matrix m{};
    std::size_t i = 0;
    for (double v : values) {
      if (i == Rows * Cols) break;
      m.data[i++] = v;
    }
    return m;
  }

  friend constexpr bool operator==(const Matrix&, const Matrix&) = default;
};

template <std::size_t N>
using Vector = Matrix<N, 1>;

using Mat3 = Matrix<3, 3>;
using Mat9 = Matrix<9, 9>;
using Mat3x9 = Matrix<3, 9>;
using Mat9x3 = Matrix<9, 3>;

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator+(Matrix<R, C> a, const Matrix<R, C>& b) {
  for (std::size_t i = 0; i < R * C; ++i) a.data[i] += b.data[i];
  return a;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator-(Matrix<R, C> a, const Matrix<R, C>& b) {
  for (std::size_t i = 0; i < R * C; ++i) a.data[i] -= b.data[i];
  return a;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator*(Matrix<R, C> a, double s) {
  for (double& v : a.data) v *= s;
  return a;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<R, C> operator*(double s, Matrix<R, C> a) {
  return a * s;
}

template <std::size_t R, std::size_t K, std::size_t C>
constexpr Matrix<R, C> operator*(const Matrix<R, K>& a, const Matrix<K, C>& b) {
  Matrix<R, C> out{};
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < C; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

template <std::size_t R, std::size_t C>
constexpr Matrix<C, R> transpose(const Matrix<R, C>& m) {
  Matrix<C, R> out{};
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out(j, i) = m(i, j);
  return out;
}

// (M + Mᵀ) / 2
template <std::size_t N>
constexpr Matrix<N, N> symmetrize(const Matrix<N, N>& m) {
  Matrix<N, N> out{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return out;
}

template <std::size_t N>
constexpr double trace(const Matrix<N, N>& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < N; ++i) t += m(i, i);
  return t;
}

// Maximum absolute row sum.
template <std::size_t R, std::size_t C>
double inf_norm(const Matrix<R, C>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < R; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < C; ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

template <std::size_t R, std::size_t C>
bool all_finite(const Matrix<R, C>& m) {
  return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
template <std::size_t N>
class Cholesky {
 public:
  // Returns nullopt when the matrix is not numerically positive definite.
  static std::optional<Cholesky> factor(const Matrix<N, N>& a) {
    Cholesky c;
    for (std::size_t j = 0; j < N; ++j) {
      double d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= c.l_(j, k) * c.l_(j, k);
      if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
      const double ljj = std::sqrt(d);
      c.l_(j, j) = ljj;
      for (std::size_t i = j + 1; i < N; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= c.l_(i, k) * c.l_(j, k);
        c.l_(i, j) = s / ljj;
      }
    }
    return c;
  }

  const Matrix<N, N>& lower() const { return l_; }

  // Solves A·X = B column by column.
  template <std::size_t M>
  Matrix<N, M> solve(const Matrix<N, M>& b) const {
    Matrix<N, M> x = b;
    for (std::size_t col = 0; col < M; ++col) {
      for (std::size_t i = 0; i < N; ++i) {
        double s = x(i, col);
        for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * x(k, col);
        x(i, col) = s / l_(i, i);
      }
      for (std::size_t ii = N; ii-- > 0;) {
        double s = x(ii, col);
        for (std::size_t k = ii + 1; k < N; ++k) s -= l_(k, ii) * x(k, col);
        x(ii, col) = s / l_(ii, ii);
      }
    }
    return x;
  }

 private:
  Matrix<N, N> l_{};
};

// Small 3-vector with named components; used for positions (mm) and their
// derivatives.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
constexpr Vec3 operator*(double s, const Vec3& a) { return a * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

constexpr Vector<3> to_column(const Vec3& v) { return Vector<3>::from({v.x, v.y, v.z}); }
constexpr Vec3 to_vec3(const Vector<3>& v) { return {v[0], v[1], v[2]}; }

constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
          m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
          m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

}  // namespace fidtrack
