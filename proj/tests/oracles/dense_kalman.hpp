#pragma once

// Loop-based reference for the constant-velocity filter. Deliberately shares
// no code with the library beyond reading the noise matrices.

#include <array>
#include <cstddef>
#include <cmath>
#include <stdexcept>

#include "motrack/kalman.hpp"

namespace oracle {

template <std::size_t R, std::size_t C>
using Mat = std::array<std::array<double, C>, R>;

template <std::size_t R, std::size_t K, std::size_t C>
Mat<R, C> mul(const Mat<R, K>& a, const Mat<K, C>& b) {
  Mat<R, C> out{};
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  return out;
}

template <std::size_t R, std::size_t C>
Mat<C, R> transpose(const Mat<R, C>& a) {
  Mat<C, R> out{};
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out[j][i] = a[i][j];
  return out;
}

template <std::size_t R, std::size_t C>
Mat<R, C> add(const Mat<R, C>& a, const Mat<R, C>& b, double sign = 1.0) {
  Mat<R, C> out{};
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out[i][j] = a[i][j] + sign * b[i][j];
  return out;
}

// Gauss-Jordan with partial pivoting.
template <std::size_t N>
Mat<N, N> inverse(Mat<N, N> a) {
  Mat<N, N> inv{};
  for (std::size_t i = 0; i < N; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < N; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < N; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

template <std::size_t R, std::size_t C, typename E>
Mat<R, C> from_eigen(const E& m) {
  Mat<R, C> out{};
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out[i][j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

struct DenseState {
  Mat<7, 1> x{};
  Mat<7, 7> P{};
};

inline DenseState from_state(const motrack::KalmanState& s) {
  return {from_eigen<7, 1>(s.x), from_eigen<7, 7>(s.P)};
}

inline Mat<7, 7> transition() {
  Mat<7, 7> F{};
  for (int i = 0; i < 7; ++i) F[i][i] = 1.0;
  F[0][4] = F[1][5] = F[2][6] = 1.0;
  return F;
}

inline Mat<4, 7> observation() {
  Mat<4, 7> H{};
  for (int i = 0; i < 4; ++i) H[i][i] = 1.0;
  return H;
}

inline DenseState predict(DenseState s, const Mat<7, 7>& Q) {
  if (s.x[2][0] + s.x[6][0] <= 0.0) s.x[6][0] = 0.0;
  const auto F = transition();
  s.x = mul<7, 7, 1>(F, s.x);
  s.P = add(mul<7, 7, 7>(mul<7, 7, 7>(F, s.P), transpose(F)), Q);
  return s;
}

inline DenseState update(const DenseState& s, const std::array<double, 4>& z,
                         const Mat<4, 4>& R) {
  const auto H = observation();
  const auto Ht = transpose(H);
  const auto hx = mul<4, 7, 1>(H, s.x);
  Mat<4, 1> y{};
  for (int i = 0; i < 4; ++i) y[i][0] = z[i] - hx[i][0];
  const auto S = add(mul<4, 7, 4>(mul<4, 7, 7>(H, s.P), Ht), R);
  const auto K = mul<7, 4, 4>(mul<7, 7, 4>(s.P, Ht), inverse<4>(S));
  DenseState out;
  out.x = add(s.x, mul<7, 4, 1>(K, y));
  Mat<7, 7> I{};
  for (int i = 0; i < 7; ++i) I[i][i] = 1.0;
  out.P = mul<7, 7, 7>(add(I, mul<7, 4, 7>(K, H), -1.0), s.P);
  return out;
}

}  // namespace oracle
