#pragma once

// Reference computations used by the tests. Each one is written from the
// defining formulas, independently of the library code it checks.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "heisfan/spectrum.hpp"

namespace oracle {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline const double kC = std::sqrt(2.0 * kPi);

/// Orthonormal Hermite function from std::hermite (physicists' polynomials).
inline double hermite_function(int n, double x)
{
  double log_norm = 0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0) + 0.5 * std::log(kPi));
  return std::hermite(static_cast<unsigned>(n), x) * std::exp(-0.5 * x * x - log_norm);
}

/// Zak mode of level n, frequency alpha, sector r, summing every centre within
/// `reach` periods of x.
inline std::complex<double> zak_mode(int n, std::int64_t alpha, int sector, double x, double y, double z, int reach = 40)
{
  const double a = static_cast<double>(alpha);
  const double abs_a = std::abs(a);
  const double norm = std::pow(abs_a, 0.25) * std::pow(2.0 * kPi, -0.75);
  const auto period = static_cast<std::int64_t>(std::llabs(alpha));
  // centres c j / alpha sit near x when j ~ alpha x / c
  const auto j0 = static_cast<std::int64_t>(std::floor(a * x / kC));
  std::complex<double> sum = 0.0;
  for (std::int64_t j = j0 - reach * period; j <= j0 + reach * period; ++j) {
    if (((j - sector) % period + period) % period != 0) continue;
    const double u = std::sqrt(abs_a) * (x - kC * static_cast<double>(j) / a);
    sum += std::polar(hermite_function(n, u), kC * static_cast<double>(j) * y);
  }
  return norm * std::polar(1.0, a * z) * sum;
}

inline std::complex<double> fourier_mode(std::int64_t k, std::int64_t l, double x, double y)
{
  return std::polar(1.0 / (2.0 * kPi), kC * (static_cast<double>(k) * x + static_cast<double>(l) * y));
}

/// Single-copy multiplicities by direct count: every (n, alpha != 0) with
/// (2n+1)|alpha| <= cutoff contributes |alpha| at that integer, every (k, l)
/// contributes 1 at 2pi(k^2 + l^2).
inline std::map<heisfan::EigenKey, std::uint64_t> h1_multiplicities(double cutoff)
{
  std::map<heisfan::EigenKey, std::uint64_t> out;
  const auto top = static_cast<std::int64_t>(std::floor(cutoff));
  for (std::int64_t a = 1; a <= top; ++a)
    for (std::int64_t odd = 1; odd * a <= top; odd += 2) out[{odd * a, 0}] += 2 * static_cast<std::uint64_t>(a);
  const auto r = static_cast<std::int64_t>(std::sqrt(cutoff / (2.0 * kPi))) + 1;
  for (std::int64_t k = -r; k <= r; ++k)
    for (std::int64_t l = -r; l <= r; ++l)
      if (2.0 * kPi * static_cast<double>(k * k + l * l) <= cutoff) out[{0, k * k + l * l}] += 1;
  return out;
}

/// Label counts (not weighted) per eigenvalue on one copy.
inline std::map<heisfan::EigenKey, std::uint64_t> h1_label_counts(double cutoff)
{
  std::map<heisfan::EigenKey, std::uint64_t> out;
  const auto top = static_cast<std::int64_t>(std::floor(cutoff));
  for (std::int64_t a = 1; a <= top; ++a)
    for (std::int64_t odd = 1; odd * a <= top; odd += 2) out[{odd * a, 0}] += 2;
  const auto r = static_cast<std::int64_t>(std::sqrt(cutoff / (2.0 * kPi))) + 1;
  for (std::int64_t k = -r; k <= r; ++k)
    for (std::int64_t l = -r; l <= r; ++l)
      if (2.0 * kPi * static_cast<double>(k * k + l * l) <= cutoff) out[{0, k * k + l * l}] += 1;
  return out;
}

/// Two-copy table by pairwise sums of the one-copy table.
inline std::map<heisfan::EigenKey, std::uint64_t> convolve(const std::map<heisfan::EigenKey, std::uint64_t>& a,
                                                          const std::map<heisfan::EigenKey, std::uint64_t>& b,
                                                          double cutoff)
{
  std::map<heisfan::EigenKey, std::uint64_t> out;
  for (const auto& [ka, ma] : a)
    for (const auto& [kb, mb] : b) {
      const heisfan::EigenKey s{ka.integer_part + kb.integer_part, ka.two_pi_part + kb.two_pi_part};
      if (static_cast<double>(s.integer_part) + 2.0 * kPi * static_cast<double>(s.two_pi_part) <= cutoff + 1e-9)
        out[s] += ma * mb;
    }
  return out;
}

/// Integral of f over [0, c)^2 by the midpoint rule on an n x n grid.
inline std::complex<double> midpoint_xy(const std::function<std::complex<double>(double, double)>& f, int n)
{
  const double h = kC / n;
  std::complex<double> total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) total += f((i + 0.5) * h, (j + 0.5) * h);
  return total * h * h;
}

/// Integral over one fundamental cube of e^{i(c(px x + py y) + pz z)} f conj(g)
/// by the midpoint rule: n points per planar axis and nz points in z.
inline std::complex<double> cube_integral(const std::function<std::complex<double>(double, double, double)>& f,
                                          const std::function<std::complex<double>(double, double, double)>& g,
                                          int px, int py, int pz, int n, int nz)
{
  const double h = kC / n;
  const double hz = 2.0 * kPi / nz;
  std::complex<double> total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      const double y = (j + 0.5) * h;
      for (int k = 0; k < nz; ++k) {
        const double z = (k + 0.5) * hz;
        total += std::polar(1.0, kC * (px * x + py * y) + pz * z) * f(x, y, z) * std::conj(g(x, y, z));
      }
    }
  }
  return total * h * h * hz;
}

/// Recursive bisection of the standard simplex written on vertex lists:
/// split the edge (v_0, v_k), k cycling d, d-1, ..., 1.
struct Simplex
{
  std::vector<std::vector<double>> v;  // vertices in barycentric coordinates
  int tag = 0;
};

inline std::pair<Simplex, Simplex> bisect(const Simplex& s)
{
  const int d = static_cast<int>(s.v.size()) - 1;
  const int k = s.tag;
  std::vector<double> mid(s.v[0].size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (s.v[0][i] + s.v[static_cast<std::size_t>(k)][i]);
  // lower child keeps v_0: (v_0, ..., v_{k-1}, mid, v_{k+1}, ..., v_d)
  Simplex lower, upper;
  lower.v = s.v;
  lower.v[static_cast<std::size_t>(k)] = mid;
  // upper child keeps v_k: (v_1, ..., v_k, mid, v_{k+1}, ..., v_d)
  for (int i = 1; i <= k; ++i) upper.v.push_back(s.v[static_cast<std::size_t>(i)]);
  upper.v.push_back(mid);
  for (int i = k + 1; i <= d; ++i) upper.v.push_back(s.v[static_cast<std::size_t>(i)]);
  const int next = k == 1 ? d : k - 1;
  lower.tag = next;
  upper.tag = next;
  return {lower, upper};
}

/// Barycentric coordinates of p relative to the vertices of s (Gaussian elimination).
inline std::vector<double> barycentric(const Simplex& s, const std::vector<double>& p)
{
  const std::size_t n = s.v.size();
  // Solve sum_i mu_i v_i = p with sum_i mu_i = 1 using the first n-1 coordinates.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r + 1 < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r][c] = s.v[c][r];
    a[r][n] = p[r];
  }
  for (std::size_t c = 0; c < n; ++c) a[n - 1][c] = 1.0;
  a[n - 1][n] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = a[i][n] / a[i][i];
  return mu;
}

inline bool contains(const Simplex& s, const std::vector<double>& p, double tol)
{
  for (double m : barycentric(s, p))
    if (m < -tol) return false;
  return true;
}

/// 64-bit FNV-1a digest of a byte string.
inline std::uint64_t fnv1a(const std::string& bytes)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace oracle
