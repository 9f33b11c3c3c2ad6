#pragma once

#include <string>
#include <utility>
#include <vector>

#include "heisfan/eigenfunctions.hpp"

namespace heisfan {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
struct GaussLegendre
{
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);

/// Per-copy frequency (p_x, p_y, p_z) of the monomial e^{i(sqrt(2pi)(p_x x + p_y y) + p_z z)}.
struct Frequency
{
  int px = 0;
  int py = 0;
  int pz = 0;

  bool zero() const { return px == 0 && py == 0 && pz == 0; }
  friend auto operator<=>(const Frequency&, const Frequency&) = default;
};

/// Weighted sum of plane waves on the fundamental cube of each copy.
///
/// Weights satisfy sum |w| <= 1, so the function is bounded by 1.
struct Monomial
{
  Complex weight{1.0, 0.0};
  std::vector<Frequency> freq;  ///< one per copy
};

class TestFunction
{
 public:
  TestFunction() = default;
  TestFunction(std::string name, int m, std::vector<Monomial> monomials);

  static TestFunction constant(int m);
  static TestFunction plane_wave(int m, const std::vector<Frequency>& freq, std::string name = {});
  /// cos and sin of sqrt(2pi)(p_x x + p_y y) + p_z z summed over copies.
  static TestFunction cosine(int m, const std::vector<Frequency>& freq, std::string name = {});
  static TestFunction sine(int m, const std::vector<Frequency>& freq, std::string name = {});
  /// Pointwise product.
  static TestFunction product(const TestFunction& a, const TestFunction& b);

  /// Composition with the flow advancing z_j by t s_j; each monomial picks up
  /// the phase e^{i t sum_j s_j p_z_j}.
  TestFunction after_flow(const SimplexPoint& s, double t) const;

  const std::string& name() const { return name_; }
  int m() const { return m_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  double sup_bound() const;
  Complex eval(const ProductPoint& q) const;

 private:
  std::string name_;
  int m_ = 0;
  std::vector<Monomial> monomials_;
};

/// Parses "cos(z1-z2)", "sin(x1)", "cos(2x1+y1)", "1", "exp(z1)" and products joined by '*'.
TestFunction parse_test_function(const std::string& text, int m);

/// y-Fourier coefficients of a copy function at fixed x: f(x,y,0) = sum_j e^{i sqrt(2pi) j y} F_j(x).
/// Landau terms with centres beyond the truncation window are omitted.
void y_coefficients(const CopyMode& f, double x, std::vector<std::pair<std::int64_t, Complex>>& out);

struct QuadratureOptions
{
  int nodes_per_panel = 16;
  /// Flag the x-integral when the P and 2P panel results differ by more than this.
  double richardson_tol = 1e-6;
  /// Extra panel multiplier for difficult integrands.
  int panel_scale = 1;
};

struct Integral
{
  Complex value{0.0, 0.0};
  double error = 0.0;  ///< |I(2P) - I(P)|
  bool converged = true;
};

/// Integral over the fundamental domain of one copy of
/// e^{i(sqrt(2pi)(p_x x + p_y y) + p_z z)} f conj(g).
///
/// The z and y integrals are exact (frequency matching); x uses composite
/// Gauss-Legendre, checked by doubling the panel count.
Integral copy_overlap(const CopyMode& f, const CopyMode& g, const Frequency& freq, const QuadratureOptions& opt = {});

/// Integral of a(q) phi(q) conj(psi(q)) over the product of fundamental domains,
/// assembled copy by copy.
Integral integrate_product(const QuotientEigenfunction& phi, const QuotientEigenfunction& psi, const TestFunction& a,
                           const QuadratureOptions& opt = {});

/// ∫_0^{sqrt(2pi)} F(x) dx by composite Gauss-Legendre with the given panel count.
template <typename F>
auto integrate_x(F&& f, int panels, int nodes_per_panel)
{
  const auto& gl = gauss_legendre(nodes_per_panel);
  const double h = kSqrtTwoPi / panels;
  decltype(f(0.0)) total{};
  for (int p = 0; p < panels; ++p) {
    const double mid = h * (p + 0.5);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) total += (0.5 * h * gl.weights[i]) * f(mid + 0.5 * h * gl.nodes[i]);
  }
  return total;
}

/// Panel count suited to a pair of copy functions and an x-frequency.
int default_panels(const CopyMode& f, const CopyMode& g, int px);

}  // namespace heisfan
